// core.hpp: dimensionless domain types shared by all modules.
//
// Units: time in 1/gamma, position in units of the medium length L, Rabi
// frequencies in gamma. Physical units appear only in MediumParams (rates in
// rad/s) and in the conversion helpers at the bottom of this header.
#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace lmem {

using cplx = std::complex<double>;

/// Optical depth and decay rates of the homogeneously broadened Lambda medium.
class MediumParams {
  public:
    /// `gamma`, `gamma_s` in rad/s; `delta` already in units of gamma.
    MediumParams(double alpha_l, double gamma = kDefaultGamma, double gamma_s = 0.0, double delta = 0.0);

    double alpha_l() const noexcept { return alpha_l_; }
    double gamma() const noexcept { return gamma_; }
    double gamma_s() const noexcept { return gamma_s_; }
    double delta() const noexcept { return delta_; }

    /// Coupling depth d = alphaL / 2, so that resonant CW transmission is e^{-2d}.
    double d() const noexcept { return 0.5 * alpha_l_; }
    /// Spin decay rate in units of gamma.
    double gamma_s_tilde() const noexcept { return gamma_s_ / gamma_; }

    MediumParams with_alpha_l(double v) const { return {v, gamma_, gamma_s_, delta_}; }
    MediumParams with_gamma_s(double v) const { return {alpha_l_, gamma_, v, delta_}; }

    /// Pressure-broadened optical half-width (~2pi x 150 MHz for a few tens of Torr of Ne).
    static constexpr double kDefaultGamma = 9.42477796076938e8;

  private:
    double alpha_l_;
    double gamma_;
    double gamma_s_;
    double delta_;
};

/// Uniform grid t_i = t_start + i*dt, i = 0..n_steps (n_steps + 1 points).
class TimeGrid {
  public:
    TimeGrid(double t_start, double t_end, std::size_t n_steps);
    /// Grid covering [t_start, t_end] with spacing no larger than `max_dt`.
    static TimeGrid with_max_step(double t_start, double t_end, double max_dt);

    double t_start() const noexcept { return t_start_; }
    double t_end() const noexcept { return t_end_; }
    std::size_t n_steps() const noexcept { return n_steps_; }
    std::size_t size() const noexcept { return n_steps_ + 1; }
    double dt() const noexcept { return (t_end_ - t_start_) / static_cast<double>(n_steps_); }
    double span() const noexcept { return t_end_ - t_start_; }
    double at(std::size_t i) const noexcept;
    bool contains(double t) const noexcept;

    bool operator==(const TimeGrid&) const = default;

  private:
    double t_start_;
    double t_end_;
    std::size_t n_steps_;
};

/// Spatial points 0 = z_0 < z_1 < ... < z_{n-1} = 1.
class SpaceGrid {
  public:
    explicit SpaceGrid(std::size_t n_z);
    explicit SpaceGrid(std::vector<double> points);

    std::size_t size() const noexcept { return z_.size(); }
    double at(std::size_t k) const noexcept { return z_[k]; }
    std::span<const double> points() const noexcept { return z_; }
    /// Trapezoid weights, sum to 1.
    std::span<const double> weights() const noexcept { return w_; }
    bool uniform() const noexcept { return uniform_; }

    bool operator==(const SpaceGrid& o) const { return z_ == o.z_; }

  private:
    void finish();

    std::vector<double> z_;
    std::vector<double> w_;
    bool uniform_ = true;
};

enum class EnvelopeKind { signal, control };

/// Complex amplitude sampled on a TimeGrid.
class Envelope {
  public:
    Envelope(TimeGrid grid, std::vector<cplx> samples, EnvelopeKind kind = EnvelopeKind::signal);
    static Envelope zeros(TimeGrid grid, EnvelopeKind kind = EnvelopeKind::signal);
    /// Control envelope whose magnitude must not exceed `omega_max` (with 1e-9 relative slack).
    static Envelope control(TimeGrid grid, std::vector<cplx> samples, double omega_max);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::span<const cplx> samples() const noexcept { return samples_; }
    cplx operator[](std::size_t i) const noexcept { return samples_[i]; }
    std::size_t size() const noexcept { return samples_.size(); }
    EnvelopeKind kind() const noexcept { return kind_; }
    std::optional<double> cap() const noexcept { return cap_; }

    /// Linear interpolation; zero outside the grid.
    cplx at(double t) const noexcept;
    /// Trapezoid quadrature of |E|^2 dt.
    double energy() const noexcept;
    double max_abs() const noexcept;

    Envelope scaled(cplx c) const;
    Envelope normalized() const;
    Envelope shifted(double dt) const;
    Envelope with_kind(EnvelopeKind k) const;

  private:
    TimeGrid grid_;
    std::vector<cplx> samples_;
    EnvelopeKind kind_;
    std::optional<double> cap_;
};

/// Resample onto another grid by linear interpolation (zero outside the source grid).
Envelope resample(const Envelope& env, const TimeGrid& grid);

/// Ground-state coherence profile along the medium.
class SpinWave {
  public:
    SpinWave(SpaceGrid grid, std::vector<cplx> samples);
    static SpinWave zeros(SpaceGrid grid);

    const SpaceGrid& grid() const noexcept { return grid_; }
    std::span<const cplx> samples() const noexcept { return samples_; }
    cplx operator[](std::size_t k) const noexcept { return samples_[k]; }
    std::size_t size() const noexcept { return samples_.size(); }

    /// Trapezoid quadrature of |S|^2 dz.
    double norm2() const noexcept;
    cplx at(double z) const noexcept;

    SpinWave scaled(cplx c) const;
    SpinWave normalized() const;
    /// S(1 - z) on the mirrored grid.
    SpinWave flipped() const;

  private:
    SpaceGrid grid_;
    std::vector<cplx> samples_;
};

SpinWave resample(const SpinWave& s, const SpaceGrid& grid);

/// |<a,b>|^2 / (|a|^2 |b|^2) with the trapezoid inner product; b is resampled onto a's grid.
double mode_overlap(const SpinWave& a, const SpinWave& b);

/// Trapezoid integral of samples with uniform spacing h.
double trapezoid(std::span<const double> f, double h) noexcept;

// Unit conversion helpers (I/O boundary only).
inline double to_dimensionless_time(double seconds, double gamma) { return seconds * gamma; }
inline double microseconds_to_dimensionless(double us, double gamma) { return us * 1e-6 * gamma; }
/// Spin-wave energy lifetime 1/(2 gamma_s) in microseconds -> gamma_s in rad/s.
inline double spin_lifetime_us_to_rate(double us) { return 1.0 / (2.0 * us * 1e-6); }

} // namespace lmem
