#include "lambda_memory/core.hpp"

#include "lambda_memory/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lmem {

MediumParams::MediumParams(double alpha_l, double gamma, double gamma_s, double delta)
    : alpha_l_(alpha_l), gamma_(gamma), gamma_s_(gamma_s), delta_(delta) {
    if (!(alpha_l >= 0.0) || !std::isfinite(alpha_l))
        throw InvalidParameter("alphaL must be finite and >= 0");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw InvalidParameter("gamma must be finite and > 0");
    if (!(gamma_s >= 0.0) || !std::isfinite(gamma_s))
        throw InvalidParameter("gamma_s must be finite and >= 0");
    if (!std::isfinite(delta))
        throw InvalidParameter("delta must be finite");
}

// ---------------------------------------------------------------- TimeGrid

TimeGrid::TimeGrid(double t_start, double t_end, std::size_t n_steps)
    : t_start_(t_start), t_end_(t_end), n_steps_(n_steps) {
    if (!std::isfinite(t_start) || !std::isfinite(t_end) || !(t_end > t_start))
        throw InvalidParameter("time grid needs t_end > t_start");
    if (n_steps == 0)
        throw InvalidParameter("time grid needs n_steps > 0");
}

TimeGrid TimeGrid::with_max_step(double t_start, double t_end, double max_dt) {
    if (!(max_dt > 0.0))
        throw InvalidParameter("time step must be positive");
    const double n = std::ceil((t_end - t_start) / max_dt - 1e-9);
    return {t_start, t_end, static_cast<std::size_t>(std::max(1.0, n))};
}

double TimeGrid::at(std::size_t i) const noexcept {
    if (i == n_steps_)
        return t_end_;
    return t_start_ + static_cast<double>(i) * dt();
}

bool TimeGrid::contains(double t) const noexcept {
    const double eps = 1e-12 * std::max(1.0, std::abs(t_start_) + std::abs(t_end_));
    return t >= t_start_ - eps && t <= t_end_ + eps;
}

// ---------------------------------------------------------------- SpaceGrid

SpaceGrid::SpaceGrid(std::size_t n_z) {
    if (n_z < 2)
        throw InvalidParameter("space grid needs n_z >= 2");
    z_.resize(n_z);
    for (std::size_t k = 0; k < n_z; ++k)
        z_[k] = static_cast<double>(k) / static_cast<double>(n_z - 1);
    z_.back() = 1.0;
    finish();
}

SpaceGrid::SpaceGrid(std::vector<double> points) : z_(std::move(points)) {
    if (z_.size() < 2)
        throw InvalidParameter("space grid needs n_z >= 2");
    if (z_.front() != 0.0 || z_.back() != 1.0)
        throw InvalidParameter("space grid must start at 0 and end at 1");
    for (std::size_t k = 1; k < z_.size(); ++k)
        if (!(z_[k] > z_[k - 1]))
            throw InvalidParameter("space grid must be strictly increasing");
    finish();
}

void SpaceGrid::finish() {
    const std::size_t n = z_.size();
    w_.assign(n, 0.0);
    const double h0 = z_[1] - z_[0];
    for (std::size_t k = 1; k < n; ++k) {
        const double h = z_[k] - z_[k - 1];
        w_[k - 1] += 0.5 * h;
        w_[k] += 0.5 * h;
        if (std::abs(h - h0) > 1e-12)
            uniform_ = false;
    }
}

// ---------------------------------------------------------------- Envelope

Envelope::Envelope(TimeGrid grid, std::vector<cplx> samples, EnvelopeKind kind)
    : grid_(grid), samples_(std::move(samples)), kind_(kind) {
    if (samples_.size() != grid_.size())
        throw InvalidParameter("envelope has " + std::to_string(samples_.size()) + " samples for a grid of " +
                               std::to_string(grid_.size()) + " points");
    for (const auto& s : samples_)
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw InvalidParameter("envelope samples must be finite");
}

Envelope Envelope::zeros(TimeGrid grid, EnvelopeKind kind) {
    return {grid, std::vector<cplx>(grid.size()), kind};
}

Envelope Envelope::control(TimeGrid grid, std::vector<cplx> samples, double omega_max) {
    if (!(omega_max > 0.0))
        throw InvalidParameter("omega_max must be positive");
    Envelope e(grid, std::move(samples), EnvelopeKind::control);
    if (e.max_abs() > omega_max * (1.0 + 1e-9))
        throw InvalidParameter("control exceeds omega_max");
    e.cap_ = omega_max;
    return e;
}

cplx Envelope::at(double t) const noexcept {
    if (!grid_.contains(t))
        return {};
    const double x = (t - grid_.t_start()) / grid_.dt();
    if (x <= 0.0)
        return samples_.front();
    const auto i = static_cast<std::size_t>(x);
    if (i >= grid_.n_steps())
        return samples_.back();
    const double f = x - static_cast<double>(i);
    return (1.0 - f) * samples_[i] + f * samples_[i + 1];
}

double Envelope::energy() const noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const double w = (i == 0 || i + 1 == samples_.size()) ? 0.5 : 1.0;
        acc += w * std::norm(samples_[i]);
    }
    return acc * grid_.dt();
}

double Envelope::max_abs() const noexcept {
    double m = 0.0;
    for (const auto& s : samples_)
        m = std::max(m, std::abs(s));
    return m;
}

Envelope Envelope::scaled(cplx c) const {
    std::vector<cplx> out(samples_);
    for (auto& s : out)
        s *= c;
    return {grid_, std::move(out), kind_};
}

Envelope Envelope::normalized() const {
    const double e = energy();
    if (!(e > 0.0))
        throw InvalidParameter("cannot normalize a zero-energy envelope");
    return scaled(1.0 / std::sqrt(e));
}

Envelope Envelope::shifted(double dt) const {
    return {TimeGrid(grid_.t_start() + dt, grid_.t_end() + dt, grid_.n_steps()), samples_, kind_};
}

Envelope Envelope::with_kind(EnvelopeKind k) const {
    Envelope e(*this);
    e.kind_ = k;
    return e;
}

Envelope resample(const Envelope& env, const TimeGrid& grid) {
    if (env.grid() == grid)
        return env;
    std::vector<cplx> out(grid.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = env.at(grid.at(i));
    return {grid, std::move(out), env.kind()};
}

// ---------------------------------------------------------------- SpinWave

SpinWave::SpinWave(SpaceGrid grid, std::vector<cplx> samples) : grid_(std::move(grid)), samples_(std::move(samples)) {
    if (samples_.size() != grid_.size())
        throw InvalidParameter("spin wave sample count does not match its grid");
    for (const auto& s : samples_)
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw InvalidParameter("spin wave samples must be finite");
}

SpinWave SpinWave::zeros(SpaceGrid grid) {
    const auto n = grid.size();
    return {std::move(grid), std::vector<cplx>(n)};
}

double SpinWave::norm2() const noexcept {
    const auto w = grid_.weights();
    double acc = 0.0;
    for (std::size_t k = 0; k < samples_.size(); ++k)
        acc += w[k] * std::norm(samples_[k]);
    return acc;
}

cplx SpinWave::at(double z) const noexcept {
    const auto pts = grid_.points();
    if (z <= 0.0)
        return samples_.front();
    if (z >= 1.0)
        return samples_.back();
    const auto it = std::upper_bound(pts.begin(), pts.end(), z);
    const auto k = static_cast<std::size_t>(it - pts.begin());
    const double f = (z - pts[k - 1]) / (pts[k] - pts[k - 1]);
    return (1.0 - f) * samples_[k - 1] + f * samples_[k];
}

SpinWave SpinWave::scaled(cplx c) const {
    std::vector<cplx> out(samples_);
    for (auto& s : out)
        s *= c;
    return {grid_, std::move(out)};
}

SpinWave SpinWave::normalized() const {
    const double n = norm2();
    if (!(n > 0.0))
        throw InvalidParameter("cannot normalize a zero spin wave");
    return scaled(1.0 / std::sqrt(n));
}

SpinWave SpinWave::flipped() const {
    std::vector<double> z(grid_.size());
    const auto pts = grid_.points();
    for (std::size_t k = 0; k < z.size(); ++k)
        z[k] = 1.0 - pts[z.size() - 1 - k];
    z.front() = 0.0;
    z.back() = 1.0;
    SpaceGrid g = grid_.uniform() ? grid_ : SpaceGrid(std::move(z));
    return {std::move(g), std::vector<cplx>(samples_.rbegin(), samples_.rend())};
}

SpinWave resample(const SpinWave& s, const SpaceGrid& grid) {
    if (s.grid() == grid)
        return s;
    std::vector<cplx> out(grid.size());
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = s.at(grid.at(k));
    return {grid, std::move(out)};
}

double mode_overlap(const SpinWave& a, const SpinWave& b) {
    const SpinWave bb = resample(b, a.grid());
    const auto w = a.grid().weights();
    cplx inner{};
    for (std::size_t k = 0; k < a.size(); ++k)
        inner += w[k] * std::conj(a[k]) * bb[k];
    const double na = a.norm2();
    const double nb = bb.norm2();
    if (!(na > 0.0) || !(nb > 0.0))
        throw InvalidParameter("mode overlap of a zero spin wave");
    return std::norm(inner) / (na * nb);
}

double trapezoid(std::span<const double> f, double h) noexcept {
    if (f.size() < 2)
        return 0.0;
    double acc = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i)
        acc += f[i];
    return acc * h;
}

} // namespace lmem
