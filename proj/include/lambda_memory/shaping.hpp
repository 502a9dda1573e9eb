// shaping.hpp: control-field synthesis in the resonant adiabatic limit.
//
// Eliminating P adiabatically and substituting u(t) = ∫|Omega|^2 dt',
// E~ = E / Omega turns retrieval into the control-free system
//     dE~/dz = -d E~ - sqrt(d) S,   dS/du = -S - sqrt(d) E~,   E~(0, u) = 0.
// Its output q(u) = E~(1, u) depends only on the initial spin wave. A control
// is then a clock h(t) that plays q back at the rate needed to reproduce a
// target intensity:  |q(h)|^2 dh/dt = |E_tgt(t)|^2 (target rescaled to the
// energy available in q). Storage controls follow by time reversal.
#pragma once

#include "lambda_memory/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lmem {

struct UniversalMode {
    double u_max = 0.0;
    std::vector<cplx> q;     ///< E~(z = 1, u_i) on the uniform grid [0, u_max]
    double eta_r = 0.0;      ///< ∫_0^{u_max} |q|^2 du
    double tail = 0.0;       ///< (∫_{u_max}^∞ |q|^2 du) / eta_r
    SpinWave source_mode = SpinWave::zeros(SpaceGrid(2)); ///< unit-normalised spin wave the mode came from

    std::size_t u_steps() const noexcept { return q.empty() ? 0 : q.size() - 1; }
    double du() const noexcept { return u_max / static_cast<double>(u_steps()); }
    cplx q_at(double u) const noexcept;
    /// Q(u_i) = ∫_0^{u_i} |q|^2 du (trapezoid).
    std::vector<double> cumulative() const;
    /// Value of Q at an arbitrary clock value (linear between nodes).
    double cumulative_at(double u) const;
    /// Smallest u with Q(u) = value.
    double clock_for_energy(double value) const;
};

struct ShapingOptions {
    double tail_tolerance = 1e-3;
    double du = 0.01;
    /// Explicit clock range; chosen from the tail tolerance when unset.
    std::optional<double> u_max;
};

/// q(u) on [0, u_max] with `u_steps` RK4 steps. Throws TailTooLarge when more than
/// `tail_tolerance` of eta_r would still be emitted after u_max.
UniversalMode universal_retrieval_mode(const MediumParams& medium, const SpinWave& s, double u_max,
                                       std::size_t u_steps, double tail_tolerance = 1e-3);
/// Same, with u_max the smallest clock range meeting the tail tolerance.
UniversalMode universal_retrieval_mode(const MediumParams& medium, const SpinWave& s,
                                       const ShapingOptions& opts = {});

struct ClockSolution {
    std::vector<double> h;          ///< intended clock on the target grid
    Envelope omega;                 ///< control, capped at omega_max
    bool cap_saturated = false;
    std::vector<double> achieved_h; ///< ∫|Omega|^2 dt of the (possibly capped) control
    Envelope predicted_output;      ///< adiabatic prediction Omega(t) q(achieved_h(t))
    std::vector<std::string> warnings;
};

/// Clock that plays q back as `target`. The clock runs over [u_begin, u_end]
/// (default: the whole mode), so the target receives ∫_{u_begin}^{u_end}|q|^2 du.
ClockSolution solve_clock(const UniversalMode& mode, const Envelope& target, double omega_max,
                          std::optional<double> u_begin = std::nullopt, std::optional<double> u_end = std::nullopt);

struct ShapingResult {
    UniversalMode mode;
    ClockSolution clock;
};

ShapingResult shape_retrieval(const MediumParams& medium, const SpinWave& s, const Envelope& target,
                              double omega_max, const ShapingOptions& opts = {});

/// Control that retrieves `s` into the shape of `target` (forward direction).
Envelope retrieval_control(const MediumParams& medium, const SpinWave& s, const Envelope& target, double omega_max,
                           const ShapingOptions& opts = {});

struct WritingShaping {
    Envelope control;
    ShapingResult reversed; ///< the time-reversed retrieval problem
};

WritingShaping shape_writing(const MediumParams& medium, const Envelope& input, const SpinWave& s_target,
                             double omega_max, const ShapingOptions& opts = {});

/// Control that stores `input` into `s_target`: the time reverse (about the end of the
/// input window) of the control that retrieves s_target into the conjugated, time-reversed
/// input. Exact in the adiabatic limit when s_target is the optimal mode.
Envelope writing_control(const MediumParams& medium, const Envelope& input, const SpinWave& s_target,
                         double omega_max, const ShapingOptions& opts = {});

/// f(t) -> f(2 pivot - t).
Envelope time_reverse(const Envelope& env, double pivot);

Envelope conjugated(const Envelope& env);

} // namespace lmem
