#include "lambda_memory/shaping.hpp"

#include "lambda_memory/errors.hpp"
#include "lambda_memory/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace lmem {

namespace {

double spin_norm2(const SpaceGrid& g, std::span<const cplx> s) {
    const auto w = g.weights();
    double acc = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k)
        acc += w[k] * std::norm(s[k]);
    return acc;
}

double q_energy(std::span<const cplx> q, double du) {
    std::vector<double> f(q.size());
    for (std::size_t i = 0; i < q.size(); ++i)
        f[i] = std::norm(q[i]);
    return trapezoid(f, du);
}

constexpr double kEmpty = 1e-14;
constexpr std::size_t kMaxChunks = 400;

/// Continue the control-free run from `s` until it has (numerically) emptied.
/// Returns q from the current clock value on, including the starting node.
std::vector<cplx> drain(const kernels::ControlFreeSystem& sys, const SpaceGrid& grid, std::vector<cplx> s, double du,
                        std::size_t chunk_steps) {
    std::vector<cplx> q;
    for (std::size_t chunk = 0; chunk < kMaxChunks; ++chunk) {
        auto run = kernels::propagate_control_free(sys, s, {}, du, chunk_steps);
        if (!q.empty())
            q.pop_back(); // shared node
        q.insert(q.end(), run.output.begin(), run.output.end());
        s = std::move(run.final_spin);
        if (spin_norm2(grid, s) < kEmpty)
            return q;
    }
    throw NumericalError("control-free retrieval did not empty the medium");
}

} // namespace

// ------------------------------------------------------------------ UniversalMode

cplx UniversalMode::q_at(double u) const noexcept {
    if (q.empty() || u <= 0.0)
        return q.empty() ? cplx{} : q.front();
    const double x = u / du();
    const auto i = static_cast<std::size_t>(x);
    if (i >= u_steps())
        return q.back();
    const double f = x - static_cast<double>(i);
    return (1.0 - f) * q[i] + f * q[i + 1];
}

std::vector<double> UniversalMode::cumulative() const {
    std::vector<double> c(q.size(), 0.0);
    const double h = du();
    for (std::size_t i = 1; i < q.size(); ++i)
        c[i] = c[i - 1] + 0.5 * h * (std::norm(q[i - 1]) + std::norm(q[i]));
    return c;
}

double UniversalMode::cumulative_at(double u) const {
    const auto c = cumulative();
    if (u <= 0.0)
        return 0.0;
    if (u >= u_max)
        return c.back();
    const double x = u / du();
    const auto i = static_cast<std::size_t>(x);
    const double f = x - static_cast<double>(i);
    return c[i] + f * (c[i + 1] - c[i]);
}

double UniversalMode::clock_for_energy(double value) const {
    const auto c = cumulative();
    if (value <= 0.0)
        return 0.0;
    if (value >= c.back())
        return u_max;
    const auto it = std::lower_bound(c.begin(), c.end(), value);
    const auto i = static_cast<std::size_t>(it - c.begin());
    const double span = c[i] - c[i - 1];
    const double f = span > 0.0 ? (value - c[i - 1]) / span : 1.0;
    return du() * (static_cast<double>(i - 1) + f);
}

UniversalMode universal_retrieval_mode(const MediumParams& medium, const SpinWave& s, double u_max,
                                       std::size_t u_steps, double tail_tolerance) {
    if (!(u_max > 0.0) || u_steps == 0)
        throw InvalidParameter("universal mode needs u_max > 0 and u_steps > 0");
    const SpinWave mode = s.normalized();
    UniversalMode um;
    um.u_max = u_max;
    um.source_mode = mode;
    const double d = medium.d();
    if (d == 0.0) {
        um.q.assign(u_steps + 1, cplx{});
        return um;
    }
    const kernels::ControlFreeSystem sys(d, mode.grid());
    const double du = u_max / static_cast<double>(u_steps);
    auto run = kernels::propagate_control_free(sys, mode.samples(), {}, du, u_steps);
    um.q = std::move(run.output);
    um.eta_r = q_energy(um.q, du);

    const auto beyond = drain(sys, mode.grid(), std::move(run.final_spin), du, std::max<std::size_t>(u_steps, 100));
    const double tail_energy = q_energy(beyond, du);
    um.tail = um.eta_r > 0.0 ? tail_energy / um.eta_r : 0.0;
    if (um.tail > tail_tolerance) {
        std::ostringstream msg;
        msg << "u_max = " << u_max << " leaves a tail of " << um.tail << " (tolerance " << tail_tolerance
            << "); increase u_max";
        throw TailTooLarge(msg.str(), um.tail);
    }
    return um;
}

UniversalMode universal_retrieval_mode(const MediumParams& medium, const SpinWave& s, const ShapingOptions& opts) {
    if (opts.u_max)
        return universal_retrieval_mode(medium, s, *opts.u_max,
                                        static_cast<std::size_t>(std::ceil(*opts.u_max / opts.du - 1e-9)),
                                        opts.tail_tolerance);
    if (!(opts.du > 0.0))
        throw InvalidParameter("clock step must be positive");
    const SpinWave mode = s.normalized();
    UniversalMode um;
    um.source_mode = mode;
    const double d = medium.d();
    if (d == 0.0) {
        um.u_max = 1.0;
        um.q.assign(static_cast<std::size_t>(std::ceil(1.0 / opts.du)) + 1, cplx{});
        return um;
    }
    const kernels::ControlFreeSystem sys(d, mode.grid());
    const double du = opts.du;
    std::vector<cplx> full = drain(sys, mode.grid(), std::vector<cplx>(mode.samples().begin(), mode.samples().end()),
                                   du, static_cast<std::size_t>(std::ceil(10.0 / du)));

    // Smallest node m with  ∫_{u_m}^∞ |q|^2 <= tol * ∫_0^{u_m} |q|^2.
    std::vector<double> c(full.size(), 0.0);
    for (std::size_t i = 1; i < full.size(); ++i)
        c[i] = c[i - 1] + 0.5 * du * (std::norm(full[i - 1]) + std::norm(full[i]));
    const double total = c.back();
    std::size_t m = full.size() - 1;
    for (std::size_t i = 1; i < full.size(); ++i)
        if (total - c[i] <= opts.tail_tolerance * c[i]) {
            m = i;
            break;
        }
    full.resize(m + 1);
    um.u_max = du * static_cast<double>(m);
    um.q = std::move(full);
    um.eta_r = c[m];
    um.tail = um.eta_r > 0.0 ? (total - c[m]) / um.eta_r : 0.0;
    return um;
}

// ------------------------------------------------------------------ clock

ClockSolution solve_clock(const UniversalMode& mode, const Envelope& target, double omega_max,
                          std::optional<double> u_begin, std::optional<double> u_end) {
    if (!(omega_max > 0.0))
        throw InvalidParameter("omega_max must be positive");
    const double ub = u_begin.value_or(0.0);
    const double ue = u_end.value_or(mode.u_max);
    if (!(ub >= 0.0) || !(ue <= mode.u_max * (1.0 + 1e-12)) || !(ue > ub))
        throw InvalidParameter("clock range must satisfy 0 <= u_begin < u_end <= u_max");

    const TimeGrid& grid = target.grid();
    const std::size_t n = grid.size();
    const double dt = grid.dt();

    std::vector<double> intensity(n);
    double peak = 0.0;
    std::size_t peak_index = 0;
    for (std::size_t i = 0; i < n; ++i) {
        intensity[i] = std::norm(target[i]);
        if (intensity[i] > peak) {
            peak = intensity[i];
            peak_index = i;
        }
    }
    std::vector<double> cum(n, 0.0);
    for (std::size_t i = 1; i < n; ++i)
        cum[i] = cum[i - 1] + 0.5 * dt * (intensity[i - 1] + intensity[i]);
    const double target_energy = cum.back();
    if (!(target_energy > 0.0) || !std::isfinite(target_energy))
        throw InvalidParameter("target must have finite, non-zero energy");

    const double q_begin = mode.cumulative_at(ub);
    const double available = mode.cumulative_at(ue) - q_begin;
    if (!(available > 0.0))
        throw InfeasibleTarget("the universal mode carries no energy in the requested clock range");
    const double scale = available / target_energy;

    double q_peak = 0.0;
    for (const auto& v : mode.q)
        q_peak = std::max(q_peak, std::norm(v));

    ClockSolution sol{std::vector<double>(n), Envelope::zeros(grid, EnvelopeKind::control), false, {},
                      Envelope::zeros(grid), {}};
    std::vector<cplx> omega(n);
    std::vector<double> rate(n); // |Omega|^2 before capping
    for (std::size_t i = 0; i < n; ++i) {
        const double u = mode.clock_for_energy(q_begin + scale * cum[i]);
        sol.h[i] = std::clamp(u, ub, ue);
        if (intensity[i] <= 1e-300 || intensity[i] <= 1e-16 * peak)
            continue;
        const cplx qh = mode.q_at(sol.h[i]);
        if (std::norm(qh) <= 1e-14 * q_peak)
            throw InfeasibleTarget("target has intensity where the universal mode has none");
        rate[i] = scale * intensity[i] / std::norm(qh);
        // E_out = Omega q(h): carry the target phase relative to q.
        omega[i] = std::polar(std::sqrt(rate[i]), std::arg(target[i]) - std::arg(qh));
    }
    // Global phase: real, positive control at the target's peak.
    const cplx ref = omega[peak_index];
    if (std::abs(ref) > 0.0) {
        const cplx rot = std::conj(ref) / std::abs(ref);
        for (auto& w : omega)
            w *= rot;
    }
    for (auto& w : omega) {
        const double a = std::abs(w);
        if (a > omega_max) {
            w *= omega_max / a;
            sol.cap_saturated = true;
        }
    }
    if (sol.cap_saturated) {
        std::ostringstream msg;
        msg << "control capped at omega_max = " << omega_max << " (required peak "
            << std::sqrt(*std::max_element(rate.begin(), rate.end())) << ")";
        sol.warnings.push_back(msg.str());
    }

    sol.achieved_h.assign(n, ub);
    for (std::size_t i = 1; i < n; ++i)
        sol.achieved_h[i] = sol.achieved_h[i - 1] + 0.5 * dt * (std::norm(omega[i - 1]) + std::norm(omega[i]));
    std::vector<cplx> predicted(n);
    for (std::size_t i = 0; i < n; ++i)
        predicted[i] = omega[i] * mode.q_at(sol.achieved_h[i]);

    sol.omega = Envelope::control(grid, std::move(omega), omega_max);
    sol.predicted_output = Envelope(grid, std::move(predicted));
    return sol;
}

ShapingResult shape_retrieval(const MediumParams& medium, const SpinWave& s, const Envelope& target,
                              double omega_max, const ShapingOptions& opts) {
    UniversalMode mode = universal_retrieval_mode(medium, s, opts);
    ClockSolution clock = solve_clock(mode, target, omega_max);
    return {std::move(mode), std::move(clock)};
}

Envelope retrieval_control(const MediumParams& medium, const SpinWave& s, const Envelope& target, double omega_max,
                           const ShapingOptions& opts) {
    return shape_retrieval(medium, s, target, omega_max, opts).clock.omega;
}

// ------------------------------------------------------------------ storage by time reversal

Envelope time_reverse(const Envelope& env, double pivot) {
    const TimeGrid& g = env.grid();
    const TimeGrid rg(2.0 * pivot - g.t_end(), 2.0 * pivot - g.t_start(), g.n_steps());
    std::vector<cplx> s(env.samples().rbegin(), env.samples().rend());
    if (env.cap())
        return Envelope::control(rg, std::move(s), *env.cap());
    return {rg, std::move(s), env.kind()};
}

Envelope conjugated(const Envelope& env) {
    std::vector<cplx> s(env.samples().begin(), env.samples().end());
    for (auto& v : s)
        v = std::conj(v);
    if (env.cap())
        return Envelope::control(env.grid(), std::move(s), *env.cap());
    return {env.grid(), std::move(s), env.kind()};
}

WritingShaping shape_writing(const MediumParams& medium, const Envelope& input, const SpinWave& s_target,
                             double omega_max, const ShapingOptions& opts) {
    if (!(input.energy() > 0.0))
        throw InvalidParameter("cannot shape a writing control for a zero-energy input");
    const double pivot = input.grid().t_end();
    const Envelope reversed_input = conjugated(time_reverse(input, pivot));
    ShapingResult r = shape_retrieval(medium, s_target, reversed_input, omega_max, opts);
    Envelope control = conjugated(time_reverse(r.clock.omega, pivot));
    return {std::move(control), std::move(r)};
}

Envelope writing_control(const MediumParams& medium, const Envelope& input, const SpinWave& s_target,
                         double omega_max, const ShapingOptions& opts) {
    return shape_writing(medium, input, s_target, omega_max, opts).control;
}

} // namespace lmem
