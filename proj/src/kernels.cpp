#include "lambda_memory/kernels.hpp"

#include "lambda_memory/errors.hpp"

#include <cmath>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lmem::kernels {

namespace {

constexpr cplx kI{0.0, 1.0};

using index_t = std::ptrdiff_t;

index_t ssize_of(std::span<const cplx> s) { return static_cast<index_t>(s.size()); }

} // namespace

int max_threads() noexcept {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void integrate_field(std::span<const double> z, double sqrt_d, cplx e0, std::span<const cplx> p, std::span<cplx> e) {
    // A running sum; inherently sequential.
    const cplx c = 0.5 * kI * sqrt_d;
    e[0] = e0;
    for (std::size_t k = 1; k < p.size(); ++k)
        e[k] = e[k - 1] + c * (z[k] - z[k - 1]) * (p[k - 1] + p[k]);
}

void mb_derivatives(const MbCoefficients& c, cplx omega, std::span<const cplx> e, std::span<const cplx> p,
                    std::span<const cplx> s, std::span<cplx> dp, std::span<cplx> ds, Exec exec) {
    const index_t n = ssize_of(p);
    const cplx i_sqrt_d = kI * c.sqrt_d;
    const cplx i_omega = kI * omega;
    const cplx i_omega_c = kI * std::conj(omega);
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (index_t k = 0; k < n; ++k) {
            dp[k] = -c.polarization_rate * p[k] + i_sqrt_d * e[k] + i_omega * s[k];
            ds[k] = -c.spin_rate * s[k] + i_omega_c * p[k];
        }
    } else {
        for (index_t k = 0; k < n; ++k) {
            dp[k] = -c.polarization_rate * p[k] + i_sqrt_d * e[k] + i_omega * s[k];
            ds[k] = -c.spin_rate * s[k] + i_omega_c * p[k];
        }
    }
}

void axpy(std::span<const cplx> y, double h, std::span<const cplx> k, std::span<cplx> y_out, Exec exec) {
    const index_t n = ssize_of(y);
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (index_t i = 0; i < n; ++i)
            y_out[i] = y[i] + h * k[i];
    } else {
        for (index_t i = 0; i < n; ++i)
            y_out[i] = y[i] + h * k[i];
    }
}

void rk4_combine(std::span<cplx> y, double h, std::span<const cplx> k1, std::span<const cplx> k2,
                 std::span<const cplx> k3, std::span<const cplx> k4, Exec exec) {
    const index_t n = static_cast<index_t>(y.size());
    const double h6 = h / 6.0;
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (index_t i = 0; i < n; ++i)
            y[i] += h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    } else {
        for (index_t i = 0; i < n; ++i)
            y[i] += h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

// ------------------------------------------------------------------ control-free system

ControlFreeSystem::ControlFreeSystem(double d, const SpaceGrid& grid) : d_(d), sqrt_d_(std::sqrt(d)) {
    if (!(d >= 0.0))
        throw InvalidParameter("coupling depth must be non-negative");
    const auto z = grid.points();
    const std::size_t n = z.size();
    decay_.resize(n - 1);
    w_prev_.resize(n - 1);
    w_next_.resize(n - 1);
    for (std::size_t k = 1; k < n; ++k) {
        const double h = z[k] - z[k - 1];
        const double x = d * h;
        const double a = std::exp(-x);
        decay_[k - 1] = a;
        // Weights of S(z_{k-1}) and S(z_k) in  int_0^h e^{-d(h-s)} S(s) ds  for linear S.
        if (x < 1e-6) {
            w_next_[k - 1] = h * (0.5 - x / 6.0);
            w_prev_[k - 1] = h * (0.5 - x / 3.0);
        } else {
            const double total = -std::expm1(-x) / d;
            const double first_moment = (-std::expm1(-x) - x * a) / (d * x);
            w_next_[k - 1] = total - first_moment;
            w_prev_[k - 1] = first_moment;
        }
    }
}

void ControlFreeSystem::field(cplx e0, std::span<const cplx> s, std::span<cplx> e) const {
    e[0] = e0;
    for (std::size_t k = 1; k < s.size(); ++k)
        e[k] = decay_[k - 1] * e[k - 1] - sqrt_d_ * (w_prev_[k - 1] * s[k - 1] + w_next_[k - 1] * s[k]);
}

void ControlFreeSystem::derivative(cplx e0, std::span<const cplx> s, std::span<cplx> ds,
                                   std::span<cplx> scratch) const {
    field(e0, s, scratch);
    for (std::size_t k = 0; k < s.size(); ++k)
        ds[k] = -s[k] - sqrt_d_ * scratch[k];
}

ControlFreeRun propagate_control_free(const ControlFreeSystem& sys, std::span<const cplx> s0,
                                      std::span<const cplx> boundary, double du, std::size_t n_steps) {
    const std::size_t n = s0.size();
    if (n != sys.size())
        throw InvalidParameter("spin wave does not match the control-free system grid");
    if (!boundary.empty() && boundary.size() != n_steps + 1)
        throw InvalidParameter("boundary input must have n_steps + 1 samples");
    auto input = [&](std::size_t i) { return boundary.empty() ? cplx{} : boundary[i]; };

    ControlFreeRun run;
    run.output.resize(n_steps + 1);
    std::vector<cplx> s(s0.begin(), s0.end()), tmp(n), e(n), k1(n), k2(n), k3(n), k4(n);

    for (std::size_t i = 0; i < n_steps; ++i) {
        const cplx b0 = input(i);
        const cplx b1 = input(i + 1);
        const cplx bm = 0.5 * (b0 + b1);
        sys.derivative(b0, s, k1, e);
        run.output[i] = e[n - 1];
        for (std::size_t k = 0; k < n; ++k)
            tmp[k] = s[k] + 0.5 * du * k1[k];
        sys.derivative(bm, tmp, k2, e);
        for (std::size_t k = 0; k < n; ++k)
            tmp[k] = s[k] + 0.5 * du * k2[k];
        sys.derivative(bm, tmp, k3, e);
        for (std::size_t k = 0; k < n; ++k)
            tmp[k] = s[k] + du * k3[k];
        sys.derivative(b1, tmp, k4, e);
        for (std::size_t k = 0; k < n; ++k)
            s[k] += du / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    }
    sys.field(input(n_steps), s, e);
    run.output[n_steps] = e[n - 1];
    run.final_spin = std::move(s);
    return run;
}

std::vector<ControlFreeRun> propagate_control_free_batch(const ControlFreeSystem& sys,
                                                         const std::vector<std::vector<cplx>>& s0,
                                                         const std::vector<std::vector<cplx>>& boundaries,
                                                         double du, std::size_t n_steps, Exec exec) {
    if (!boundaries.empty() && boundaries.size() != s0.size())
        throw InvalidParameter("need one boundary input per run");
    const index_t m = static_cast<index_t>(s0.size());
    std::vector<ControlFreeRun> runs(s0.size());
    auto one = [&](index_t j) {
        const std::span<const cplx> b = boundaries.empty() ? std::span<const cplx>{} : boundaries[j];
        runs[j] = propagate_control_free(sys, s0[j], b, du, n_steps);
    };
    if (exec == Exec::parallel) {
        // Exceptions cannot cross the parallel region; inputs are validated above and per run below.
        for (const auto& s : s0)
            if (s.size() != sys.size())
                throw InvalidParameter("spin wave does not match the control-free system grid");
        for (const auto& b : boundaries)
            if (!b.empty() && b.size() != n_steps + 1)
                throw InvalidParameter("boundary input must have n_steps + 1 samples");
#pragma omp parallel for schedule(dynamic, 4)
        for (index_t j = 0; j < m; ++j)
            one(j);
    } else {
        for (index_t j = 0; j < m; ++j)
            one(j);
    }
    return runs;
}

} // namespace lmem::kernels
