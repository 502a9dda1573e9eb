// kernels.hpp: inner loops of the two propagators, in a serial reference
// form and an OpenMP form. Both forms perform the same floating-point
// operations in the same order per element, so their results are bitwise
// identical; tests rely on that.
#pragma once

#include "lambda_memory/core.hpp"

#include <span>
#include <vector>

namespace lmem::kernels {

enum class Exec { serial, parallel };

// ------------------------------------------------------------------ full Maxwell-Bloch

struct MbCoefficients {
    double sqrt_d;
    cplx polarization_rate; ///< 1 + i delta
    double spin_rate;       ///< gamma_s / gamma
};

/// E(z) from dE/dz = i sqrt(d) P with E(0) = e0, trapezoid rule on the grid points `z`.
void integrate_field(std::span<const double> z, double sqrt_d, cplx e0, std::span<const cplx> p, std::span<cplx> e);

/// dP = -(1 + i delta) P + i sqrt(d) E + i Omega S;  dS = -gamma_s S + i conj(Omega) P.
void mb_derivatives(const MbCoefficients& c, cplx omega, std::span<const cplx> e, std::span<const cplx> p,
                    std::span<const cplx> s, std::span<cplx> dp, std::span<cplx> ds, Exec exec);

/// y_out = y + h * k (elementwise).
void axpy(std::span<const cplx> y, double h, std::span<const cplx> k, std::span<cplx> y_out, Exec exec);

/// y += h/6 (k1 + 2 k2 + 2 k3 + k4).
void rk4_combine(std::span<cplx> y, double h, std::span<const cplx> k1, std::span<const cplx> k2,
                 std::span<const cplx> k3, std::span<const cplx> k4, Exec exec);

// ------------------------------------------------------------------ control-free adiabatic system

/// Adiabatic retrieval in clock time u:  dE/dz = -d E - sqrt(d) S,  dS/du = -S - sqrt(d) E.
/// The spatial ODE is integrated exactly for piecewise-linear S, which keeps the
/// discretisation error small even when d * dz is not.
class ControlFreeSystem {
  public:
    ControlFreeSystem(double d, const SpaceGrid& grid);

    std::size_t size() const noexcept { return decay_.size() + 1; }
    double d() const noexcept { return d_; }

    void field(cplx e0, std::span<const cplx> s, std::span<cplx> e) const;
    /// ds = -s - sqrt(d) E(s); `scratch` receives E.
    void derivative(cplx e0, std::span<const cplx> s, std::span<cplx> ds, std::span<cplx> scratch) const;

  private:
    double d_;
    double sqrt_d_;
    std::vector<double> decay_; ///< e^{-d h_k}
    std::vector<double> w_prev_;
    std::vector<double> w_next_;
};

struct ControlFreeRun {
    std::vector<cplx> output;     ///< E(z = 1, u_i), i = 0..n_steps
    std::vector<cplx> final_spin; ///< S(z, u_end)
};

/// RK4 in u with step `du`. `boundary` holds E(0, u_i) on the same u grid (empty = zero input).
ControlFreeRun propagate_control_free(const ControlFreeSystem& sys, std::span<const cplx> s0,
                                      std::span<const cplx> boundary, double du, std::size_t n_steps);

/// Independent runs; `boundaries` may be empty (all zero) or have one entry per run.
std::vector<ControlFreeRun> propagate_control_free_batch(const ControlFreeSystem& sys,
                                                         const std::vector<std::vector<cplx>>& s0,
                                                         const std::vector<std::vector<cplx>>& boundaries,
                                                         double du, std::size_t n_steps, Exec exec);

/// Number of OpenMP threads available (1 when built without OpenMP).
int max_threads() noexcept;

} // namespace lmem::kernels
