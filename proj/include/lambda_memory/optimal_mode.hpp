// optimal_mode.hpp: optimal spin wave and maximum memory efficiency for a given optical depth.
#pragma once

#include "lambda_memory/core.hpp"
#include "lambda_memory/kernels.hpp"
#include "lambda_memory/solver.hpp"

#include <optional>
#include <vector>

namespace lmem {

struct OptimalModeResult {
    SpinWave mode;  ///< unit norm, largest sample real and positive
    double eta_max; ///< storage + forward retrieval efficiency without spin decay
    std::size_t iterations;
    std::vector<double> convergence_history;
};

struct IterationOptions {
    double write_window = 50.0;
    double read_window = 50.0;
    double tol = 1e-4;
    std::size_t max_iter = 50;
    /// Sampling step of the iterated input/output envelopes.
    double envelope_dt = 0.02;
    SolverOptions solver;
};

/// Constant reference control whose slow-light group delay d / Omega^2 is half the write window.
double reference_control_amplitude(double d, double write_window);

/// Time-reversal iteration with the full solver: store with a constant reference control,
/// retrieve forward with its time reverse, feed back the normalised, time-reversed output.
/// Throws ConvergenceFailure (carrying the history) after max_iter iterations.
OptimalModeResult optimal_mode(const MediumParams& medium, const std::optional<Envelope>& seed = std::nullopt,
                               const IterationOptions& opts = {});

struct OracleOptions {
    double du = 0.1;
    /// Clock range of both the storage input and the retrieval output; max(30, 3d) when unset.
    std::optional<double> u_max;
    kernels::Exec exec = kernels::Exec::parallel;
};

/// Builds the adiabatic storage-then-retrieval map column by column (temporal hat inputs for
/// storage, spatial nodal spin waves for retrieval) and takes its leading singular mode.
OptimalModeResult kernel_oracle(const MediumParams& medium, std::size_t n_z, const OracleOptions& opts = {});

/// Fix the global phase (largest sample real, positive) and normalise.
SpinWave canonical_mode(const SpinWave& s);

} // namespace lmem
