// solver.hpp: Maxwell-Bloch integration of the three protocol stages.
//
// Co-moving-frame equations (dimensionless, gamma = 1):
//     dE/dz = i sqrt(d) P
//     dP/dt = -(1 + i delta) P + i sqrt(d) E + i Omega(t) S
//     dS/dt = -gamma_s S + i conj(Omega(t)) P
// At every time node E(z) is rebuilt from P by the trapezoid rule; P and S
// advance with classic RK4.
#pragma once

#include "lambda_memory/core.hpp"
#include "lambda_memory/kernels.hpp"

#include <optional>
#include <vector>

namespace lmem {

struct StageGrids {
    SpaceGrid space;
    TimeGrid time;
};

struct SolverOptions {
    std::size_t n_z = 200;
    /// Time step; default_dt(max |Omega|) when unset.
    std::optional<double> dt;
    /// Full (z, t) fields are kept at most at this many time nodes.
    std::size_t max_snapshots = 201;
    double instability_factor = 10.0;
    kernels::Exec exec = kernels::Exec::serial;
};

/// min(0.02, 0.1 / (1 + omega_max^2)).
double default_dt(double omega_max) noexcept;

/// Stage grids spanning the control's window at the options' resolution.
StageGrids stage_grids_for(const Envelope& control, const SolverOptions& opts);

struct StageRecord {
    StageGrids grids;
    std::vector<double> snapshot_times;
    std::vector<std::vector<cplx>> E; ///< [snapshot][z]
    std::vector<std::vector<cplx>> P;
    std::vector<std::vector<cplx>> S;

    Envelope control;      ///< Omega(t) on the stage grid
    Envelope in_envelope;  ///< E(0, t)
    Envelope out_envelope; ///< E(1, t)
    SpinWave initial_spin;
    SpinWave final_spin;
    std::vector<cplx> final_polarization;

    // Energy bookkeeping, all trapezoid quadratures on the stage grids.
    double input_energy = 0.0;
    double output_energy = 0.0; ///< also the leaked energy of a writing stage
    double polarization_loss = 0.0; ///< 2 ∫∫ |P|^2 dz dt
    double spin_decay_loss = 0.0;   ///< 2 gamma_s ∫∫ |S|^2 dz dt
    double initial_excitation = 0.0; ///< ∫ (|S|^2 + |P|^2) dz at the first node
    double final_excitation = 0.0;
};

/// Integrate one stage. `input` is E(0, t) (absent = dark boundary). The control
/// and input are linearly interpolated onto the stage grid.
StageRecord propagate_stage(const MediumParams& medium, const Envelope& control, const SpinWave& initial_spin,
                            const std::optional<Envelope>& input, const StageGrids& grids,
                            const SolverOptions& opts = {});

/// Relative residual of
///   E_in - E_out = 2∫∫|P|^2 + 2 gamma_s ∫∫|S|^2 + [∫(|S|^2+|P|^2)dz]_final - [..]_initial,
/// divided by max(E_in, initial excitation). Zero when nothing is excited.
double energy_balance(const StageRecord& record) noexcept;

struct StoreResult {
    SpinWave spin;
    double leak_energy;
    StageRecord record;
};

/// Writing stage: input enters at z = 0 into an empty medium; returns S(z, end of window).
StoreResult store(const MediumParams& medium, const Envelope& input, const Envelope& writing_control,
                  const SolverOptions& opts = {});

/// Dark storage is analytic: S e^{-gamma_s tau} (gamma_s, tau dimensionless).
SpinWave dark_storage(const SpinWave& s, double tau, double gamma_s_tilde);

/// Retrieval stage with a dark boundary; the record's out_envelope is the retrieved pulse.
StageRecord retrieve_record(const MediumParams& medium, const SpinWave& s, const Envelope& retrieval_control,
                            const SolverOptions& opts = {});
Envelope retrieve(const MediumParams& medium, const SpinWave& s, const Envelope& retrieval_control,
                  const SolverOptions& opts = {});

} // namespace lmem
