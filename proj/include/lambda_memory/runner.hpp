// runner.hpp: end-to-end scenarios: optimal mode -> writing control -> storage ->
// dark storage -> retrieval control -> retrieval -> metrics, plus sweeps,
// partial retrieval and the three figure reproductions.
#pragma once

#include "lambda_memory/metrics.hpp"
#include "lambda_memory/optimal_mode.hpp"
#include "lambda_memory/scenario.hpp"
#include "lambda_memory/solver.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

namespace lmem {

/// Thread-safe memo of optimal modes keyed by everything the iteration depends on.
class ModeCache {
  public:
    OptimalModeResult get(const ScenarioSpec& spec, kernels::Exec exec);

  private:
    using Key = std::tuple<double, double, double, double, std::size_t, double, double, double, std::size_t>;
    std::mutex mutex_;
    std::map<Key, OptimalModeResult> cache_;
};

struct RunOptions {
    /// Overrides the scenario's output directory when non-empty.
    std::filesystem::path out_dir;
    bool write_files = true;
    kernels::Exec exec = kernels::Exec::serial;
    std::shared_ptr<ModeCache> cache;
};

struct GridSettings {
    std::size_t n_z = 0;
    double dt_write = 0.0;
    double dt_read = 0.0;
    double envelope_dt = 0.0;
};

struct RunSummary {
    std::string id;
    double alpha_l = 0.0;
    double storage_time = 0.0;
    MetricsReport metrics;
    std::vector<std::filesystem::path> files;
    double wall_time_s = 0.0;
    GridSettings grids;
    std::vector<std::string> warnings;

    // Diagnostics.
    double eta_max = 0.0;            ///< optimal-mode efficiency for this depth (no spin decay)
    double storage_efficiency = 0.0; ///< ∫|S|^2 dz / input energy right after writing
    double stored_mode_overlap = 0.0;
    double eta_r = 0.0;              ///< universal-mode efficiency of the stored spin wave
    double leak_energy = 0.0;
    double residual_write = 0.0;
    double residual_read = 0.0;
    bool cap_saturated = false;

    Envelope input = Envelope::zeros(TimeGrid(0.0, 1.0, 1));
    Envelope target = Envelope::zeros(TimeGrid(0.0, 1.0, 1)); ///< reported frame [tau, tau + T_r]
    Envelope output = Envelope::zeros(TimeGrid(0.0, 1.0, 1)); ///< reported frame [tau, tau + T_r]
    Envelope write_control = Envelope::zeros(TimeGrid(0.0, 1.0, 1));
    Envelope read_control = Envelope::zeros(TimeGrid(0.0, 1.0, 1)); ///< stage-local frame [0, T_r]
    SpinWave optimal = SpinWave::zeros(SpaceGrid(2));
    SpinWave stored = SpinWave::zeros(SpaceGrid(2)); ///< after writing, before dark storage
};

RunSummary run_scenario(const ScenarioSpec& spec, const RunOptions& opts = {});

/// One run per value of a recognised parameter, up to `jobs` in parallel. Writes
/// `summary.csv` into the output directory when files are enabled.
std::vector<RunSummary> run_sweep(const ScenarioSpec& base, const std::string& parameter,
                                  const std::vector<double>& values, const RunOptions& opts = {}, int jobs = 1);

struct PartialRetrieval {
    RunSummary first;
    RunSummary second;
    double full_energy = 0.0;       ///< output energy of an uninterrupted retrieval
    double fraction_requested = 0.0;
    double fraction_achieved = 0.0; ///< E_first / (E_first + E_second)
    double u_star_adiabatic = 0.0;  ///< clock value where the adiabatic mode has emitted `fraction`
    double u_star = 0.0;            ///< clock value actually used (after correction)
    std::vector<std::string> warnings;
};

/// Retrieve `fraction` of the stored excitation into the target shape, then empty
/// the remainder into a second copy of the target with a later retrieval stage.
PartialRetrieval partial_retrieve_scenario(const ScenarioSpec& spec, double fraction, const RunOptions& opts = {});

inline constexpr const char* kSummaryHeader =
    "id,alphaL,storage_time,eta,j2,fidelity,hom_coincidence,bin_ratio,bin_j2,storage_efficiency,cap_saturated";

void write_summary_csv(const std::filesystem::path& path, const std::vector<RunSummary>& runs);
void write_metrics_json(const std::filesystem::path& path, const RunSummary& run);

// ------------------------------------------------------------------ figure reproductions

ScenarioSpec fig1_spec();
std::vector<ScenarioSpec> fig2_specs();
std::vector<double> fig3_default_thetas();
std::vector<ScenarioSpec> fig3_specs(const std::vector<double>& thetas);

struct CheckResult {
    std::string name;
    bool passed;
    std::string detail;
};

struct Reproduction {
    std::vector<RunSummary> runs;
    std::vector<CheckResult> checks;
    bool passed() const;
};

/// `figure` is "fig1", "fig2" or "fig3"; thresholds are the acceptance values.
Reproduction reproduce(const std::string& figure, const RunOptions& opts = {}, int jobs = 1,
                       const std::vector<double>& thetas = {});

} // namespace lmem
