// scenario.hpp: declarative experiment description and its JSON config format.
//
// Stage-local time frames: the input pulse lives on [-write_window, 0], the
// target on [0, read_window]; retrieval results are reported shifted by the
// storage time.
#pragma once

#include "lambda_memory/core.hpp"
#include "lambda_memory/optimal_mode.hpp"
#include "lambda_memory/shaping.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lmem {

enum class PulseShape { gaussian, ramp_pos, ramp_neg, time_bin, custom };

struct PulseDescriptor {
    PulseShape shape = PulseShape::gaussian;
    std::optional<double> center; ///< gaussian; default: window centre
    double sigma = 6.0;           ///< gaussian intensity rms width
    double duration = 40.0;       ///< ramps
    std::optional<double> rise;   ///< ramps; default duration / 20
    double theta = 0.7853981633974483;
    double phi = 0.0;
    double sigma_bin = 3.0;
    double separation = 24.0;
    std::vector<cplx> samples; ///< custom: uniform samples spanning the window
};

struct ScenarioSpec {
    std::string id = "scenario";
    MediumParams medium{24.0};
    PulseDescriptor input;
    PulseDescriptor target;
    double storage_time = 0.0; ///< dimensionless (units 1/gamma)
    double write_window = 50.0;
    double read_window = 50.0;
    double omega_max = 10.0;
    std::size_t n_z = 200;
    std::optional<double> dt; ///< solver step; default_dt(max |Omega|) when unset
    double envelope_dt = 0.02;
    ShapingOptions shaping;
    /// Full-solver corrections applied to the adiabatic retrieval control (0 = none).
    std::size_t refine_iterations = 2;
    double iteration_tol = 1e-4;
    std::size_t iteration_max = 50;
    std::filesystem::path out_dir = "out";

    void validate() const;
    TimeGrid input_grid() const;
    TimeGrid target_grid() const;
    /// gamma_s tau (dimensionless product that sets the dark-storage loss).
    double storage_decay_exponent() const { return medium.gamma_s_tilde() * storage_time; }
};

std::string to_string(PulseShape s);
PulseShape parse_shape(const std::string& s);

Envelope build_pulse(const PulseDescriptor& d, const TimeGrid& grid);

/// Parse a scenario. Throws InvalidParameter on schema or range errors. Only
/// medium.alphaL, input.shape and target.shape are mandatory.
ScenarioSpec parse_scenario(const nlohmann::json& j);
ScenarioSpec load_scenario(const std::filesystem::path& path);
nlohmann::json to_json(const ScenarioSpec& s);

/// Names accepted by set_parameter (and therefore by sweeps and CLI overrides).
const std::vector<std::string>& parameter_names();
/// Override one numeric field by name; physical-unit names convert using the scenario's gamma.
void set_parameter(ScenarioSpec& s, const std::string& name, double value);

} // namespace lmem
