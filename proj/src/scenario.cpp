#include "lambda_memory/scenario.hpp"

#include "lambda_memory/errors.hpp"
#include "lambda_memory/pulses.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace lmem {

using nlohmann::json;

namespace {

double number(const json& j, const char* key, double fallback) {
    if (!j.contains(key) || j.at(key).is_null())
        return fallback;
    if (!j.at(key).is_number())
        throw InvalidParameter(std::string("field '") + key + "' must be a number");
    return j.at(key).get<double>();
}

std::optional<double> optional_number(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null())
        return std::nullopt;
    return number(j, key, 0.0);
}

const json& object(const json& j, const char* key) {
    if (!j.contains(key))
        throw InvalidParameter(std::string("missing required section '") + key + "'");
    if (!j.at(key).is_object())
        throw InvalidParameter(std::string("section '") + key + "' must be an object");
    return j.at(key);
}

PulseDescriptor parse_pulse(const json& j, const char* section) {
    if (!j.contains("shape") || !j.at("shape").is_string())
        throw InvalidParameter(std::string(section) + ".shape is required");
    PulseDescriptor d;
    d.shape = parse_shape(j.at("shape").get<std::string>());
    d.center = optional_number(j, "center");
    d.sigma = number(j, "sigma", d.sigma);
    d.duration = number(j, "duration", d.duration);
    d.rise = optional_number(j, "rise");
    d.theta = number(j, "theta", d.theta);
    d.phi = number(j, "phi", d.phi);
    d.sigma_bin = number(j, "sigma_bin", d.sigma_bin);
    d.separation = number(j, "separation", d.separation);
    if (d.shape == PulseShape::custom) {
        if (!j.contains("samples") || !j.at("samples").is_array() || j.at("samples").size() < 2)
            throw InvalidParameter(std::string(section) + ".samples must list at least two [re, im] pairs");
        for (const auto& v : j.at("samples")) {
            if (v.is_number())
                d.samples.emplace_back(v.get<double>(), 0.0);
            else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
                d.samples.emplace_back(v[0].get<double>(), v[1].get<double>());
            else
                throw InvalidParameter(std::string(section) + ".samples entries must be numbers or [re, im]");
        }
    }
    return d;
}

json pulse_json(const PulseDescriptor& d) {
    json j{{"shape", to_string(d.shape)}};
    switch (d.shape) {
    case PulseShape::gaussian:
        j["sigma"] = d.sigma;
        if (d.center)
            j["center"] = *d.center;
        break;
    case PulseShape::ramp_pos:
    case PulseShape::ramp_neg:
        j["duration"] = d.duration;
        if (d.rise)
            j["rise"] = *d.rise;
        break;
    case PulseShape::time_bin:
        j["theta"] = d.theta;
        j["phi"] = d.phi;
        j["sigma_bin"] = d.sigma_bin;
        j["separation"] = d.separation;
        break;
    case PulseShape::custom: {
        json arr = json::array();
        for (const auto& v : d.samples)
            arr.push_back({v.real(), v.imag()});
        j["samples"] = arr;
        break;
    }
    }
    return j;
}

void validate_pulse(const PulseDescriptor& d, const char* section, const TimeGrid& grid) {
    const std::string s(section);
    switch (d.shape) {
    case PulseShape::gaussian: {
        if (!(d.sigma > 0.0))
            throw InvalidParameter(s + ".sigma must be positive");
        const double c = d.center.value_or(0.5 * (grid.t_start() + grid.t_end()));
        if (c - 3.0 * d.sigma < grid.t_start() || c + 3.0 * d.sigma > grid.t_end())
            throw InvalidParameter(s + ": the Gaussian (center +- 3 sigma) must fit inside its window");
        break;
    }
    case PulseShape::ramp_pos:
    case PulseShape::ramp_neg:
        if (!(d.duration > 0.0) || (d.rise && !(*d.rise >= 0.0)))
            throw InvalidParameter(s + ".duration must be positive and rise non-negative");
        break;
    case PulseShape::time_bin:
        if (!(d.theta >= 0.0 && d.theta <= 0.5 * std::numbers::pi))
            throw InvalidParameter(s + ".theta must lie in [0, pi/2]");
        if (!(d.sigma_bin > 0.0) || d.separation < 4.0 * d.sigma_bin)
            throw InvalidParameter(s + ": time bins need sigma_bin > 0 and separation >= 4 sigma_bin");
        break;
    case PulseShape::custom:
        if (d.samples.size() < 2)
            throw InvalidParameter(s + ".samples needs at least two entries");
        break;
    }
}

} // namespace

std::string to_string(PulseShape s) {
    switch (s) {
    case PulseShape::gaussian: return "gaussian";
    case PulseShape::ramp_pos: return "ramp_pos";
    case PulseShape::ramp_neg: return "ramp_neg";
    case PulseShape::time_bin: return "time_bin";
    case PulseShape::custom: return "custom";
    }
    return "unknown";
}

PulseShape parse_shape(const std::string& s) {
    if (s == "gaussian")
        return PulseShape::gaussian;
    if (s == "ramp_pos")
        return PulseShape::ramp_pos;
    if (s == "ramp_neg")
        return PulseShape::ramp_neg;
    if (s == "time_bin")
        return PulseShape::time_bin;
    if (s == "custom")
        return PulseShape::custom;
    throw InvalidParameter("unknown pulse shape '" + s + "'");
}

Envelope build_pulse(const PulseDescriptor& d, const TimeGrid& grid) {
    switch (d.shape) {
    case PulseShape::gaussian:
        return make_gaussian(d.center.value_or(0.5 * (grid.t_start() + grid.t_end())), d.sigma, grid);
    case PulseShape::ramp_pos:
        return make_ramp(RampSign::positive, d.duration, grid, d.rise);
    case PulseShape::ramp_neg:
        return make_ramp(RampSign::negative, d.duration, grid, d.rise);
    case PulseShape::time_bin:
        return make_time_bin(d.theta, d.phi, d.sigma_bin, d.separation, grid);
    case PulseShape::custom: {
        const TimeGrid src(grid.t_start(), grid.t_end(), d.samples.size() - 1);
        return resample(Envelope(src, d.samples), grid).normalized();
    }
    }
    throw InvalidParameter("unknown pulse shape");
}

void ScenarioSpec::validate() const {
    if (!(write_window > 0.0) || !(read_window > 0.0))
        throw InvalidParameter("write_window and read_window must be positive");
    if (!(storage_time >= 0.0))
        throw InvalidParameter("storage_time must be non-negative");
    if (!(omega_max > 0.0))
        throw InvalidParameter("omega_max must be positive");
    if (n_z < 2)
        throw InvalidParameter("grid.n_z must be at least 2");
    if (dt && !(*dt > 0.0))
        throw InvalidParameter("grid.dt must be positive");
    if (!(envelope_dt > 0.0) || envelope_dt > 0.1 * std::min(write_window, read_window))
        throw InvalidParameter("grid.envelope_dt must be positive and well below the windows");
    if (!(shaping.tail_tolerance > 0.0) || !(shaping.du > 0.0))
        throw InvalidParameter("shaping.tail_tolerance and shaping.du must be positive");
    if (!(iteration_tol > 0.0) || iteration_max == 0)
        throw InvalidParameter("iteration.tol must be positive and iteration.max_iter non-zero");
    validate_pulse(input, "input", input_grid());
    validate_pulse(target, "target", target_grid());
    // Constructing the pulses checks that they fit their windows.
    (void)build_pulse(input, input_grid());
    (void)build_pulse(target, target_grid());
}

TimeGrid ScenarioSpec::input_grid() const { return TimeGrid::with_max_step(-write_window, 0.0, envelope_dt); }
TimeGrid ScenarioSpec::target_grid() const { return TimeGrid::with_max_step(0.0, read_window, envelope_dt); }

ScenarioSpec parse_scenario(const json& j) {
    if (!j.is_object())
        throw InvalidParameter("scenario must be a JSON object");
    ScenarioSpec s;
    s.id = j.value("id", s.id);

    const json& m = object(j, "medium");
    if (!m.contains("alphaL"))
        throw InvalidParameter("medium.alphaL is required");
    const double gamma = number(m, "gamma", MediumParams::kDefaultGamma);
    double gamma_s = number(m, "gamma_s", 0.0);
    if (const auto life = optional_number(m, "spin_lifetime_us"))
        gamma_s = spin_lifetime_us_to_rate(*life);
    s.medium = MediumParams(number(m, "alphaL", 0.0), gamma, gamma_s, number(m, "delta", 0.0));

    s.input = parse_pulse(object(j, "input"), "input");
    s.target = parse_pulse(object(j, "target"), "target");

    s.storage_time = number(j, "storage_time", 0.0);
    if (const auto us = optional_number(j, "storage_time_us"))
        s.storage_time = microseconds_to_dimensionless(*us, gamma);
    s.write_window = number(j, "write_window", s.write_window);
    s.read_window = number(j, "read_window", s.read_window);
    s.omega_max = number(j, "omega_max", s.omega_max);

    if (j.contains("grid")) {
        const json& g = object(j, "grid");
        const double nz = number(g, "n_z", static_cast<double>(s.n_z));
        if (!(nz >= 2.0) || nz != std::floor(nz))
            throw InvalidParameter("grid.n_z must be an integer >= 2");
        s.n_z = static_cast<std::size_t>(nz);
        s.dt = optional_number(g, "dt");
        s.envelope_dt = number(g, "envelope_dt", s.envelope_dt);
    }
    if (j.contains("shaping")) {
        const json& sh = object(j, "shaping");
        s.shaping.tail_tolerance = number(sh, "tail_tolerance", s.shaping.tail_tolerance);
        s.shaping.du = number(sh, "du", s.shaping.du);
        s.shaping.u_max = optional_number(sh, "u_max");
        const double ri = number(sh, "refine_iterations", static_cast<double>(s.refine_iterations));
        if (!(ri >= 0.0) || ri != std::floor(ri) || ri > 20.0)
            throw InvalidParameter("shaping.refine_iterations must be an integer in [0, 20]");
        s.refine_iterations = static_cast<std::size_t>(ri);
    }
    if (j.contains("iteration")) {
        const json& it = object(j, "iteration");
        s.iteration_tol = number(it, "tol", s.iteration_tol);
        const double mi = number(it, "max_iter", static_cast<double>(s.iteration_max));
        if (!(mi >= 1.0))
            throw InvalidParameter("iteration.max_iter must be at least 1");
        s.iteration_max = static_cast<std::size_t>(mi);
    }
    if (j.contains("output")) {
        const json& o = object(j, "output");
        if (o.contains("dir"))
            s.out_dir = o.at("dir").get<std::string>();
    }
    s.validate();
    return s;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidParameter("cannot open scenario file " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw InvalidParameter("scenario file " + path.string() + ": " + e.what());
    }
    return parse_scenario(j);
}

json to_json(const ScenarioSpec& s) {
    json j;
    j["id"] = s.id;
    j["medium"] = {{"alphaL", s.medium.alpha_l()},
                   {"gamma", s.medium.gamma()},
                   {"gamma_s", s.medium.gamma_s()},
                   {"delta", s.medium.delta()}};
    j["input"] = pulse_json(s.input);
    j["target"] = pulse_json(s.target);
    j["storage_time"] = s.storage_time;
    j["write_window"] = s.write_window;
    j["read_window"] = s.read_window;
    j["omega_max"] = s.omega_max;
    j["grid"] = {{"n_z", s.n_z}, {"envelope_dt", s.envelope_dt}};
    if (s.dt)
        j["grid"]["dt"] = *s.dt;
    j["shaping"] = {{"tail_tolerance", s.shaping.tail_tolerance},
                    {"du", s.shaping.du},
                    {"refine_iterations", s.refine_iterations}};
    if (s.shaping.u_max)
        j["shaping"]["u_max"] = *s.shaping.u_max;
    j["iteration"] = {{"tol", s.iteration_tol}, {"max_iter", s.iteration_max}};
    j["output"] = {{"dir", s.out_dir.string()}};
    return j;
}

const std::vector<std::string>& parameter_names() {
    static const std::vector<std::string> names{
        "alphaL",       "gamma_s",     "spin_lifetime_us", "delta",       "storage_time",
        "storage_time_us", "write_window", "read_window",  "omega_max",   "n_z",
        "dt",           "envelope_dt", "theta",            "phi",         "refine_iterations"};
    return names;
}

void set_parameter(ScenarioSpec& s, const std::string& name, double value) {
    const MediumParams& m = s.medium;
    if (name == "alphaL")
        s.medium = MediumParams(value, m.gamma(), m.gamma_s(), m.delta());
    else if (name == "gamma_s")
        s.medium = MediumParams(m.alpha_l(), m.gamma(), value, m.delta());
    else if (name == "spin_lifetime_us")
        s.medium = MediumParams(m.alpha_l(), m.gamma(), spin_lifetime_us_to_rate(value), m.delta());
    else if (name == "delta")
        s.medium = MediumParams(m.alpha_l(), m.gamma(), m.gamma_s(), value);
    else if (name == "storage_time")
        s.storage_time = value;
    else if (name == "storage_time_us")
        s.storage_time = microseconds_to_dimensionless(value, m.gamma());
    else if (name == "write_window")
        s.write_window = value;
    else if (name == "read_window")
        s.read_window = value;
    else if (name == "omega_max")
        s.omega_max = value;
    else if (name == "n_z") {
        if (!(value >= 2.0) || value != std::floor(value))
            throw InvalidParameter("n_z must be an integer >= 2");
        s.n_z = static_cast<std::size_t>(value);
    } else if (name == "dt")
        s.dt = value;
    else if (name == "envelope_dt")
        s.envelope_dt = value;
    else if (name == "theta")
        s.target.theta = value;
    else if (name == "phi")
        s.target.phi = value;
    else if (name == "refine_iterations") {
        if (!(value >= 0.0) || value != std::floor(value) || value > 20.0)
            throw InvalidParameter("refine_iterations must be an integer in [0, 20]");
        s.refine_iterations = static_cast<std::size_t>(value);
    }    else
        throw InvalidParameter("unknown parameter '" + name + "'");
    s.validate();
}

} // namespace lmem
