#include "lambda_memory/runner.hpp"

#include "lambda_memory/csv_io.hpp"
#include "lambda_memory/errors.hpp"
#include "lambda_memory/shaping.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <sstream>

namespace lmem {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

SolverOptions solver_options(const ScenarioSpec& spec, kernels::Exec exec) {
    SolverOptions so;
    so.n_z = spec.n_z;
    so.dt = spec.dt;
    so.exec = exec;
    return so;
}

/// Removes every registered file unless released; keeps failed runs from leaving partial output.
class FileGuard {
  public:
    ~FileGuard() {
        if (!released_)
            for (const auto& p : files_) {
                std::error_code ec;
                fs::remove(p, ec);
            }
    }
    const fs::path& add(fs::path p) { return files_.emplace_back(std::move(p)); }
    std::vector<fs::path> release() {
        released_ = true;
        return files_;
    }

  private:
    std::vector<fs::path> files_;
    bool released_ = false;
};

std::string value_label(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

fs::path output_dir(const ScenarioSpec& spec, const RunOptions& opts) {
    return opts.out_dir.empty() ? spec.out_dir : opts.out_dir;
}

json metrics_json(const MetricsReport& m) {
    json j{{"eta", m.eta}, {"J2", m.j2}, {"fidelity_F", m.fidelity}, {"hom_coincidence", m.hom_coincidence}};
    if (m.bins)
        j["bins"] = {{"energy_first", m.bins->energy_first},
                     {"energy_second", m.bins->energy_second},
                     {"ratio", m.bins->ratio},
                     {"J2_g1_g2", m.bins->j2_bins}};
    return j;
}

void write_json(const fs::path& path, const json& j) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

json shaping_json(const UniversalMode& mode, const ClockSolution& clock) {
    return {{"eta_r", mode.eta_r},
            {"U_max", mode.u_max},
            {"tail_energy", mode.tail},
            {"cap_saturated", clock.cap_saturated},
            {"omega_peak", clock.omega.max_abs()},
            {"warnings", clock.warnings}};
}

} // namespace

// ------------------------------------------------------------------ ModeCache

OptimalModeResult ModeCache::get(const ScenarioSpec& spec, kernels::Exec exec) {
    const Key key{spec.medium.alpha_l(), spec.medium.delta(),  spec.write_window,
                  spec.read_window,      spec.n_z,             spec.dt.value_or(-1.0),
                  spec.envelope_dt,      spec.iteration_tol,   spec.iteration_max};
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end())
            return it->second;
    }
    IterationOptions io;
    io.write_window = spec.write_window;
    io.read_window = spec.read_window;
    io.tol = spec.iteration_tol;
    io.max_iter = spec.iteration_max;
    io.envelope_dt = spec.envelope_dt;
    io.solver = solver_options(spec, exec);
    OptimalModeResult r = optimal_mode(spec.medium, std::nullopt, io);
    std::lock_guard lock(mutex_);
    return cache_.emplace(key, std::move(r)).first->second;
}

// ------------------------------------------------------------------ single scenario

namespace {

struct Prepared {
    OptimalModeResult opt;
    Envelope input;
    Envelope target_local;
    WritingShaping ws;
    StoreResult st;
    SpinWave held;
};

/// Everything up to the end of dark storage.
Prepared prepare(const ScenarioSpec& spec, const RunOptions& opts, const SolverOptions& so) {
    spec.validate();
    auto cache = opts.cache ? opts.cache : std::make_shared<ModeCache>();
    OptimalModeResult opt = cache->get(spec, opts.exec);
    Envelope input = build_pulse(spec.input, spec.input_grid());
    Envelope target_local = build_pulse(spec.target, spec.target_grid());
    WritingShaping ws = shape_writing(spec.medium, input, opt.mode, spec.omega_max, spec.shaping);
    StoreResult st = store(spec.medium, input, ws.control, so);
    SpinWave held = dark_storage(st.spin, spec.storage_time, spec.medium.gamma_s_tilde());
    if (!(held.norm2() > 0.0))
        throw NumericalError("nothing was stored");
    return {std::move(opt), std::move(input), std::move(target_local), std::move(ws), std::move(st), std::move(held)};
}

void fill_writing(RunSummary& run, const ScenarioSpec& spec, const Prepared& p) {
    run.id = spec.id;
    run.alpha_l = spec.medium.alpha_l();
    run.storage_time = spec.storage_time;
    run.eta_max = p.opt.eta_max;
    run.optimal = p.opt.mode;
    run.input = p.input;
    run.write_control = p.ws.control;
    run.stored = p.st.spin;
    run.leak_energy = p.st.leak_energy;
    run.storage_efficiency = p.st.spin.norm2() / p.input.energy();
    run.stored_mode_overlap = p.st.spin.norm2() > 0.0 ? mode_overlap(p.opt.mode, p.st.spin) : 0.0;
    run.residual_write = energy_balance(p.st.record);
    run.cap_saturated = p.ws.reversed.clock.cap_saturated;
    for (const auto& w : p.ws.reversed.clock.warnings)
        run.warnings.push_back("writing: " + w);
    if (spec.medium.delta() != 0.0)
        run.warnings.push_back("controls are shaped for resonance; delta is only simulated");
}

struct Refined {
    ClockSolution clock;
    StageRecord record;
    double j2 = 0.0;
};

/// Adiabatic clock, then `iterations` rounds of pointwise intensity correction
/// against full-solver runs; the best-matching control is kept.
Refined refined_retrieval(const MediumParams& medium, const SpinWave& s, const UniversalMode& mode,
                          const Envelope& target, double omega_max, std::optional<double> u_end,
                          std::size_t iterations, const SolverOptions& so) {
    const double target_energy = target.energy();
    double peak = 0.0;
    for (const auto& v : target.samples())
        peak = std::max(peak, std::norm(v));

    Envelope shaped = target;
    std::optional<Refined> best;
    for (std::size_t k = 0;; ++k) {
        ClockSolution clock = solve_clock(mode, shaped, omega_max, std::nullopt, u_end);
        StageRecord rec = retrieve_record(medium, s, clock.omega, so);
        const Envelope out = resample(rec.out_envelope, target.grid());
        const double out_energy = out.energy();
        const double j2 = out_energy > 0.0 ? overlap(target, out) : 0.0;
        const bool better = !best || j2 > best->j2;
        if (k == iterations || !(out_energy > 0.0)) {
            if (better)
                best = Refined{std::move(clock), std::move(rec), j2};
            break;
        }
        std::vector<cplx> next(shaped.samples().begin(), shaped.samples().end());
        for (std::size_t i = 0; i < next.size(); ++i) {
            const double want = std::norm(target[i]);
            const double got = std::norm(out[i]) / out_energy;
            if (want > 1e-4 * peak && got > 0.0)
                next[i] *= std::clamp(std::sqrt(want / target_energy / got), 0.5, 2.0);
        }
        shaped = Envelope(shaped.grid(), std::move(next));
        if (better)
            best = Refined{std::move(clock), std::move(rec), j2};
    }
    return std::move(*best);
}

std::optional<std::pair<TimeWindow, TimeWindow>> bin_windows(const ScenarioSpec& spec, const Envelope& target) {
    if (spec.target.shape != PulseShape::time_bin)
        return std::nullopt;
    return split_windows(target.grid());
}

} // namespace

RunSummary run_scenario(const ScenarioSpec& spec, const RunOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    const SolverOptions so = solver_options(spec, opts.exec);
    const MediumParams& medium = spec.medium;
    const Prepared p = prepare(spec, opts, so);
    const auto& opt = p.opt;
    const auto& ws = p.ws;
    const auto& st = p.st;
    const auto& held = p.held;
    const auto& target_local = p.target_local;

    RunSummary run;
    fill_writing(run, spec, p);

    // Retrieval.
    const UniversalMode read_mode = universal_retrieval_mode(medium, held, spec.shaping);
    const Refined refined = refined_retrieval(medium, held, read_mode, target_local, spec.omega_max, std::nullopt,
                                              spec.refine_iterations, so);
    const ShapingResult sr{read_mode, refined.clock};
    const StageRecord& rr = refined.record;
    run.read_control = sr.clock.omega;
    run.eta_r = sr.mode.eta_r;
    run.residual_read = energy_balance(rr);
    run.output = rr.out_envelope.shifted(spec.storage_time);
    run.target = target_local.shifted(spec.storage_time);

    run.metrics = make_report(run.input, run.output, run.target, bin_windows(spec, run.target));

    run.cap_saturated = run.cap_saturated || sr.clock.cap_saturated;
    for (const auto& w : sr.clock.warnings)
        run.warnings.push_back("retrieval: " + w);

    run.grids = {spec.n_z, st.record.grids.time.dt(), rr.grids.time.dt(), spec.envelope_dt};

    if (opts.write_files) {
        const fs::path dir = output_dir(spec, opts);
        FileGuard guard;
        write_stage_csv(guard.add(dir / (spec.id + "_writing.csv")), st.record);
        write_stage_csv(guard.add(dir / (spec.id + "_retrieval.csv")), rr, spec.storage_time);
        write_control_csv(guard.add(dir / (spec.id + "_write_control.csv")), ws.control, run.input,
                          time_reverse(ws.reversed.clock.predicted_output, run.input.grid().t_end()));
        write_control_csv(guard.add(dir / (spec.id + "_read_control.csv")), sr.clock.omega, target_local,
                          sr.clock.predicted_output, spec.storage_time);
        write_spin_csv(guard.add(dir / (spec.id + "_spin_stored.csv")), st.spin);
        write_spin_csv(guard.add(dir / (spec.id + "_spin_optimal.csv")), opt.mode);

        run.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_json(guard.add(dir / (spec.id + "_shaping.json")),
                   {{"writing", shaping_json(ws.reversed.mode, ws.reversed.clock)},
                    {"retrieval", shaping_json(sr.mode, sr.clock)}});
        write_metrics_json(guard.add(dir / (spec.id + "_metrics.json")), run);
        run.files = guard.release();
    }
    run.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return run;
}

void write_metrics_json(const fs::path& path, const RunSummary& run) {
    json j{{"id", run.id},
           {"metrics", metrics_json(run.metrics)},
           {"eta_max", run.eta_max},
           {"storage_efficiency", run.storage_efficiency},
           {"stored_mode_overlap", run.stored_mode_overlap},
           {"eta_r", run.eta_r},
           {"leak_energy", run.leak_energy},
           {"energy_residual", {{"writing", run.residual_write}, {"retrieval", run.residual_read}}},
           {"grids",
            {{"n_z", run.grids.n_z},
             {"dt_write", run.grids.dt_write},
             {"dt_read", run.grids.dt_read},
             {"envelope_dt", run.grids.envelope_dt}}},
           {"wall_time_s", run.wall_time_s},
           {"warnings", run.warnings}};
    write_json(path, j);
}

void write_summary_csv(const fs::path& path, const std::vector<RunSummary>& runs) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << kSummaryHeader << '\n';
    for (const auto& r : runs) {
        const auto& m = r.metrics;
        out << r.id << ',' << format_number(r.alpha_l) << ',' << format_number(r.storage_time) << ',' << format_number(m.eta) << ','
            << format_number(m.j2) << ',' << format_number(m.fidelity) << ',' << format_number(m.hom_coincidence)
            << ',' << format_number(m.bins ? m.bins->ratio : 0.0) << ','
            << format_number(m.bins ? m.bins->j2_bins : 0.0) << ',' << format_number(r.storage_efficiency) << ','
            << (r.cap_saturated ? 1 : 0) << '\n';
    }
}

// ------------------------------------------------------------------ sweeps

std::vector<RunSummary> run_sweep(const ScenarioSpec& base, const std::string& parameter,
                                  const std::vector<double>& values, const RunOptions& opts, int jobs) {
    const auto& names = parameter_names();
    if (std::find(names.begin(), names.end(), parameter) == names.end())
        throw InvalidParameter("unknown sweep parameter '" + parameter + "'");
    if (values.empty())
        return {};

    std::vector<ScenarioSpec> specs;
    for (double v : values) {
        ScenarioSpec s = base;
        set_parameter(s, parameter, v);
        s.id = base.id + "_" + parameter + "_" + value_label(v);
        s.validate();
        specs.push_back(std::move(s));
    }

    RunOptions run_opts = opts;
    if (!run_opts.cache)
        run_opts.cache = std::make_shared<ModeCache>();
    std::vector<RunSummary> out(specs.size());
    std::vector<std::exception_ptr> errors(specs.size());
    const int n = static_cast<int>(specs.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs))
    for (int i = 0; i < n; ++i) {
        try {
            out[i] = run_scenario(specs[i], run_opts);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    if (opts.write_files)
        write_summary_csv(output_dir(base, opts) / (base.id + "_sweep_" + parameter + ".csv"), out);
    return out;
}

// ------------------------------------------------------------------ partial retrieval

PartialRetrieval partial_retrieve_scenario(const ScenarioSpec& spec, double fraction, const RunOptions& opts) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw InvalidParameter("fraction must lie strictly between 0 and 1");
    const auto start = std::chrono::steady_clock::now();
    const SolverOptions so = solver_options(spec, opts.exec);
    const MediumParams& medium = spec.medium;
    const Prepared p = prepare(spec, opts, so);

    PartialRetrieval pr;
    pr.fraction_requested = fraction;
    const UniversalMode mode = universal_retrieval_mode(medium, p.held, spec.shaping);

    // Reference: uninterrupted retrieval.
    const Refined full =
        refined_retrieval(medium, p.held, mode, p.target_local, spec.omega_max, std::nullopt, spec.refine_iterations, so);
    pr.full_energy = full.record.output_energy;

    // First stage: play the clock only up to u*, where `fraction` of eta_r has been emitted.
    // With refinement on, u* is then corrected until the simulated stage delivers that fraction.
    double q_star = fraction * mode.eta_r;
    pr.u_star_adiabatic = mode.clock_for_energy(q_star);
    pr.u_star = pr.u_star_adiabatic;
    Refined first = refined_retrieval(medium, p.held, mode, p.target_local, spec.omega_max, pr.u_star,
                                      spec.refine_iterations, so);
    for (int k = 0; spec.refine_iterations > 0 && k < 4 && pr.full_energy > 0.0; ++k) {
        const double err = fraction - first.record.output_energy / pr.full_energy;
        if (std::abs(err) < 1e-4)
            break;
        q_star = std::clamp(q_star + err * mode.eta_r, 1e-6 * mode.eta_r, (1.0 - 1e-6) * mode.eta_r);
        pr.u_star = mode.clock_for_energy(q_star);
        first = refined_retrieval(medium, p.held, mode, p.target_local, spec.omega_max, pr.u_star,
                                  spec.refine_iterations, so);
    }
    const ClockSolution& c1 = first.clock;
    const StageRecord& r1 = first.record;

    // Second stage: empty whatever is left.
    const UniversalMode mode2 = universal_retrieval_mode(medium, r1.final_spin, spec.shaping);
    const Refined second = refined_retrieval(medium, r1.final_spin, mode2, p.target_local, spec.omega_max,
                                             std::nullopt, spec.refine_iterations, so);
    const StageRecord& r2 = second.record;
    const ShapingResult s2{mode2, second.clock};

    const double t1 = spec.storage_time;
    const double t2 = spec.storage_time + spec.read_window;
    const auto fill = [&](RunSummary& run, const std::string& suffix, const StageRecord& rec, const ClockSolution& c,
                          double eta_r, double offset) {
        fill_writing(run, spec, p);
        run.id = spec.id + suffix;
        run.read_control = c.omega;
        run.eta_r = eta_r;
        run.residual_read = energy_balance(rec);
        run.output = rec.out_envelope.shifted(offset);
        run.target = p.target_local.shifted(offset);
        run.metrics = make_report(run.input, run.output, run.target, bin_windows(spec, run.target));
        run.cap_saturated = run.cap_saturated || c.cap_saturated;
        for (const auto& w : c.warnings)
            run.warnings.push_back("retrieval: " + w);
        run.grids = {spec.n_z, p.st.record.grids.time.dt(), rec.grids.time.dt(), spec.envelope_dt};
    };
    fill(pr.first, "_part1", r1, c1, mode.cumulative_at(pr.u_star), t1);
    fill(pr.second, "_part2", r2, s2.clock, s2.mode.eta_r, t2);

    const double e1 = r1.output_energy;
    const double e2 = r2.output_energy;
    pr.fraction_achieved = e1 + e2 > 0.0 ? e1 / (e1 + e2) : 0.0;
    if (c1.cap_saturated || std::abs(pr.fraction_achieved - fraction) > 0.02) {
        std::ostringstream msg;
        msg << "requested fraction " << fraction << " but achieved " << pr.fraction_achieved;
        pr.warnings.push_back(msg.str());
    }

    if (opts.write_files) {
        const fs::path dir = output_dir(spec, opts);
        FileGuard guard;
        write_stage_csv(guard.add(dir / (spec.id + "_partial_writing.csv")), p.st.record);
        write_stage_csv(guard.add(dir / (spec.id + "_partial_retrieval1.csv")), r1, t1);
        write_stage_csv(guard.add(dir / (spec.id + "_partial_retrieval2.csv")), r2, t2);
        write_spin_csv(guard.add(dir / (spec.id + "_partial_residual_spin.csv")), r1.final_spin);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        pr.first.wall_time_s = pr.second.wall_time_s = wall;
        write_json(guard.add(dir / (spec.id + "_partial.json")),
                   {{"id", spec.id},
                    {"fraction_requested", fraction},
                    {"fraction_achieved", pr.fraction_achieved},
                    {"energy_first", e1},
                    {"energy_second", e2},
                    {"energy_full", pr.full_energy},
                    {"first", metrics_json(pr.first.metrics)},
                    {"second", metrics_json(pr.second.metrics)},
                    {"warnings", pr.warnings}});
        pr.first.files = guard.release();
    }
    return pr;
}

// ------------------------------------------------------------------ figures

namespace {

ScenarioSpec figure_base(const std::string& id) {
    ScenarioSpec s;
    s.id = id;
    s.medium = MediumParams(24.0, MediumParams::kDefaultGamma, spin_lifetime_us_to_rate(500.0));
    set_parameter(s, "storage_time_us", 100.0);
    s.out_dir = "out";
    return s;
}

PulseDescriptor pulse(PulseShape shape) {
    PulseDescriptor d;
    d.shape = shape;
    return d;
}

std::string fmt_value(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

CheckResult check(std::string name, bool ok, const std::string& detail) {
    return {std::move(name), ok, detail};
}

} // namespace

ScenarioSpec fig1_spec() {
    ScenarioSpec s = figure_base("fig1");
    s.input = pulse(PulseShape::ramp_pos);
    s.target = pulse(PulseShape::ramp_pos);
    return s;
}

std::vector<ScenarioSpec> fig2_specs() {
    std::vector<ScenarioSpec> out;
    for (auto in : {PulseShape::gaussian, PulseShape::ramp_neg})
        for (auto tg : {PulseShape::gaussian, PulseShape::ramp_neg}) {
            ScenarioSpec s = figure_base("fig2_" + to_string(in) + "_to_" + to_string(tg));
            s.input = pulse(in);
            s.target = pulse(tg);
            out.push_back(std::move(s));
        }
    return out;
}

std::vector<double> fig3_default_thetas() {
    const double pi = std::numbers::pi;
    return {pi / 8, pi / 6, pi / 4, pi / 3, 3 * pi / 8};
}

std::vector<ScenarioSpec> fig3_specs(const std::vector<double>& thetas) {
    std::vector<ScenarioSpec> out;
    for (auto in : {PulseShape::gaussian, PulseShape::ramp_pos})
        for (std::size_t k = 0; k < thetas.size(); ++k) {
            ScenarioSpec s = figure_base("fig3_" + to_string(in) + "_theta" + std::to_string(k));
            s.input = pulse(in);
            s.target = pulse(PulseShape::time_bin);
            s.target.theta = thetas[k];
            out.push_back(std::move(s));
        }
    return out;
}

bool Reproduction::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

Reproduction reproduce(const std::string& figure, const RunOptions& opts, int jobs, const std::vector<double>& thetas) {
    std::vector<ScenarioSpec> specs;
    if (figure == "fig1")
        specs = {fig1_spec()};
    else if (figure == "fig2")
        specs = fig2_specs();
    else if (figure == "fig3")
        specs = fig3_specs(thetas.empty() ? fig3_default_thetas() : thetas);
    else
        throw InvalidParameter("unknown figure '" + figure + "' (expected fig1, fig2 or fig3)");

    RunOptions run_opts = opts;
    if (!run_opts.cache)
        run_opts.cache = std::make_shared<ModeCache>();
    Reproduction rep;
    rep.runs.resize(specs.size());
    std::vector<std::exception_ptr> errors(specs.size());
    const int n = static_cast<int>(specs.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs))
    for (int i = 0; i < n; ++i) {
        try {
            rep.runs[i] = run_scenario(specs[i], run_opts);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    for (const auto& r : rep.runs) {
        const auto& m = r.metrics;
        rep.checks.push_back(check(r.id + " J2", m.j2 >= (figure == "fig3" ? 0.97 : 0.98), "J2 = " + fmt_value(m.j2)));
        if (!r.warnings.empty())
            rep.checks.push_back(check(r.id + " warnings", false, r.warnings.front()));
    }
    if (figure == "fig1") {
        const double eta = rep.runs[0].metrics.eta;
        rep.checks.push_back(check("fig1 eta", std::abs(eta - 0.45) <= 0.02, "eta = " + fmt_value(eta)));
    } else if (figure == "fig2") {
        const auto [lo, hi] = std::minmax_element(rep.runs.begin(), rep.runs.end(), [](const auto& a, const auto& b) {
            return a.metrics.eta < b.metrics.eta;
        });
        const double spread = hi->metrics.eta - lo->metrics.eta;
        rep.checks.push_back(check("fig2 eta spread", spread <= 0.01, "spread = " + fmt_value(spread)));
    } else {
        for (std::size_t i = 0; i < rep.runs.size(); ++i) {
            const auto& r = rep.runs[i];
            const double theta = specs[i].target.theta;
            const double want = std::pow(std::tan(theta), 2);
            const auto& b = r.metrics.bins;
            const double ratio = b ? b->ratio : 0.0;
            const double j2b = b ? b->j2_bins : 0.0;
            rep.checks.push_back(check(r.id + " bin ratio", std::abs(ratio - want) <= 0.05 * want,
                                       "ratio = " + fmt_value(ratio) + ", tan^2 theta = " + fmt_value(want)));
            rep.checks.push_back(check(r.id + " J2(g1,g2)", j2b >= 0.94, "J2(g1,g2) = " + fmt_value(j2b)));
        }
    }
    if (opts.write_files)
        write_summary_csv(output_dir(specs.front(), opts) / (figure + "_summary.csv"), rep.runs);
    return rep;
}

} // namespace lmem
