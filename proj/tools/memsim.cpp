// memsim: command-line front end for the Lambda-medium memory simulator.
//
//   memsim simulate scenario.json [--out-dir DIR] [--tau-us T] [--gamma-s-us T] [--set name=value]...
//   memsim reproduce fig1|fig2|fig3 [--theta a,b,...] [--jobs N]
//   memsim optimal-mode --alphaL 24 [--sweep 6,12,24,48] [--oracle]
//   memsim shape-control [scenario.json] [--input ramp_pos] [--target gaussian]
//   memsim sweep scenario.json --param alphaL --values 6,12,24 [--jobs N]
//   memsim partial-retrieve scenario.json --fraction 0.5
//
// Exit codes: 0 ok, 1 invalid input, 2 numerical failure, 3 reproduce threshold miss.

#include "lambda_memory/csv_io.hpp"
#include "lambda_memory/errors.hpp"
#include "lambda_memory/optimal_mode.hpp"
#include "lambda_memory/runner.hpp"
#include "lambda_memory/scenario.hpp"
#include "lambda_memory/shaping.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace lmem;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kNumerical = 2, kThreshold = 3 };

struct Overrides {
    std::optional<double> alpha_l;
    std::optional<double> tau_us;
    std::optional<double> gamma_s_us;
    std::vector<std::string> sets;
    std::string out_dir;

    void attach(CLI::App* app, bool with_alpha = true) {
        if (with_alpha)
            app->add_option("--alphaL", alpha_l, "optical depth alpha*L");
        app->add_option("--tau-us", tau_us, "storage time in microseconds");
        app->add_option("--gamma-s-us", gamma_s_us, "spin coherence lifetime in microseconds (gamma_s = 1/(2T))");
        app->add_option("--set", sets, "override a scenario field, name=value (repeatable)");
        app->add_option("--out-dir", out_dir, "output directory");
    }

    void apply(ScenarioSpec& s) const {
        if (alpha_l)
            set_parameter(s, "alphaL", *alpha_l);
        if (gamma_s_us)
            set_parameter(s, "spin_lifetime_us", *gamma_s_us);
        // After the medium, so the conversion uses its gamma.
        if (tau_us)
            set_parameter(s, "storage_time_us", *tau_us);
        for (const auto& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw InvalidParameter("--set expects name=value, got '" + kv + "'");
            double v = 0.0;
            try {
                std::size_t used = 0;
                v = std::stod(kv.substr(eq + 1), &used);
                if (used != kv.size() - eq - 1)
                    throw std::invalid_argument(kv);
            } catch (const std::logic_error&) {
                throw InvalidParameter("--set value is not a number: '" + kv + "'");
            }
            set_parameter(s, kv.substr(0, eq), v);
        }
    }
};

ScenarioSpec load_with(const std::string& path, const Overrides& ov) {
    ScenarioSpec s = path.empty() ? ScenarioSpec{} : load_scenario(path);
    ov.apply(s);
    if (!ov.out_dir.empty())
        s.out_dir = ov.out_dir;
    s.validate();
    return s;
}

void print_run(const RunSummary& r) {
    const auto& m = r.metrics;
    std::printf("%s: eta = %.4f  J2 = %.4f  F = %.4f  HOM = %.4f", r.id.c_str(), m.eta, m.j2, m.fidelity,
                m.hom_coincidence);
    if (m.bins)
        std::printf("  bin ratio = %.4f  J2(g1,g2) = %.4f", m.bins->ratio, m.bins->j2_bins);
    std::printf("  (eta_max %.4f, %.2f s)\n", r.eta_max, r.wall_time_s);
    for (const auto& w : r.warnings)
        std::printf("  warning: %s\n", w.c_str());
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        if (item.empty())
            continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::logic_error&) {
            throw InvalidParameter("not a number in list: '" + item + "'");
        }
    }
    return out;
}

int cmd_simulate(const std::string& path, const Overrides& ov) {
    const ScenarioSpec s = load_with(path, ov);
    const RunSummary r = run_scenario(s);
    write_summary_csv(fs::path(s.out_dir) / (s.id + "_summary.csv"), {r});
    print_run(r);
    return kOk;
}

int cmd_reproduce(const std::string& figure, const std::string& thetas, const std::string& out_dir, int jobs) {
    RunOptions opts;
    opts.out_dir = out_dir.empty() ? "out" : out_dir;
    const Reproduction rep = reproduce(figure, opts, jobs, parse_list(thetas));
    for (const auto& r : rep.runs)
        print_run(r);
    for (const auto& c : rep.checks)
        std::printf("[%s] %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    return rep.passed() ? kOk : kThreshold;
}

int cmd_optimal_mode(double alpha_l, const std::string& sweep, bool oracle, const std::string& out_dir) {
    const fs::path dir = out_dir.empty() ? "out" : out_dir;
    const MediumParams medium(alpha_l);
    const OptimalModeResult r = optimal_mode(medium);
    std::printf("alphaL = %g  d = %g  eta_max = %.6f  iterations = %zu\n", alpha_l, medium.d(), r.eta_max,
                r.iterations);
    std::ostringstream stem;
    stem << "optimal_mode_alphaL" << alpha_l;
    write_spin_csv(dir / (stem.str() + ".csv"), r.mode);
    if (oracle) {
        const OptimalModeResult o = kernel_oracle(medium, 100);
        std::printf("oracle: eta_max = %.6f  mode overlap = %.6f\n", o.eta_max, mode_overlap(o.mode, r.mode));
    }
    const std::vector<double> values = parse_list(sweep);
    if (!values.empty()) {
        const fs::path table = dir / "eta_vs_d.csv";
        fs::create_directories(dir);
        std::ofstream out(table, std::ios::binary | std::ios::trunc);
        out << "alphaL,d,eta_max,iterations\n";
        for (double a : values) {
            const OptimalModeResult ra = optimal_mode(MediumParams(a));
            out << format_number(a) << ',' << format_number(a / 2.0) << ',' << format_number(ra.eta_max) << ','
                << ra.iterations << '\n';
            std::printf("  alphaL = %-6g eta_max = %.6f\n", a, ra.eta_max);
        }
    }
    return kOk;
}

int cmd_shape_control(const std::string& path, const Overrides& ov, const std::string& input,
                      const std::string& target) {
    ScenarioSpec s = load_with(path, ov);
    if (!input.empty())
        s.input.shape = parse_shape(input);
    if (!target.empty())
        s.target.shape = parse_shape(target);
    s.validate();
    ModeCache cache;
    const OptimalModeResult opt = cache.get(s, kernels::Exec::serial);
    const Envelope in = build_pulse(s.input, s.input_grid());
    const Envelope tg = build_pulse(s.target, s.target_grid());
    const WritingShaping ws = shape_writing(s.medium, in, opt.mode, s.omega_max, s.shaping);
    const SpinWave held = dark_storage(opt.mode, s.storage_time, s.medium.gamma_s_tilde());
    const ShapingResult rs = shape_retrieval(s.medium, held, tg, s.omega_max, s.shaping);

    const fs::path dir = s.out_dir;
    write_control_csv(dir / (s.id + "_write_control.csv"), ws.control, in,
                      time_reverse(ws.reversed.clock.predicted_output, in.grid().t_end()));
    write_control_csv(dir / (s.id + "_read_control.csv"), rs.clock.omega, tg, rs.clock.predicted_output,
                      s.storage_time);
    std::printf("writing: U_max = %.3f  peak |Omega| = %.4f%s\n", ws.reversed.mode.u_max, ws.control.max_abs(),
                ws.reversed.clock.cap_saturated ? "  (capped)" : "");
    std::printf("retrieval: eta_r = %.4f  U_max = %.3f  peak |Omega| = %.4f%s\n", rs.mode.eta_r, rs.mode.u_max,
                rs.clock.omega.max_abs(), rs.clock.cap_saturated ? "  (capped)" : "");
    for (const auto* c : {&ws.reversed.clock, &rs.clock})
        for (const auto& w : c->warnings)
            std::printf("  warning: %s\n", w.c_str());
    return kOk;
}

int cmd_sweep(const std::string& path, const Overrides& ov, const std::string& param, const std::string& values,
              int jobs) {
    const ScenarioSpec s = load_with(path, ov);
    const auto runs = run_sweep(s, param, parse_list(values), {}, jobs);
    for (const auto& r : runs)
        print_run(r);
    return kOk;
}

int cmd_partial(const std::string& path, const Overrides& ov, double fraction) {
    const ScenarioSpec s = load_with(path, ov);
    const PartialRetrieval pr = partial_retrieve_scenario(s, fraction);
    const double e1 = pr.first.output.energy();
    const double e2 = pr.second.output.energy();
    std::printf("fraction requested %.4f achieved %.4f\n", pr.fraction_requested, pr.fraction_achieved);
    std::printf("E1 = %.6f  E2 = %.6f  E1+E2 = %.6f  full = %.6f  E1/E2 = %.4f\n", e1, e2, e1 + e2, pr.full_energy,
                e2 > 0.0 ? e1 / e2 : 0.0);
    for (const auto& w : pr.warnings)
        std::printf("  warning: %s\n", w.c_str());
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal storage and retrieval of pulses in a Lambda-type atomic memory"};
    app.require_subcommand(1);

    std::string spec_path, figure, thetas, sweep_list = "6,12,24,48", param, values, input, target;
    double alpha_l = 24.0, fraction = 0.5;
    bool oracle = false;
    int jobs = 1;
    Overrides ov_sim, ov_shape, ov_sweep, ov_partial;
    std::string repro_out, mode_out;

    auto* sim = app.add_subcommand("simulate", "run one scenario");
    sim->add_option("scenario", spec_path, "scenario JSON file")->required();
    ov_sim.attach(sim);

    auto* rep = app.add_subcommand("reproduce", "regenerate a figure's data and check its thresholds");
    rep->add_option("figure", figure, "fig1, fig2 or fig3")->required()->check(CLI::IsMember({"fig1", "fig2", "fig3"}));
    rep->add_option("--theta", thetas, "comma-separated amplitude angles for fig3 (radians)");
    rep->add_option("--out-dir", repro_out, "output directory");
    rep->add_option("--jobs", jobs, "parallel scenario runs")->check(CLI::PositiveNumber);

    auto* om = app.add_subcommand("optimal-mode", "optimal spin wave and efficiency for a given optical depth");
    om->add_option("--alphaL", alpha_l, "optical depth alpha*L")->required();
    om->add_option("--sweep", sweep_list, "alphaL values for the eta_max table (empty to skip)");
    om->add_flag("--oracle", oracle, "cross-check with the kernel SVD");
    om->add_option("--out-dir", mode_out, "output directory");

    auto* sc = app.add_subcommand("shape-control", "design writing and retrieval controls");
    sc->add_option("scenario", spec_path, "scenario JSON file (defaults when omitted)");
    sc->add_option("--input", input, "input shape: gaussian, ramp_pos, ramp_neg, time_bin");
    sc->add_option("--target", target, "target shape: gaussian, ramp_pos, ramp_neg, time_bin");
    ov_shape.attach(sc);

    auto* sw = app.add_subcommand("sweep", "run a scenario for several values of one parameter");
    sw->add_option("scenario", spec_path, "scenario JSON file")->required();
    sw->add_option("--param", param, "parameter name")->required();
    sw->add_option("--values", values, "comma-separated values")->required();
    sw->add_option("--jobs", jobs, "parallel scenario runs")->check(CLI::PositiveNumber);
    ov_sweep.attach(sw);

    auto* pr = app.add_subcommand("partial-retrieve", "retrieve a fraction of the stored excitation, then the rest");
    pr->add_option("scenario", spec_path, "scenario JSON file")->required();
    pr->add_option("--fraction", fraction, "fraction released by the first stage")->required();
    ov_partial.attach(pr);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalid;
    }

    try {
        if (*sim)
            return cmd_simulate(spec_path, ov_sim);
        if (*rep)
            return cmd_reproduce(figure, thetas, repro_out, jobs);
        if (*om)
            return cmd_optimal_mode(alpha_l, sweep_list, oracle, mode_out);
        if (*sc)
            return cmd_shape_control(spec_path, ov_shape, input, target);
        if (*sw)
            return cmd_sweep(spec_path, ov_sweep, param, values, jobs);
        if (*pr)
            return cmd_partial(spec_path, ov_partial, fraction);
    } catch (const InvalidParameter& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kInvalid;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kInvalid;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kOk;
}
