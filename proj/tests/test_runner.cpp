#include "doctest.h"

#include "lambda_memory/csv_io.hpp"
#include "lambda_memory/errors.hpp"
#include "lambda_memory/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lmem;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("lmem_runner_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::shared_ptr<ModeCache> shared_cache() {
    static auto cache = std::make_shared<ModeCache>();
    return cache;
}

RunOptions quiet() {
    RunOptions o;
    o.write_files = false;
    o.cache = shared_cache();
    return o;
}

} // namespace

TEST_CASE("end-to-end run writes every file it reports") {
    const fs::path dir = scratch("files");
    RunOptions o;
    o.out_dir = dir;
    o.cache = shared_cache();
    const RunSummary r = run_scenario(fig1_spec(), o);
    CHECK(r.files.size() == 8);
    for (const auto& f : r.files)
        CHECK(fs::exists(f));
    CHECK(r.warnings.empty());
    CHECK_FALSE(r.cap_saturated);
    CHECK(r.metrics.eta == Approx(0.45).epsilon(0.02 / 0.45));
    CHECK(r.metrics.j2 >= 0.98);
    CHECK(r.metrics.fidelity == r.metrics.eta * r.metrics.j2);
    CHECK(std::abs(r.residual_write) < 0.01);
    CHECK(std::abs(r.residual_read) < 0.01);
    CHECK(r.output.grid().t_start() == Approx(fig1_spec().storage_time));

    const CsvTable w = read_csv(dir / "fig1_writing.csv");
    CHECK(w.header == std::vector<std::string>{"t", "re_e_in", "im_e_in", "re_e_out", "im_e_out", "omega"});
    CHECK(w.rows.front()[0] == Approx(-50.0));
    const CsvTable rd = read_csv(dir / "fig1_retrieval.csv");
    CHECK(rd.rows.front()[0] == Approx(fig1_spec().storage_time));
    const CsvTable s = read_csv(dir / "fig1_spin_stored.csv");
    CHECK(s.header == std::vector<std::string>{"z", "re_s", "im_s"});
    CHECK(s.rows.size() == 200);

    const auto metrics = nlohmann::json::parse(slurp(dir / "fig1_metrics.json"));
    CHECK(metrics["metrics"]["eta"].get<double>() == r.metrics.eta);
    fs::remove_all(dir);
}

TEST_CASE("repeated runs are byte-identical") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    RunOptions oa, ob;
    oa.out_dir = a;
    ob.out_dir = b; // no shared cache: the optimal mode is recomputed too
    ScenarioSpec spec = fig2_specs()[1];
    const RunSummary ra = run_scenario(spec, oa);
    const RunSummary rb = run_scenario(spec, ob);
    for (const auto& f : ra.files) {
        if (f.extension() != ".csv")
            continue;
        CHECK(slurp(f) == slurp(b / f.filename()));
    }
    write_summary_csv(a / "s.csv", {ra});
    write_summary_csv(b / "s.csv", {rb});
    CHECK(slurp(a / "s.csv") == slurp(b / "s.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("invalid scenarios fail before writing anything") {
    const fs::path dir = scratch("invalid");
    ScenarioSpec s = fig1_spec();
    s.read_window = -1.0;
    RunOptions o;
    o.out_dir = dir;
    CHECK_THROWS_AS(run_scenario(s, o), InvalidParameter);
    CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("summary table") {
    const fs::path dir = scratch("summary");
    const RunSummary r = run_scenario(fig1_spec(), quiet());
    write_summary_csv(dir / "summary.csv", {r, r});
    std::ifstream in(dir / "summary.csv");
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == kSummaryHeader);
    CHECK(row.rfind("fig1,", 0) == 0);
    CHECK(read_csv(dir / "summary.csv").rows.size() == 2);
    fs::remove_all(dir);
}

TEST_CASE("sweeps") {
    const ScenarioSpec base = fig1_spec();
    CHECK(run_sweep(base, "alphaL", {}, quiet()).empty());
    CHECK_THROWS_AS(run_sweep(base, "colour", {1.0}, quiet()), InvalidParameter);

    SUBCASE("efficiency rises with optical depth") {
        const auto runs = run_sweep(base, "alphaL", {6.0, 12.0, 24.0, 48.0}, quiet(), 2);
        REQUIRE(runs.size() == 4);
        for (std::size_t i = 1; i < runs.size(); ++i)
            CHECK(runs[i].eta_max > runs[i - 1].eta_max);
        CHECK(runs[0].id == "fig1_alphaL_6");
    }
    SUBCASE("storage time follows the decay law") {
        const auto runs = run_sweep(base, "storage_time_us", {0.0, 100.0, 200.0}, quiet(), 3);
        REQUIRE(runs.size() == 3);
        CHECK(runs[1].metrics.eta / runs[0].metrics.eta == Approx(std::exp(-0.2)).epsilon(1e-9));
        CHECK(runs[2].metrics.eta / runs[0].metrics.eta == Approx(std::exp(-0.4)).epsilon(1e-9));
    }
    SUBCASE("sweep writes its table") {
        const fs::path dir = scratch("sweep");
        RunOptions o;
        o.out_dir = dir;
        o.cache = shared_cache();
        run_sweep(base, "theta", {0.5}, o);
        CHECK(fs::exists(dir / "fig1_sweep_theta.csv"));
        fs::remove_all(dir);
    }
}

TEST_CASE("partial retrieval") {
    const ScenarioSpec spec = fig1_spec();
    SUBCASE("half") {
        const PartialRetrieval p = partial_retrieve_scenario(spec, 0.5, quiet());
        const double e1 = p.first.output.energy(), e2 = p.second.output.energy();
        CHECK((e1 + e2) == Approx(p.full_energy).epsilon(0.01));
        CHECK(e1 / e2 == Approx(1.0).epsilon(0.02));
        CHECK(p.warnings.empty());
        CHECK(p.second.output.grid().t_start() == Approx(spec.storage_time + spec.read_window));
        CHECK(p.first.metrics.j2 >= 0.98);
        CHECK(p.second.metrics.j2 >= 0.98);
    }
    SUBCASE("quarter") {
        const PartialRetrieval p = partial_retrieve_scenario(spec, 0.25, quiet());
        CHECK(p.first.output.energy() / p.second.output.energy() == Approx(1.0 / 3.0).epsilon(0.05));
    }
    SUBCASE("almost everything") {
        const PartialRetrieval p = partial_retrieve_scenario(spec, 0.999, quiet());
        CHECK(p.second.output.energy() <= 1e-3);
    }
    CHECK_THROWS_AS(partial_retrieve_scenario(spec, 1.0, quiet()), InvalidParameter);
    CHECK_THROWS_AS(partial_retrieve_scenario(spec, 0.0, quiet()), InvalidParameter);
}

TEST_CASE("figure definitions") {
    CHECK(fig2_specs().size() == 4);
    CHECK(fig3_default_thetas().size() == 5);
    CHECK(fig3_specs(fig3_default_thetas()).size() == 10);
    CHECK(fig1_spec().storage_decay_exponent() == Approx(0.1));
    CHECK_THROWS_AS(reproduce("fig4", quiet()), InvalidParameter);
    const Reproduction r = reproduce("fig1", quiet());
    CHECK(r.passed());
}

TEST_CASE("mode cache") {
    ModeCache cache;
    const ScenarioSpec s = fig1_spec();
    const OptimalModeResult a = cache.get(s, kernels::Exec::serial);
    const OptimalModeResult b = cache.get(s, kernels::Exec::serial);
    CHECK(a.eta_max == b.eta_max);
    ScenarioSpec other = s;
    set_parameter(other, "alphaL", 12.0);
    CHECK(cache.get(other, kernels::Exec::serial).eta_max < a.eta_max);
}
