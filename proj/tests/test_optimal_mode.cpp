#include "doctest.h"

#include "lambda_memory/errors.hpp"
#include "lambda_memory/optimal_mode.hpp"
#include "lambda_memory/pulses.hpp"

#include <cmath>

using namespace lmem;
using doctest::Approx;

namespace {

const OptimalModeResult& at_d12() {
    static const OptimalModeResult r = optimal_mode(MediumParams(24.0));
    return r;
}

} // namespace

TEST_CASE("reference control gives a group delay of half the write window") {
    const double w = reference_control_amplitude(12.0, 50.0);
    CHECK(12.0 / (w * w) == Approx(25.0));
    CHECK_THROWS_AS(reference_control_amplitude(12.0, 0.0), InvalidParameter);
}

TEST_CASE("optimal mode at d = 12") {
    const auto& r = at_d12();
    CHECK(r.eta_max == Approx(0.561).epsilon(0.005 / 0.561));
    CHECK(r.eta_max * std::exp(-0.2) == Approx(0.45).epsilon(0.02 / 0.45));
    CHECK(r.iterations <= 50);
    CHECK(r.convergence_history.size() == r.iterations);
    for (std::size_t i = 1; i < r.convergence_history.size(); ++i)
        CHECK(r.convergence_history[i] >= r.convergence_history[i - 1] - 1e-6);
    CHECK(r.mode.norm2() == Approx(1.0));

    // canonical phase: the largest sample is real and positive
    std::size_t peak = 0;
    for (std::size_t k = 0; k < r.mode.size(); ++k)
        if (std::abs(r.mode[k]) > std::abs(r.mode[peak]))
            peak = k;
    CHECK(std::abs(r.mode[peak].imag()) < 1e-12);
    CHECK(r.mode[peak].real() > 0.0);

    // smooth and nodeless; weight sits in the front part of the cell
    const double floor = 0.05 * std::abs(r.mode[peak]);
    for (std::size_t k = 0; k + 1 < r.mode.size(); ++k)
        CHECK(std::abs(r.mode[k]) > floor);
    CHECK(r.mode.grid().at(peak) < 0.5);
}

TEST_CASE("optimal mode is independent of the seed") {
    const TimeGrid g = TimeGrid::with_max_step(-50.0, 0.0, 0.02);
    const OptimalModeResult ramp = optimal_mode(MediumParams(24.0), make_ramp(RampSign::positive, 40.0, g));
    const OptimalModeResult late = optimal_mode(MediumParams(24.0), make_gaussian(-10.0, 4.0, g));
    CHECK(mode_overlap(ramp.mode, at_d12().mode) >= 0.999);
    CHECK(mode_overlap(late.mode, at_d12().mode) >= 0.999);
    CHECK(ramp.eta_max == Approx(at_d12().eta_max).epsilon(1e-3));
}

TEST_CASE("kernel oracle agrees with the iteration") {
    const OptimalModeResult o = kernel_oracle(MediumParams(24.0), 100);
    CHECK(o.eta_max <= 1.0);
    CHECK(std::abs(o.eta_max - at_d12().eta_max) <= 0.01);
    CHECK(mode_overlap(o.mode, at_d12().mode) >= 0.995);
}

TEST_CASE("kernel oracle: serial and parallel basis propagation agree") {
    OracleOptions s, p;
    s.exec = kernels::Exec::serial;
    p.exec = kernels::Exec::parallel;
    const OptimalModeResult a = kernel_oracle(MediumParams(12.0), 40, s);
    const OptimalModeResult b = kernel_oracle(MediumParams(12.0), 40, p);
    CHECK(a.eta_max == b.eta_max);
    for (std::size_t k = 0; k < a.mode.size(); ++k)
        CHECK(a.mode[k] == b.mode[k]);
}

TEST_CASE("no coupling, no memory") {
    const OptimalModeResult o = kernel_oracle(MediumParams(0.0), 20);
    CHECK(o.eta_max == 0.0);
    CHECK_THROWS_AS(optimal_mode(MediumParams(0.0)), InvalidParameter);
}

TEST_CASE("efficiency grows with optical depth") {
    double previous = 0.0;
    for (double alpha_l : {6.0, 12.0, 24.0, 48.0}) {
        const double eta = kernel_oracle(MediumParams(alpha_l), 80).eta_max;
        CHECK(eta > previous);
        CHECK(eta < 1.0);
        previous = eta;
    }
}

TEST_CASE("spin decay is excluded from eta_max") {
    const MediumParams decaying(24.0, MediumParams::kDefaultGamma, 1e6);
    CHECK(optimal_mode(decaying).eta_max == Approx(at_d12().eta_max).epsilon(1e-9));
}

TEST_CASE("non-convergence reports the history") {
    IterationOptions o;
    o.max_iter = 1;
    o.tol = 1e-12;
    try {
        optimal_mode(MediumParams(24.0), std::nullopt, o);
        FAIL("expected ConvergenceFailure");
    } catch (const ConvergenceFailure& e) {
        CHECK(e.history().size() == 1);
    }
}

TEST_CASE("canonical mode") {
    const SpaceGrid g(11);
    std::vector<cplx> s(g.size(), cplx(0.0, -2.0));
    s[3] = cplx(0.0, -5.0);
    const SpinWave c = canonical_mode(SpinWave(g, s));
    CHECK(c.norm2() == Approx(1.0));
    CHECK(c[3].real() > 0.0);
    CHECK(std::abs(c[3].imag()) < 1e-15);
}
