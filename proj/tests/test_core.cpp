#include "doctest.h"

#include "lambda_memory/core.hpp"
#include "lambda_memory/errors.hpp"
#include "lambda_memory/pulses.hpp"
#include "lambda_memory/metrics.hpp"

#include <cmath>
#include <numbers>

using namespace lmem;
using doctest::Approx;

TEST_CASE("medium parameters") {
    const MediumParams m(24.0);
    CHECK(m.d() == 12.0);
    CHECK(m.gamma_s_tilde() == 0.0);
    CHECK_THROWS_AS(MediumParams(-1.0), InvalidParameter);
    CHECK_THROWS_AS(MediumParams(24.0, 0.0), InvalidParameter);
    CHECK_THROWS_AS(MediumParams(24.0, 1e9, -1.0), InvalidParameter);
    CHECK_THROWS_AS(MediumParams(std::nan("")), InvalidParameter);
    CHECK(m.with_alpha_l(6.0).d() == 3.0);
}

TEST_CASE("physical unit conversion") {
    // 500 us spin lifetime, 100 us storage: gamma_s tau = 0.1
    const MediumParams m(24.0, MediumParams::kDefaultGamma, spin_lifetime_us_to_rate(500.0));
    const double tau = microseconds_to_dimensionless(100.0, m.gamma());
    CHECK(m.gamma_s_tilde() * tau == Approx(0.1).epsilon(1e-12));
    CHECK(std::exp(-2.0 * m.gamma_s_tilde() * tau) == Approx(0.8187307531).epsilon(1e-9));
}

TEST_CASE("time grid") {
    const TimeGrid g(-50.0, 0.0, 2500);
    CHECK(g.size() == 2501);
    CHECK(g.dt() == Approx(0.02));
    CHECK(g.at(0) == -50.0);
    CHECK(g.at(2500) == 0.0);
    CHECK(g.contains(-25.0));
    CHECK_FALSE(g.contains(1.0));
    const auto h = TimeGrid::with_max_step(0.0, 1.0, 0.3);
    CHECK(h.n_steps() == 4);
    CHECK_THROWS_AS(TimeGrid(1.0, 0.0, 10), InvalidParameter);
    CHECK_THROWS_AS(TimeGrid(0.0, 1.0, 0), InvalidParameter);
}

TEST_CASE("space grid trapezoid weights sum to one") {
    for (std::size_t n : {2u, 3u, 101u, 200u}) {
        const SpaceGrid g(n);
        double sum = 0.0;
        for (double w : g.weights())
            sum += w;
        CHECK(sum == Approx(1.0).epsilon(1e-14));
        CHECK(g.uniform());
    }
    CHECK_THROWS_AS(SpaceGrid(std::vector<double>{0.0, 0.6, 0.5, 1.0}), InvalidParameter);
}

TEST_CASE("envelope quadrature, interpolation and transforms") {
    const TimeGrid g(0.0, 2.0, 200);
    std::vector<cplx> s(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        s[i] = cplx(g.at(i), 0.0);
    const Envelope e(g, s);
    // ∫ t^2 dt over [0, 2] = 8/3; trapezoid error h^2/12 * [f']_0^2 = 1e-4 * 4 / 12
    CHECK(e.energy() == Approx(8.0 / 3.0 + 4e-4 / 12.0).epsilon(1e-12));
    CHECK(e.at(0.505).real() == Approx(0.505));
    CHECK(e.at(-0.1) == cplx(0.0, 0.0));
    CHECK(e.at(2.1) == cplx(0.0, 0.0));
    CHECK(e.normalized().energy() == Approx(1.0));
    CHECK(e.scaled(cplx(0.0, 2.0)).energy() == Approx(4.0 * e.energy()));
    const Envelope sh = e.shifted(10.0);
    CHECK(sh.grid().t_start() == 10.0);
    CHECK(sh.at(10.5).real() == Approx(0.5));
    CHECK_THROWS_AS(Envelope(g, std::vector<cplx>(3)), InvalidParameter);
    CHECK_THROWS_AS(Envelope::zeros(g).normalized(), InvalidParameter);
}

TEST_CASE("control envelopes respect the cap") {
    const TimeGrid g(0.0, 1.0, 10);
    CHECK_NOTHROW(Envelope::control(g, std::vector<cplx>(11, 2.0), 2.0));
    CHECK_THROWS_AS(Envelope::control(g, std::vector<cplx>(11, 2.1), 2.0), InvalidParameter);
    CHECK(Envelope::control(g, std::vector<cplx>(11, 1.0), 2.0).cap().value() == 2.0);
}

TEST_CASE("resample is exact for linear data") {
    const TimeGrid a(0.0, 1.0, 10), b(0.0, 1.0, 37);
    std::vector<cplx> s(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        s[i] = cplx(3.0 * a.at(i), -a.at(i));
    const Envelope r = resample(Envelope(a, s), b);
    for (std::size_t i = 0; i < b.size(); ++i)
        CHECK(std::abs(r[i] - cplx(3.0 * b.at(i), -b.at(i))) < 1e-12);
}

TEST_CASE("spin waves") {
    const SpaceGrid g(101);
    std::vector<cplx> s(g.size());
    for (std::size_t k = 0; k < g.size(); ++k)
        s[k] = cplx(g.at(k), 1.0 - g.at(k));
    const SpinWave w(g, s);
    const SpinWave f = w.flipped();
    CHECK(f.at(0.2) == w.at(0.8));
    CHECK(std::abs(f.flipped().at(0.37) - w.at(0.37)) < 1e-14);
    CHECK(w.normalized().norm2() == Approx(1.0));
    CHECK(mode_overlap(w, w.scaled(cplx(0.0, -3.0))) == Approx(1.0));
    CHECK(mode_overlap(w, resample(w, SpaceGrid(57))) == Approx(1.0).epsilon(1e-8));

    std::vector<cplx> a(g.size()), b(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        a[k] = std::sin(std::numbers::pi * g.at(k));
        b[k] = std::sin(2.0 * std::numbers::pi * g.at(k));
    }
    CHECK(mode_overlap(SpinWave(g, a), SpinWave(g, b)) < 1e-20);
}

TEST_CASE("gaussian pulses") {
    const TimeGrid g = TimeGrid::with_max_step(-100.0, 50.0, 0.02);
    const Envelope p = make_gaussian(-25.0, 6.0, g);
    CHECK(p.energy() == Approx(1.0).epsilon(1e-12));
    // intensity rms width is sigma
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        m1 += g.at(i) * std::norm(p[i]) * g.dt();
        m2 += g.at(i) * g.at(i) * std::norm(p[i]) * g.dt();
    }
    CHECK(std::sqrt(m2 - m1 * m1) == Approx(6.0).epsilon(1e-6));
    // Two sigma = 6 Gaussians 15 apart: J2 = exp(-15^2 / (4 * 6^2)) = 0.2096
    const Envelope q = make_gaussian(-32.5, 6.0, g);
    const Envelope r = make_gaussian(-17.5, 6.0, g);
    CHECK(overlap(q, r) == Approx(std::exp(-225.0 / 144.0)).epsilon(1e-6));
    CHECK(overlap(q, r) == Approx(0.210).epsilon(0.01));
    CHECK_THROWS_AS(make_gaussian(-25.0, 0.0, g), InvalidParameter);
    CHECK_THROWS_AS(make_gaussian(55.0, 6.0, g), InvalidParameter);
}

TEST_CASE("ramps") {
    const TimeGrid g = TimeGrid::with_max_step(0.0, 50.0, 0.005);
    const Envelope up = make_ideal_ramp(RampSign::positive, 5.0, 40.0, g);
    const Envelope down = make_ideal_ramp(RampSign::negative, 5.0, 40.0, g);
    CHECK(up.energy() == Approx(1.0));
    // ∫ t (1 - t) / (∫t^2) = (1/6) / (1/3): J2 = 1/4
    CHECK(overlap(up, down) == Approx(0.25).epsilon(1e-4));
    CHECK(std::abs(up.at(44.9)) > std::abs(up.at(10.0)));

    const Envelope smooth = make_ramp(RampSign::positive, 40.0, g);
    CHECK(smooth.energy() == Approx(1.0));
    CHECK(std::abs(smooth[0]) == 0.0);
    CHECK(std::abs(smooth[g.size() - 1]) == 0.0);
    CHECK(overlap(smooth, up) > 0.98);
    const Envelope mirror = make_ramp(RampSign::negative, 40.0, g);
    CHECK(std::abs(mirror.at(20.0) - smooth.at(30.0)) < 1e-9);
    CHECK_THROWS_AS(make_ramp(RampSign::positive, 60.0, g), InvalidParameter);
}

TEST_CASE("time-bin pulses") {
    const TimeGrid g = TimeGrid::with_max_step(0.0, 50.0, 0.02);
    const auto layout = time_bin_layout(24.0, g);
    CHECK(layout.first_center == Approx(13.0));
    CHECK(layout.second_center == Approx(37.0));

    const double pi = std::numbers::pi;
    const Envelope tb = make_time_bin(pi / 3.0, 0.0, 3.0, 24.0, g);
    CHECK(tb.energy() == Approx(1.0));
    const auto w = split_windows(g);
    // default geometry: bin cross term e^{-8} biases the ratio by ~5e-4
    const auto b = bin_analysis(tb, w.first, w.second);
    CHECK(b.ratio == Approx(3.0).epsilon(1e-3));
    CHECK(b.j2_bins == Approx(1.0).epsilon(1e-3));

    // widely separated bins: pure quadrature
    const TimeGrid wide = TimeGrid::with_max_step(0.0, 100.0, 0.02);
    const auto ww = split_windows(wide);
    const auto bw = bin_analysis(make_time_bin(pi / 3.0, 0.0, 3.0, 48.0, wide), ww.first, ww.second);
    CHECK(bw.ratio == Approx(3.0).epsilon(1e-6));
    CHECK(bw.j2_bins == Approx(1.0).epsilon(1e-9));

    const auto sym = bin_analysis(make_time_bin(pi / 4.0, 0.0, 3.0, 24.0, g), w.first, w.second); // 8 sigma apart
    CHECK(sym.energy_first == Approx(sym.energy_second).epsilon(1e-9));

    // the relative phase sits on the second bin
    const Envelope ph = make_time_bin(pi / 4.0, pi / 2.0, 3.0, 24.0, g);
    CHECK(std::arg(ph.at(layout.second_center)) == Approx(pi / 2.0));
    CHECK(std::abs(std::arg(ph.at(layout.first_center))) < 1e-6);

    CHECK_THROWS_AS(make_time_bin(pi / 4.0, 0.0, 3.0, 10.0, g), InvalidParameter); // separation < 4 sigma
    CHECK_THROWS_AS(make_time_bin(pi / 4.0, 0.0, 3.0, 40.0, g), InvalidParameter); // bins leave the grid
}
