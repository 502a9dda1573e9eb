#include "doctest.h"

#include "lambda_memory/errors.hpp"
#include "lambda_memory/kernels.hpp"

#include <cmath>
#include <vector>

using namespace lmem;
using namespace lmem::kernels;
using doctest::Approx;

namespace {

std::vector<cplx> wave(std::size_t n, double a, double b) {
    std::vector<cplx> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = cplx(std::sin(a * i + 0.3), std::cos(b * i));
    return v;
}

bool identical(const std::vector<cplx>& x, const std::vector<cplx>& y) {
    if (x.size() != y.size())
        return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] != y[i])
            return false;
    return true;
}

} // namespace

TEST_CASE("serial and parallel Maxwell-Bloch kernels agree bitwise") {
    for (std::size_t n : {1u, 7u, 200u, 5000u}) {
        const MbCoefficients c{std::sqrt(12.0), cplx(1.0, 0.3), 2e-3};
        const auto e = wave(n, 0.1, 0.2), p = wave(n, 0.3, 0.05), s = wave(n, 0.07, 0.11);
        std::vector<cplx> dp1(n), ds1(n), dp2(n), ds2(n);
        mb_derivatives(c, cplx(1.2, -0.4), e, p, s, dp1, ds1, Exec::serial);
        mb_derivatives(c, cplx(1.2, -0.4), e, p, s, dp2, ds2, Exec::parallel);
        CHECK(identical(dp1, dp2));
        CHECK(identical(ds1, ds2));

        std::vector<cplx> y1(n), y2(n);
        axpy(p, 0.01, e, y1, Exec::serial);
        axpy(p, 0.01, e, y2, Exec::parallel);
        CHECK(identical(y1, y2));

        auto z1 = s, z2 = s;
        rk4_combine(z1, 0.02, e, p, s, dp1, Exec::serial);
        rk4_combine(z2, 0.02, e, p, s, dp1, Exec::parallel);
        CHECK(identical(z1, z2));
    }
}

TEST_CASE("Maxwell-Bloch derivative formula") {
    const MbCoefficients c{2.0, cplx(1.0, 0.5), 0.1};
    const std::vector<cplx> e{cplx(1.0, 0.0)}, p{cplx(0.0, 1.0)}, s{cplx(2.0, 0.0)};
    std::vector<cplx> dp(1), ds(1);
    const cplx omega(3.0, 1.0);
    const cplx i(0.0, 1.0);
    mb_derivatives(c, omega, e, p, s, dp, ds, Exec::serial);
    CHECK(std::abs(dp[0] - (-(cplx(1.0, 0.5)) * p[0] + i * 2.0 * e[0] + i * omega * s[0])) < 1e-15);
    CHECK(std::abs(ds[0] - (-0.1 * s[0] + i * std::conj(omega) * p[0])) < 1e-15);
}

TEST_CASE("field integration is the trapezoid rule") {
    const SpaceGrid g(101);
    std::vector<cplx> p(g.size(), cplx(1.0, 0.0)), e(g.size());
    integrate_field(g.points(), 2.0, cplx(0.5, 0.0), p, e);
    // dE/dz = 2i  ->  E(1) = 0.5 + 2i
    CHECK(std::abs(e.back() - cplx(0.5, 2.0)) < 1e-13);
}

TEST_CASE("control-free field is exact for piecewise-linear spin waves") {
    const double d = 12.0;
    const double sd = std::sqrt(d);
    for (std::size_t n : {11u, 101u}) {
        const SpaceGrid g(n);
        const ControlFreeSystem sys(d, g);
        const double a = 0.7, b = -1.3;
        std::vector<cplx> s(n), e(n);
        for (std::size_t k = 0; k < n; ++k)
            s[k] = a + b * g.at(k);
        sys.field(0.0, s, e);
        // E' = -d E - sqrt(d)(a + b z), E(0) = 0
        const double B = -b / sd;
        const double A = (b / sd - sd * a) / d;
        for (std::size_t k = 0; k < n; ++k) {
            const double z = g.at(k);
            const double exact = A + B * z - A * std::exp(-d * z);
            CHECK(std::abs(e[k] - exact) < 1e-12);
        }
    }
}

TEST_CASE("control-free emission of a uniform spin wave matches the Bessel-kernel quadrature") {
    // eta = ∫∫ (d/2) e^{-d(z+z')/2} I0(d sqrt(z z')) dz dz' = 0.7721094795 at d = 12
    // (independent adaptive 2-D quadrature)
    const double d = 12.0;
    const SpaceGrid g(200);
    const ControlFreeSystem sys(d, g);
    std::vector<cplx> s0(g.size(), 1.0);
    const double du = 0.01;
    const std::size_t steps = 3000;
    const auto run = propagate_control_free(sys, s0, {}, du, steps);
    double emitted = 0.0;
    for (std::size_t i = 1; i < run.output.size(); ++i)
        emitted += 0.5 * du * (std::norm(run.output[i - 1]) + std::norm(run.output[i]));
    double left = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        left += g.weights()[k] * std::norm(run.final_spin[k]);
    CHECK(emitted == Approx(0.7721094795).epsilon(2e-4));
    CHECK(left < 1e-5);
}

TEST_CASE("control-free batch: serial and parallel agree bitwise") {
    const SpaceGrid g(51);
    const ControlFreeSystem sys(6.0, g);
    std::vector<std::vector<cplx>> s0(13, std::vector<cplx>(g.size()));
    for (std::size_t k = 0; k < s0.size(); ++k)
        s0[k][(3 * k) % g.size()] = cplx(1.0, 0.1 * k);
    const auto a = propagate_control_free_batch(sys, s0, {}, 0.05, 200, Exec::serial);
    const auto b = propagate_control_free_batch(sys, s0, {}, 0.05, 200, Exec::parallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(identical(a[k].output, b[k].output));
        CHECK(identical(a[k].final_spin, b[k].final_spin));
    }
    const auto single = propagate_control_free(sys, s0[4], {}, 0.05, 200);
    CHECK(identical(single.output, a[4].output));

    std::vector<std::vector<cplx>> bad{std::vector<cplx>(3)};
    CHECK_THROWS_AS(propagate_control_free_batch(sys, bad, {}, 0.05, 10, Exec::parallel), InvalidParameter);
}

TEST_CASE("control-free system is linear") {
    const SpaceGrid g(64);
    const ControlFreeSystem sys(12.0, g);
    const auto a = wave(g.size(), 0.2, 0.1), b = wave(g.size(), 0.05, 0.3);
    std::vector<cplx> mix(g.size());
    for (std::size_t k = 0; k < g.size(); ++k)
        mix[k] = 2.0 * a[k] - cplx(0.0, 1.0) * b[k];
    const auto ra = propagate_control_free(sys, a, {}, 0.05, 100);
    const auto rb = propagate_control_free(sys, b, {}, 0.05, 100);
    const auto rm = propagate_control_free(sys, mix, {}, 0.05, 100);
    for (std::size_t i = 0; i < rm.output.size(); ++i)
        CHECK(std::abs(rm.output[i] - (2.0 * ra.output[i] - cplx(0.0, 1.0) * rb.output[i])) < 1e-12);
}
