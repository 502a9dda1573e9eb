#include "lambda_memory/pulses.hpp"

#include "lambda_memory/errors.hpp"

#include <cmath>

namespace lmem {

namespace {

std::vector<cplx> gaussian_samples(double center, double sigma, const TimeGrid& grid) {
    std::vector<cplx> s(grid.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double x = grid.at(i) - center;
        s[i] = std::exp(-x * x / (4.0 * sigma * sigma));
    }
    return s;
}

} // namespace

Envelope make_gaussian(double center, double sigma, const TimeGrid& grid) {
    if (!(sigma > 0.0))
        throw InvalidParameter("gaussian sigma must be positive");
    if (!grid.contains(center))
        throw InvalidParameter("gaussian center lies outside the grid");
    return Envelope(grid, gaussian_samples(center, sigma, grid)).normalized();
}

Envelope make_ramp(RampSign sign, double duration, const TimeGrid& grid, std::optional<double> rise) {
    const double r = rise.value_or(duration / 20.0);
    if (!(duration > 0.0) || !(r >= 0.0))
        throw InvalidParameter("ramp duration must be positive and rise non-negative");
    const double support = duration + r;
    if (support > grid.span() * (1.0 + 1e-12))
        throw InvalidParameter("ramp does not fit inside the grid");
    const double t0 = grid.t_start() + 0.5 * (grid.span() - support);

    std::vector<cplx> s(grid.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        // Positive-ramp profile in local time; the negative ramp is its mirror image.
        double x = grid.at(i) - t0;
        if (sign == RampSign::negative)
            x = support - x;
        double a = 0.0;
        if (x >= 0.0 && x <= duration)
            a = x / duration;
        else if (x > duration && x < support)
            a = 1.0 - (x - duration) / r;
        s[i] = a;
    }
    return Envelope(grid, std::move(s)).normalized();
}

Envelope make_ideal_ramp(RampSign sign, double t0, double duration, const TimeGrid& grid) {
    if (!(duration > 0.0))
        throw InvalidParameter("ramp duration must be positive");
    std::vector<cplx> s(grid.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double x = (grid.at(i) - t0) / duration;
        if (x >= 0.0 && x <= 1.0)
            s[i] = sign == RampSign::positive ? x : 1.0 - x;
    }
    return Envelope(grid, std::move(s)).normalized();
}

TimeBinLayout time_bin_layout(double separation, const TimeGrid& grid) {
    const double mid = 0.5 * (grid.t_start() + grid.t_end());
    return {mid - 0.5 * separation, mid + 0.5 * separation};
}

Envelope make_time_bin(double theta, double phi, double sigma_bin, double separation, const TimeGrid& grid) {
    if (!(sigma_bin > 0.0))
        throw InvalidParameter("time-bin sigma must be positive");
    if (separation < 4.0 * sigma_bin)
        throw InvalidParameter("time bins overlap: separation must be at least 4 sigma_bin");
    const auto [c1, c2] = time_bin_layout(separation, grid);
    if (c1 - 4.0 * sigma_bin < grid.t_start() || c2 + 4.0 * sigma_bin > grid.t_end())
        throw InvalidParameter("time bins do not fit inside the grid");

    const Envelope g1 = Envelope(grid, gaussian_samples(c1, sigma_bin, grid)).normalized();
    const Envelope g2 = Envelope(grid, gaussian_samples(c2, sigma_bin, grid)).normalized();
    const cplx a1 = std::cos(theta);
    const cplx a2 = std::polar(std::sin(theta), phi);
    std::vector<cplx> s(grid.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] = a1 * g1[i] + a2 * g2[i];
    return Envelope(grid, std::move(s)).normalized();
}

} // namespace lmem
