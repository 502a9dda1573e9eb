// pulses.hpp: unit-energy signal pulse constructors.
#pragma once

#include "lambda_memory/core.hpp"

#include <optional>

namespace lmem {

/// Gaussian whose intensity |E|^2 has rms width `sigma`: E ∝ exp(-(t - center)^2 / (4 sigma^2)).
Envelope make_gaussian(double center, double sigma, const TimeGrid& grid);

enum class RampSign { positive, negative };

/// Linear ramp of length `duration`, centred in the grid. The sharp edge is replaced by a
/// linear edge of length `rise` (default duration / 20), so the support is duration + rise.
Envelope make_ramp(RampSign sign, double duration, const TimeGrid& grid, std::optional<double> rise = std::nullopt);

/// Ideal (unsmoothed) ramp: amplitude (t - t0)/duration on [t0, t0 + duration], zero elsewhere.
Envelope make_ideal_ramp(RampSign sign, double t0, double duration, const TimeGrid& grid);

struct TimeBinLayout {
    double first_center;
    double second_center;
};

/// cos(theta) g1 + e^{i phi} sin(theta) g2 with unit-energy Gaussian bins of intensity width `sigma_bin`,
/// placed symmetrically about the grid centre `separation` apart.
Envelope make_time_bin(double theta, double phi, double sigma_bin, double separation, const TimeGrid& grid);
TimeBinLayout time_bin_layout(double separation, const TimeGrid& grid);

} // namespace lmem
