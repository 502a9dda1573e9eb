// metrics.hpp: efficiency, overlap integral and derived figures of merit.
#pragma once

#include "lambda_memory/core.hpp"

#include <optional>
#include <utility>

namespace lmem {

/// Retrieved-to-input energy ratio.
double efficiency(const Envelope& e_in, const Envelope& e_out);

/// J^2 = |∫ conj(a) b dt|^2 / (∫|a|^2 ∫|b|^2); b is resampled onto a's grid.
double overlap(const Envelope& a, const Envelope& b);

struct FidelityHom {
    double fidelity;    ///< F = eta J^2
    double coincidence; ///< HOM coincidence probability (1 - J^2) / 2
};

FidelityHom hom_and_fidelity(double eta, double j2);

struct TimeWindow {
    double start;
    double end;
};

struct BinMetrics {
    double energy_first = 0.0;
    double energy_second = 0.0;
    double ratio = 0.0;   ///< energy_second / energy_first (0 when the first bin is empty)
    double j2_bins = 0.0; ///< overlap of the two bin envelopes after aligning their centroids
    Envelope first = Envelope::zeros(TimeGrid(0.0, 1.0, 1));
    Envelope second = Envelope::zeros(TimeGrid(0.0, 1.0, 1));
};

BinMetrics bin_analysis(const Envelope& e_out, TimeWindow first, TimeWindow second);

/// Split at the midpoint of the grid (the layout used by make_time_bin).
std::pair<TimeWindow, TimeWindow> split_windows(const TimeGrid& grid);

struct MetricsReport {
    double eta = 0.0;
    double j2 = 0.0;
    double fidelity = 0.0;
    double hom_coincidence = 0.0;
    std::optional<BinMetrics> bins;
};

MetricsReport make_report(const Envelope& e_in, const Envelope& e_out, const Envelope& target,
                          std::optional<std::pair<TimeWindow, TimeWindow>> bin_windows = std::nullopt);

} // namespace lmem
