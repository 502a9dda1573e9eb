#include "lambda_memory/metrics.hpp"

#include "lambda_memory/errors.hpp"

#include <algorithm>
#include <cmath>

namespace lmem {

namespace {

cplx inner(const Envelope& a, const Envelope& b_on_a) {
    cplx acc{};
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        acc += w * std::conj(a[i]) * b_on_a[i];
    }
    return acc * a.grid().dt();
}

double centroid(const Envelope& e) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double p = std::norm(e[i]);
        num += p * e.grid().at(i);
        den += p;
    }
    return den > 0.0 ? num / den : 0.5 * (e.grid().t_start() + e.grid().t_end());
}

Envelope window_of(const Envelope& e, TimeWindow w) {
    const TimeGrid& g = e.grid();
    if (!(w.end > w.start) || !g.contains(w.start) || !g.contains(w.end))
        throw InvalidParameter("bin window lies outside the output grid");
    return resample(e, TimeGrid::with_max_step(w.start, w.end, g.dt() * (1.0 + 1e-12)));
}

} // namespace

double efficiency(const Envelope& e_in, const Envelope& e_out) {
    const double ein = e_in.energy();
    if (!(ein > 0.0))
        throw InvalidParameter("efficiency needs a non-zero input energy");
    return e_out.energy() / ein;
}

double overlap(const Envelope& a, const Envelope& b) {
    const Envelope bb = resample(b, a.grid());
    const double ea = a.energy();
    const double eb = bb.energy();
    if (!(ea > 0.0) || !(eb > 0.0))
        throw InvalidParameter("overlap of a zero-energy envelope");
    // Cauchy-Schwarz holds for the trapezoid inner product; the clamp only removes rounding.
    return std::min(1.0, std::norm(inner(a, bb)) / (ea * eb));
}

FidelityHom hom_and_fidelity(double eta, double j2) {
    if (eta < 0.0 || eta > 1.0 || j2 < 0.0 || j2 > 1.0)
        throw InvalidParameter("eta and J^2 must lie in [0, 1]");
    return {eta * j2, 0.5 * (1.0 - j2)};
}

std::pair<TimeWindow, TimeWindow> split_windows(const TimeGrid& grid) {
    const double mid = 0.5 * (grid.t_start() + grid.t_end());
    return {{grid.t_start(), mid}, {mid, grid.t_end()}};
}

BinMetrics bin_analysis(const Envelope& e_out, TimeWindow first, TimeWindow second) {
    if (std::max(first.start, second.start) < std::min(first.end, second.end))
        throw InvalidParameter("bin windows overlap");
    BinMetrics m;
    m.first = window_of(e_out, first);
    m.second = window_of(e_out, second);
    m.energy_first = m.first.energy();
    m.energy_second = m.second.energy();
    m.ratio = m.energy_first > 0.0 ? m.energy_second / m.energy_first : 0.0;
    if (m.energy_first > 0.0 && m.energy_second > 0.0) {
        const Envelope aligned = m.second.shifted(centroid(m.first) - centroid(m.second));
        const Envelope b = resample(aligned, m.first.grid());
        m.j2_bins = b.energy() > 0.0 ? std::min(1.0, std::norm(inner(m.first, b)) / (m.energy_first * b.energy())) : 0.0;
    }
    return m;
}

MetricsReport make_report(const Envelope& e_in, const Envelope& e_out, const Envelope& target,
                          std::optional<std::pair<TimeWindow, TimeWindow>> bin_windows) {
    MetricsReport r;
    r.eta = efficiency(e_in, e_out);
    r.j2 = e_out.energy() > 0.0 ? overlap(target, e_out) : 0.0;
    const auto fh = hom_and_fidelity(std::clamp(r.eta, 0.0, 1.0), r.j2);
    r.fidelity = r.eta * r.j2;
    r.hom_coincidence = fh.coincidence;
    if (bin_windows)
        r.bins = bin_analysis(e_out, bin_windows->first, bin_windows->second);
    return r;
}

} // namespace lmem
