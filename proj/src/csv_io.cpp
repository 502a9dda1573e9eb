#include "lambda_memory/csv_io.hpp"

#include "lambda_memory/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace lmem {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    return out;
}

void row(std::ostream& out, std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
        if (!first)
            out << ',';
        out << format_number(v);
        first = false;
    }
    out << '\n';
}

} // namespace

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10e", v == 0.0 ? 0.0 : v); // no "-0"
    return buf;
}

void write_stage_csv(const std::filesystem::path& path, const StageRecord& r, double t_offset) {
    auto out = open_out(path);
    out << kTimeSeriesHeader << '\n';
    const TimeGrid& g = r.grids.time;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const cplx ein = r.in_envelope[i];
        const cplx eout = r.out_envelope[i];
        row(out, {g.at(i) + t_offset, ein.real(), ein.imag(), eout.real(), eout.imag(), std::abs(r.control[i])});
    }
}

void write_control_csv(const std::filesystem::path& path, const Envelope& control, const Envelope& designed_for,
                       const Envelope& predicted, double t_offset) {
    auto out = open_out(path);
    out << kTimeSeriesHeader << '\n';
    const TimeGrid& g = control.grid();
    const Envelope a = resample(designed_for, g);
    const Envelope b = resample(predicted, g);
    for (std::size_t i = 0; i < g.size(); ++i)
        row(out, {g.at(i) + t_offset, a[i].real(), a[i].imag(), b[i].real(), b[i].imag(), std::abs(control[i])});
}

void write_spin_csv(const std::filesystem::path& path, const SpinWave& s) {
    auto out = open_out(path);
    out << kSpinHeader << '\n';
    for (std::size_t k = 0; k < s.size(); ++k)
        row(out, {s.grid().at(k), s[k].real(), s[k].imag()});
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidParameter("cannot read " + path.string());
    CsvTable t;
    std::string line;
    if (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            t.header.push_back(cell);
    }
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> r;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            r.push_back(end == cell.c_str() ? std::numeric_limits<double>::quiet_NaN() : v);
        }
        t.rows.push_back(std::move(r));
    }
    return t;
}

} // namespace lmem
