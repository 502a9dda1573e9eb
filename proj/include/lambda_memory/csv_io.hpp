// csv_io.hpp: CSV exports.
//
// Time series:  t,re_e_in,im_e_in,re_e_out,im_e_out,omega   (omega = |Omega|)
// Spin wave:    z,re_s,im_s
// One header row, comma separated, values in %.10e.
#pragma once

#include "lambda_memory/core.hpp"
#include "lambda_memory/solver.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace lmem {

inline constexpr const char* kTimeSeriesHeader = "t,re_e_in,im_e_in,re_e_out,im_e_out,omega";
inline constexpr const char* kSpinHeader = "z,re_s,im_s";

/// Stage boundary fluxes and control; times shifted by `t_offset`.
void write_stage_csv(const std::filesystem::path& path, const StageRecord& record, double t_offset = 0.0);

/// A control together with the pulse it was designed for (E_in columns) and the
/// predicted output (E_out columns), all resampled onto the control's grid.
void write_control_csv(const std::filesystem::path& path, const Envelope& control, const Envelope& designed_for,
                       const Envelope& predicted, double t_offset = 0.0);

void write_spin_csv(const std::filesystem::path& path, const SpinWave& s);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Numeric CSV reader (used by tests and post-processing); non-numeric cells become NaN.
CsvTable read_csv(const std::filesystem::path& path);

std::string format_number(double v);

} // namespace lmem
