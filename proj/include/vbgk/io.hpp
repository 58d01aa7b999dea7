#pragma once

// Plain-file outputs: CSV tables, raw field snapshots with JSON sidecars,
// and atomic whole-file writes.

#include "vbgk/kinetic.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace vbgk {

// 17 significant digits, '.' separator, independent of the global locale.
std::string format_double(double x);

inline constexpr const char* kDiagnosticsHeader = "t,mass,jbar_x,jbar_y,l2,entropy,dist,rho_min,rho_max";

std::string diagnostics_csv(const DiagnosticsSeries& series);

// Generic CSV: header line plus rows of numbers.
std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

// Writes to path.tmp then renames over path.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// Raw little-endian float64 values in (x1, x2, theta) order plus <stem>.json.
// Returns the two paths written.
std::vector<std::filesystem::path> write_snapshot(const std::filesystem::path& raw_path, const PhaseField& field,
                                                  double mu, double t, SolverMode mode);

// Reads back a snapshot written by write_snapshot.
PhaseField read_snapshot(const std::filesystem::path& raw_path);

}  // namespace vbgk
