#include "vbgk/io.hpp"

#include "vbgk/error.hpp"

#include <json.hpp>

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace vbgk {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw InvalidArgument("csv_table: row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string diagnostics_csv(const DiagnosticsSeries& series) {
  std::vector<std::vector<double>> rows;
  rows.reserve(series.size());
  for (const DiagnosticsRow& r : series) {
    rows.push_back({r.t, r.mass, r.jbar[0], r.jbar[1], r.l2, r.entropy, r.dist, r.rho_min, r.rho_max});
  }
  return csv_table({"t", "mass", "jbar_x", "jbar_y", "l2", "entropy", "dist", "rho_min", "rho_max"}, rows);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& raw) {
  std::filesystem::path p = raw;
  p.replace_extension(".json");
  return p;
}

}  // namespace

std::vector<std::filesystem::path> write_snapshot(const std::filesystem::path& raw_path, const PhaseField& field,
                                                  double mu, double t, SolverMode mode) {
  const auto& v = field.values();
  std::string bytes(v.size() * sizeof(double), '\0');
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(v[i]);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    std::memcpy(bytes.data() + i * sizeof(double), &bits, sizeof(bits));
  }
  write_file_atomic(raw_path, bytes);
  nlohmann::ordered_json meta;
  meta["nx"] = field.nx();
  meta["ntheta"] = field.ntheta();
  meta["gamma"] = field.gamma();
  meta["mu"] = mu;
  meta["t"] = t;
  meta["mode"] = to_string(mode);
  const auto json_path = sidecar_path(raw_path);
  write_file_atomic(json_path, meta.dump(2) + "\n");
  return {raw_path, json_path};
}

PhaseField read_snapshot(const std::filesystem::path& raw_path) {
  std::ifstream meta_in(sidecar_path(raw_path));
  if (!meta_in) throw Error("missing snapshot sidecar for " + raw_path.string());
  const auto meta = nlohmann::json::parse(meta_in);
  PhaseField field(meta.at("nx").get<int>(), meta.at("ntheta").get<int>(), meta.at("gamma").get<double>());
  std::ifstream in(raw_path, std::ios::binary);
  auto& v = field.values();
  std::string bytes(v.size() * sizeof(double), '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) throw Error("truncated snapshot " + raw_path.string());
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, bytes.data() + i * sizeof(double), sizeof(bits));
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    v[i] = std::bit_cast<double>(bits);
  }
  return field;
}

}  // namespace vbgk
