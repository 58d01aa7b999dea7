#include "vbgk/cli/app.hpp"
#include "vbgk/cli/config.hpp"

#include <doctest.h>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using vbgk::cli::run_cli;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "vbgk");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vbgk_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("bifurcation CSV is deterministic and starts at L(2) = 0") {
  const fs::path a = scratch("bif_a"), b = scratch("bif_b");
  REQUIRE(invoke({"bifurcation", "--output-dir", a.string(), "--quiet"}).code == 0);
  REQUIRE(invoke({"bifurcation", "--output-dir", b.string(), "--quiet"}).code == 0);
  const std::string csv = slurp(a / "bifurcation.csv");
  CHECK(csv == slurp(b / "bifurcation.csv"));
  std::istringstream lines(csv);
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == "mu,L_solved,L_asymptotic,residual,scaled_defect");
  CHECK(first.rfind("2,0,", 0) == 0);
  int rows = 0;
  for (std::string l; std::getline(lines, l);) ++rows;
  CHECK(rows == 100);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("manifest lists existing outputs") {
  const fs::path dir = scratch("sim");
  const Outcome o = invoke({"simulate", "--output-dir", dir.string(), "--quiet", "--set", "t_end=0.2", "--set",
                            "nx=8", "--set", "ntheta=16", "--set", "fit_t_min=0", "--set", "fit_t_max=0.2",
                            "--set", "field_snapshot_every=10"});
  REQUIRE(o.code == 0);
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(m["status"] == "ok");
  CHECK(m["config"]["simulate"]["nx"] == 8);
  CHECK(m["version"] == vbgk::cli::version());
  CHECK(m["summary"].contains("J_infty"));
  for (const auto& f : m["outputs"]) CHECK(fs::exists(dir / f.get<std::string>()));
  CHECK(m["outputs"].size() == 7);  // csv + 3 snapshots with sidecars
  const auto sidecar = nlohmann::json::parse(slurp(dir / "field_0001.json"));
  CHECK(sidecar["t"].get<double>() == doctest::Approx(0.1));
  CHECK(sidecar["mode"] == "nonlinear");
  fs::remove_all(dir);
}

TEST_CASE("simulate output is byte-identical on rerun") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const std::vector<std::string> common{"--quiet", "--set", "t_end=0.3", "--set", "nx=8", "--set", "ntheta=16",
                                        "--set", "seed=42", "--set", "fit_t_max=0.3", "--set", "fit_t_min=0"};
  auto args_a = common, args_b = common;
  args_a.insert(args_a.begin(), {"simulate", "--output-dir", a.string()});
  args_b.insert(args_b.begin(), {"simulate", "--output-dir", b.string()});
  REQUIRE(invoke(args_a).code == 0);
  REQUIRE(invoke(args_b).code == 0);
  CHECK(slurp(a / "diagnostics.csv") == slurp(b / "diagnostics.csv"));
  CHECK(slurp(a / "field_0000.bin") == slurp(b / "field_0000.bin"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("configuration errors exit with code 2 and name the key") {
  const auto start = std::chrono::steady_clock::now();
  Outcome o = invoke({"simulate", "--set", "simulate.dt=-1"});
  CHECK(o.code == 2);
  CHECK(o.err.find("simulate.dt") != std::string::npos);
  o = invoke({"simulate", "--set", "init.nonsense=3"});
  CHECK(o.code == 2);
  CHECK(o.err.find("simulate.init.nonsense") != std::string::npos);
  o = invoke({"dispersion", "--set", "n_im=abc"});
  CHECK(o.code == 2);
  CHECK(o.err.find("dispersion.n_im") != std::string::npos);
  o = invoke({"entropy", "--set", "mode=nonlinear"});
  CHECK(o.code == 2);
  o = invoke({"nosuch"});
  CHECK(o.code == 2);
  o = invoke({"bounds", "--config", "/nonexistent/file.json"});
  CHECK(o.code == 2);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(1));

  const fs::path cfg = scratch("cfg.json");
  std::ofstream(cfg) << R"({"experiment": "bounds", "bounds": {"samples": 5, "colour": 1}})";
  o = invoke({"bounds", "--config", cfg.string()});
  CHECK(o.code == 2);
  CHECK(o.err.find("bounds.colour") != std::string::npos);
  std::ofstream(cfg) << R"({"experiment": "homogeneous"})";
  CHECK(invoke({"bounds", "--config", cfg.string()}).code == 2);
  fs::remove(cfg);
}

TEST_CASE("config file and overrides layer over defaults") {
  const fs::path cfg = scratch("layer.json");
  std::ofstream(cfg) << R"({"experiment": "bounds", "output_dir": "ignored", "bounds": {"samples": 5, "seed": 3}})";
  const auto c = vbgk::cli::resolve_config("bounds", cfg.string(), {"samples=7", "bounds.gamma_max=20"});
  CHECK(c["bounds"]["samples"] == 7);
  CHECK(c["bounds"]["seed"] == 3);
  CHECK(c["bounds"]["gamma_max"] == 20);
  CHECK(c["bounds"]["d"] == 2);
  CHECK(c["output_dir"] == "ignored");
  fs::remove(cfg);

  const fs::path dir = scratch("bounds");
  const Outcome o = invoke({"bounds", "--output-dir", dir.string(), "--quiet", "--set", "samples=50"});
  CHECK(o.code == 0);
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(m["summary"]["violations"] == 0);
  fs::remove_all(dir);
}

TEST_CASE("single-point dispersion sweep writes one row") {
  const fs::path dir = scratch("disp");
  const Outcome o = invoke({"dispersion", "--output-dir", dir.string(), "--quiet", "--set", "n_re=1", "--set",
                            "n_im=1", "--set", "k_max_factor=1", "--set", "im_max=0"});
  REQUIRE(o.code == 0);
  // k_max = gamma gives the four axis vectors
  const std::string csv = slurp(dir / "dispersion.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  fs::remove_all(dir);
}

TEST_CASE("numerical failure exits with code 1") {
  const fs::path dir = scratch("fail");
  // the spectral transform of a field this large overflows
  const Outcome o = invoke({"simulate", "--output-dir", dir.string(), "--quiet", "--set", "mode=linearized", "--set",
                            "nx=8", "--set", "ntheta=16", "--set", "mu=1.5", "--set", "t_end=1", "--set",
                            "fit_t_min=0", "--set", "fit_t_max=1", "--set", "init.amplitude=1e307"});
  CHECK(o.code == 1);
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(m["status"] == "numerical_failure");
  CHECK(m["summary"]["last_valid_time"] == 0.0);
  fs::remove_all(dir);
}
