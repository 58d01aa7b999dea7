#include "vbgk/cli/experiments.hpp"

#include "vbgk/equilibria.hpp"
#include "vbgk/io.hpp"
#include "vbgk/linstab.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace vbgk::cli {

namespace fs = std::filesystem;

namespace {

template <typename T>
T get(const Json& block, const std::string& key, const std::string& path) {
  const std::string full = path + "." + key;
  if (!block.contains(key)) throw ConfigError(full + ": missing");
  const Json& v = block.at(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError(full + ": expected a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ConfigError(full + ": expected an integer");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ConfigError(full + ": expected a number");
    if (!std::isfinite(v.get<double>())) throw ConfigError(full + ": must be finite");
  } else {
    if (!v.is_string()) throw ConfigError(full + ": expected a string");
  }
  return v.get<T>();
}

void require(bool ok, const std::string& key, const std::string& why) {
  if (!ok) throw ConfigError(key + ": " + why);
}

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

// --- bifurcation ---------------------------------------------------------------

PreparedExperiment prepare_bifurcation(const Json& b) {
  const std::string p = "bifurcation";
  const int d = get<int>(b, "d", p);
  const double lo = get<double>(b, "mu_min", p);
  const double hi = get<double>(b, "mu_max", p);
  const int n = get<int>(b, "points", p);
  const double tol = get<double>(b, "tol", p);
  require(d >= 2, p + ".d", "must be >= 2");
  require(lo > 0.0, p + ".mu_min", "must be positive");
  require(hi >= lo, p + ".mu_max", "must be >= mu_min");
  require(n >= 1, p + ".points", "must be >= 1");
  require(n > 1 || hi == lo, p + ".points", "a single point needs mu_min == mu_max");
  require(tol > 0.0, p + ".tol", "must be positive");
  return {p, [=](const fs::path& dir) {
            std::vector<double> mus;
            for (int i = 0; i < n; ++i) mus.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
            const EquilibriumBranch branch = compute_branch(d, mus, tol);
            std::vector<std::vector<double>> rows;
            double max_residual = 0.0;
            double max_scaled = 0.0;
            for (const BranchSample& s : branch.samples) {
              const double excess = s.mu - d;
              const double asym = excess > 0.0 ? asymptotic_l(s.mu, d) : 0.0;
              const double scaled = excess > 0.0 ? (s.L * s.L - (d + 2) * excess) / (excess * excess) : 0.0;
              rows.push_back({s.mu, s.L, asym, s.residual, scaled});
              max_residual = std::max(max_residual, s.residual);
              max_scaled = std::max(max_scaled, std::abs(scaled));
            }
            write_file_atomic(dir / "bifurcation.csv",
                              csv_table({"mu", "L_solved", "L_asymptotic", "residual", "scaled_defect"}, rows));
            ExperimentResult r;
            r.outputs = {"bifurcation.csv"};
            r.summary["max_residual"] = max_residual;
            r.summary["max_abs_scaled_defect"] = max_scaled;
            return r;
          }};
}

// --- homogeneous --------------------------------------------------------------

PreparedExperiment prepare_homogeneous(const Json& b) {
  const std::string p = "homogeneous";
  const int d = get<int>(b, "d", p);
  const double mu = get<double>(b, "mu", p);
  const double L0 = get<double>(b, "L0", p);
  const double angle = get<double>(b, "angle", p);
  const double t_end = get<double>(b, "t_end", p);
  const double dt = get<double>(b, "dt", p);
  const int every = get<int>(b, "every", p);
  require(d == 2 || d == 3, p + ".d", "must be 2 or 3");
  require(mu > 0.0, p + ".mu", "must be positive");
  require(L0 >= 0.0, p + ".L0", "must be nonnegative");
  require(t_end >= 0.0, p + ".t_end", "must be nonnegative");
  require(dt > 0.0, p + ".dt", "must be positive");
  require(every >= 1, p + ".every", "must be >= 1");
  return {p, [=](const fs::path& dir) {
            Vec J0 = Vec::Zero(d);
            J0(0) = L0 * std::cos(angle);
            J0(1) = L0 * std::sin(angle);
            const HomogeneousTrajectory tr = homogeneous_flow(mu, J0, t_end, dt);
            std::vector<std::string> header{"t", "L", "J_x", "J_y"};
            if (d == 3) header.push_back("J_z");
            std::vector<std::vector<double>> rows;
            for (std::size_t i = 0; i < tr.times.size(); ++i) {
              if (i % static_cast<std::size_t>(every) != 0 && i + 1 != tr.times.size()) continue;
              const Vec J = tr.flux_at(i);
              std::vector<double> row{tr.times[i], tr.L_values[i]};
              for (int c = 0; c < d; ++c) row.push_back(J(c));
              rows.push_back(std::move(row));
            }
            write_file_atomic(dir / "homogeneous.csv", csv_table(header, rows));
            ExperimentResult r;
            r.outputs = {"homogeneous.csv"};
            const double L_end = tr.L_values.back();
            const double L_mu = mu > d ? branch_l(mu, d) : 0.0;
            r.summary["L_final"] = L_end;
            r.summary["L_mu"] = L_mu;
            r.summary["abs_error"] = std::abs(L_end - L_mu);
            return r;
          }};
}

// --- dispersion -----------------------------------------------------------------

PreparedExperiment prepare_dispersion(const Json& b) {
  const std::string p = "dispersion";
  const int d = get<int>(b, "d", p);
  const double mu = get<double>(b, "mu", p);
  const double gamma = get<double>(b, "gamma", p);
  const double re_min = get<double>(b, "re_min", p);
  const double re_max = get<double>(b, "re_max", p);
  const int n_re = get<int>(b, "n_re", p);
  const double im_max = get<double>(b, "im_max", p);
  const int n_im = get<int>(b, "n_im", p);
  const double kf = get<double>(b, "k_max_factor", p);
  const bool write_points = get<bool>(b, "write_points", p);
  require(d == 2 || d == 3, p + ".d", "must be 2 or 3");
  require(mu > 0.0, p + ".mu", "must be positive");
  require(gamma > 0.0, p + ".gamma", "must be positive");
  require(re_min > -1.0, p + ".re_min", "must be > -1");
  require(re_max >= re_min, p + ".re_max", "must be >= re_min");
  require(n_re >= 1, p + ".n_re", "must be >= 1");
  require(im_max >= 0.0, p + ".im_max", "must be nonnegative");
  require(n_im >= 1, p + ".n_im", "must be >= 1");
  require(kf >= 1.0, p + ".k_max_factor", "must be >= 1 so that at least one lattice vector is swept");
  return {p, [=](const fs::path& dir) {
            Vec J = Vec::Zero(d);
            if (mu > d) J(0) = branch_l(mu, d);
            const auto zs = rectangular_z_grid(re_min, re_max, n_re, im_max, n_im);
            const auto ks = lattice_wave_vectors(d, gamma, kf * gamma);
            const SweepReport rep = invertibility_sweep(mu, J, zs, ks);
            ExperimentResult r;
            if (write_points) {
              std::vector<std::string> header{"z_re", "z_im", "k1", "k2"};
              if (d == 3) header.push_back("k3");
              header.insert(header.end(), {"min_singular", "re_h"});
              std::vector<std::vector<double>> rows;
              rows.reserve(rep.points.size());
              for (const SweepPoint& pt : rep.points) {
                std::vector<double> row{pt.z.real(), pt.z.imag()};
                for (int c = 0; c < d; ++c) row.push_back(pt.k(c));
                row.push_back(pt.min_singular);
                row.push_back(pt.re_h);
                rows.push_back(std::move(row));
              }
              write_file_atomic(dir / "dispersion.csv", csv_table(header, rows));
              r.outputs.push_back("dispersion.csv");
            }
            r.summary["points"] = rep.points.size();
            r.summary["wave_vectors"] = ks.size();
            r.summary["min_re_h"] = rep.min_re_h;
            r.summary["min_singular"] = rep.min_singular;
            r.summary["max_resolvent_norm"] = rep.max_resolvent_norm;
            r.summary["singular_count"] = rep.singular_count;
            r.summary["below_fifth_count"] = rep.below_fifth_count;
            r.summary["below_fifth"] = rep.below_fifth_count > 0;
            return r;
          }};
}

// --- bounds -------------------------------------------------------------------------

PreparedExperiment prepare_bounds(const Json& b) {
  const std::string p = "bounds";
  const int d = get<int>(b, "d", p);
  const int samples = get<int>(b, "samples", p);
  const auto seed = get<std::uint64_t>(b, "seed", p);
  const double g_lo = get<double>(b, "gamma_min", p);
  const double g_hi = get<double>(b, "gamma_max", p);
  const double re_max = get<double>(b, "re_max", p);
  const double im_max = get<double>(b, "im_max", p);
  const double eps_in = get<double>(b, "eps", p);
  require(d >= 2, p + ".d", "must be >= 2");
  require(samples >= 1, p + ".samples", "must be >= 1");
  require(g_lo > 0.0, p + ".gamma_min", "must be positive");
  require(g_hi >= g_lo, p + ".gamma_max", "must be >= gamma_min");
  require(re_max >= 0.0, p + ".re_max", "must be nonnegative");
  require(im_max >= 0.0, p + ".im_max", "must be nonnegative");
  require(eps_in >= 0.0 && eps_in < 1.0, p + ".eps", "must lie in [0, 1); 0 selects the default");
  return {p, [=](const fs::path& dir) {
            const double eps = eps_in > 0.0 ? eps_in : default_bound_eps(d);
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> U(0.0, 1.0);
            std::vector<std::vector<double>> rows;
            std::size_t violations = 0;
            for (int s = 0; s < samples; ++s) {
              const double k = g_lo + (g_hi - g_lo) * U(rng);
              const cplx z(re_max * U(rng), im_max * (2.0 * U(rng) - 1.0));
              const AxisCoefficients c = axis_coefficients(z, k, d);
              const BoundBudget bb = bound_budget(k, d, eps);
              const double re_c0 = c.c0.real();
              const double a1 = std::abs(c.c1);
              const double a2 = d * std::abs(c.c2);
              violations += (re_c0 > bb.re_c0_bound()) + (a1 > bb.abs_c1_bound()) + (a2 > bb.d_abs_c2_bound());
              rows.push_back({z.real(), z.imag(), k, re_c0, bb.re_c0_bound(), a1, bb.abs_c1_bound(), a2,
                              bb.d_abs_c2_bound()});
            }
            write_file_atomic(dir / "bounds.csv", csv_table({"z_re", "z_im", "k", "re_c0", "bound_c0", "abs_c1",
                                                             "bound_c1", "d_abs_c2", "bound_c2"},
                                                            rows));
            ExperimentResult r;
            r.outputs = {"bounds.csv"};
            r.summary["eps"] = eps;
            r.summary["samples"] = samples;
            r.summary["violations"] = violations;
            return r;
          }};
}

// --- solver runs ----------------------------------------------------------------------

struct SolverRunSetup {
  SolverConfig config;
  int field_snapshot_every = 0;
  double fit_t_min = 0.0;
  double fit_t_max = 0.0;
};

SolverRunSetup solver_setup(const Json& b, const std::string& p) {
  SolverRunSetup s;
  s.config = solver_config_from_json(b, p);
  s.field_snapshot_every = get<int>(b, "field_snapshot_every", p);
  s.fit_t_min = get<double>(b, "fit_t_min", p);
  s.fit_t_max = get<double>(b, "fit_t_max", p);
  require(s.field_snapshot_every >= 0, p + ".field_snapshot_every", "must be >= 0");
  require(s.fit_t_max > s.fit_t_min, p + ".fit_t_max", "must exceed fit_t_min");
  return s;
}

// Runs the solver, writing diagnostics.csv and field snapshots.
RunResult run_with_outputs(const SolverRunSetup& s, const fs::path& dir, ExperimentResult& r) {
  RunOptions opts;
  opts.field_snapshot_every = s.field_snapshot_every;
  int index = 0;
  opts.on_field_snapshot = [&](double t, const PhaseField& f) {
    char name[32];
    std::snprintf(name, sizeof(name), "field_%04d.bin", index++);
    write_snapshot(dir / name, f, s.config.mu, t, s.config.mode);
    r.outputs.push_back(name);
    r.outputs.push_back(fs::path(name).replace_extension(".json").string());
  };
  RunResult run_result = run(s.config, opts);
  write_file_atomic(dir / "diagnostics.csv", diagnostics_csv(run_result.series));
  r.outputs.insert(r.outputs.begin(), "diagnostics.csv");
  r.summary["steps_completed"] = std::lround(run_result.last_valid_time / s.config.dt);
  r.summary["last_valid_time"] = run_result.last_valid_time;
  if (run_result.aborted) {
    r.failed = true;
    r.failure = run_result.abort_message;
  }
  if (!run_result.series.empty()) {
    const double m0 = run_result.series.front().mass;
    double drift = 0.0;
    for (const DiagnosticsRow& row : run_result.series) drift = std::max(drift, std::abs(row.mass - m0));
    r.summary["mass_drift"] = drift;
    r.summary["mass_drift_relative"] = m0 != 0.0 ? drift / std::abs(m0) : drift;
  }
  return run_result;
}

void add_decay_fit(const SolverRunSetup& s, const DiagnosticsSeries& series, DecayQuantity q, ExperimentResult& r) {
  try {
    const DecayFit fit = fit_decay_rate(series, s.fit_t_min, s.fit_t_max, q);
    r.summary["rate_measured"] = fit.rate;
    r.summary["r_squared"] = fit.r_squared;
    r.summary["fit_points"] = fit.points_used;
  } catch (const InvalidArgument& e) {
    r.summary["fit_error"] = e.what();
  }
}

PreparedExperiment prepare_simulate(const Json& b) {
  const std::string p = "simulate";
  const SolverRunSetup s = solver_setup(b, p);
  return {p, [=](const fs::path& dir) {
            ExperimentResult r;
            const RunResult rr = run_with_outputs(s, dir, r);
            if (rr.series.empty()) return r;
            const DecayQuantity q = s.config.mode == SolverMode::linearized ? DecayQuantity::l2 : DecayQuantity::dist;
            add_decay_fit(s, rr.series, q, r);
            const auto& first = rr.series.front();
            const auto& last = rr.series.back();
            Vec J0(2), Jinf(2);
            J0 << first.jbar[0], first.jbar[1];
            Jinf << last.jbar[0], last.jbar[1];
            r.summary["J_infty"] = vec_json(Jinf);
            r.summary["dist_initial"] = first.dist;
            r.summary["dist_final"] = last.dist;
            if (s.config.mode != SolverMode::linearized && s.config.mu > 2.0 && J0.norm() > 0.0) {
              const Vec J1 = project_to_manifold(s.config.mu, J0);
              const double shift = (J1 - Jinf).norm();
              r.summary["J_1"] = vec_json(J1);
              r.summary["J_shift"] = shift;
              r.summary["J_shift_over_dist0"] = first.dist > 0.0 ? shift / first.dist : 0.0;
              if (s.config.init.amplitude > 0.0) {
                r.summary["J_shift_over_amplitude"] = shift / s.config.init.amplitude;
              }
            }
            return r;
          }};
}

PreparedExperiment prepare_linear_decay(const Json& b) {
  const std::string p = "linear-decay";
  SolverRunSetup s = solver_setup(b, p);
  require(s.config.mode == SolverMode::linearized, p + ".mode", "must be 'linearized'");
  require(s.config.mu != 2.0, p + ".mu", "mu = 2 is the bifurcation point; no decay rate exists");
  const double kf = get<double>(b, "k_max_factor", p);
  require(kf >= 1.0, p + ".k_max_factor", "must be >= 1");
  return {p, [=](const fs::path& dir) {
            ExperimentResult r;
            const RunResult rr = run_with_outputs(s, dir, r);
            add_decay_fit(s, rr.series, DecayQuantity::dist, r);
            const SpectralEstimate est = spectral_abscissa(s.config.mu, s.config.gamma, 2, kf * s.config.gamma);
            r.summary["rate_predicted"] = est.rate;
            r.summary["rate_predicted_k0"] = est.k0_rate;
            r.summary["roots_found"] = est.roots.size();
            if (r.summary.contains("rate_measured") && est.rate != 0.0) {
              r.summary["ratio"] = r.summary["rate_measured"].get<double>() / est.rate;
            }
            return r;
          }};
}

PreparedExperiment prepare_entropy(const Json& b) {
  const std::string p = "entropy";
  const SolverRunSetup s = solver_setup(b, p);
  require(s.config.mode == SolverMode::regularized, p + ".mode", "must be 'regularized'");
  return {p, [=](const fs::path& dir) {
            ExperimentResult r;
            const RunResult rr = run_with_outputs(s, dir, r);
            if (rr.series.empty()) return r;
            DiagnosticsSeries window;
            for (const DiagnosticsRow& row : rr.series) {
              if (row.t >= s.fit_t_min && row.t <= s.fit_t_max) window.push_back(row);
            }
            if (window.empty()) window = rr.series;
            const EntropyFit fit = fit_entropy_growth(window);
            r.summary["c"] = fit.c;
            r.summary["C"] = fit.C;
            r.summary["max_violation"] = fit.max_violation;
            double e_max = 0.0;
            for (const DiagnosticsRow& row : rr.series) e_max = std::max(e_max, row.entropy);
            r.summary["entropy_max"] = e_max;
            return r;
          }};
}

}  // namespace

SolverConfig solver_config_from_json(const Json& b, const std::string& p) {
  SolverConfig c;
  try {
    c.mode = solver_mode_from_string(get<std::string>(b, "mode", p));
  } catch (const InvalidArgument& e) {
    throw ConfigError(p + ".mode: " + e.what());
  }
  c.mu = get<double>(b, "mu", p);
  c.gamma = get<double>(b, "gamma", p);
  c.dt = get<double>(b, "dt", p);
  c.t_end = get<double>(b, "t_end", p);
  c.nx = get<int>(b, "nx", p);
  c.ntheta = get<int>(b, "ntheta", p);
  c.snapshot_every = get<int>(b, "snapshot_every", p);
  c.seed = get<std::uint64_t>(b, "seed", p);
  c.eq_angle = get<double>(b, "eq_angle", p);
  c.eps_reg = get<double>(b, "eps_reg", p);
  c.dealias = get<bool>(b, "dealias", p);
  const std::string ip = p + ".init";
  if (!b.contains("init") || !b["init"].is_object()) throw ConfigError(ip + ": expected an object");
  const Json& init = b["init"];
  try {
    c.init.kind = init_kind_from_string(get<std::string>(init, "kind", ip));
  } catch (const InvalidArgument& e) {
    throw ConfigError(ip + ".kind: " + e.what());
  }
  const Json& mode = init.at("mode");
  if (!mode.is_array() || mode.size() != 2 || !mode[0].is_number_integer() || !mode[1].is_number_integer()) {
    throw ConfigError(ip + ".mode: expected two integers");
  }
  c.init.mode = {mode[0].get<int>(), mode[1].get<int>()};
  c.init.amplitude = get<double>(init, "amplitude", ip);
  c.init.blob_mass = get<double>(init, "blob_mass", ip);
  c.init.blob_width = get<double>(init, "blob_width", ip);
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(p + "." + e.what());
  }
  if (c.t_end / c.dt > 1e8) throw ConfigError(p + ".dt: more than 1e8 steps requested");
  return c;
}

PreparedExperiment prepare_experiment(const Json& config) {
  if (!config.contains("experiment") || !config["experiment"].is_string()) {
    throw ConfigError("experiment: missing or not a string");
  }
  const std::string name = config["experiment"].get<std::string>();
  if (!config.contains(name) || !config[name].is_object()) throw ConfigError(name + ": parameter block missing");
  const Json& b = config[name];
  if (name == "bifurcation") return prepare_bifurcation(b);
  if (name == "homogeneous") return prepare_homogeneous(b);
  if (name == "dispersion") return prepare_dispersion(b);
  if (name == "bounds") return prepare_bounds(b);
  if (name == "simulate") return prepare_simulate(b);
  if (name == "linear-decay") return prepare_linear_decay(b);
  if (name == "entropy") return prepare_entropy(b);
  throw ConfigError("experiment: unknown experiment '" + name + "'");
}

}  // namespace vbgk::cli
