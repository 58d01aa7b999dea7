#include "vbgk/error.hpp"
#include "vbgk/equilibria.hpp"
#include "vbgk/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace vbgk {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// min over phi of sum_j w_j (Fbar_j - mu M_{L e(phi)}(theta_j))^2
double min_angular_distance_sq(const Vec& Fbar, double mu, double L, const SphereGrid& grid, double hint) {
  const Vec& w = grid.weights();
  auto objective = [&](double phi) {
    Vec J(2);
    J << L * std::cos(phi), L * std::sin(phi);
    const Vec diff = Fbar - mu * von_mises(J, grid);
    return (w.array() * diff.array().square()).sum();
  };
  constexpr int kScan = 64;
  double best_phi = hint;
  double best = objective(hint);
  for (int i = 0; i < kScan; ++i) {
    const double phi = kTwoPi * i / kScan;
    const double v = objective(phi);
    if (v < best) {
      best = v;
      best_phi = phi;
    }
  }
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = best_phi - kTwoPi / kScan;
  double b = best_phi + kTwoPi / kScan;
  double c = b - golden * (b - a);
  double d = a + golden * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  while (b - a > 1e-10) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - golden * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + golden * (b - a);
      fd = objective(d);
    }
  }
  return std::min(best, objective(0.5 * (a + b)));
}

}  // namespace

DiagnosticsRow diagnostics(const PhaseField& field, const SolverConfig& config, double t) {
  const int nt = field.ntheta();
  const SphereGrid grid = solver_angles(nt);
  const Vec& w = grid.weights();
  const Mat& nodes = grid.nodes();
  const std::size_t np = field.points();
  const auto& v = field.values();
  const double inv_np = 1.0 / static_cast<double>(np);

  DiagnosticsRow row;
  row.t = t;
  row.rho_min = std::numeric_limits<double>::infinity();
  row.rho_max = -std::numeric_limits<double>::infinity();
  Vec Fbar = Vec::Zero(nt);
  double l2 = 0.0;
  double entropy = 0.0;
  for (std::size_t p = 0; p < np; ++p) {
    const double* f = v.data() + p * static_cast<std::size_t>(nt);
    double rho = 0.0;
    for (int j = 0; j < nt; ++j) {
      const double wj = w(j);
      const double x = f[j];
      rho += wj * x;
      row.jbar[0] += wj * nodes(j, 0) * x;
      row.jbar[1] += wj * nodes(j, 1) * x;
      l2 += wj * x * x;
      const double xp = std::max(x, 0.0);
      entropy += wj * (1.0 / std::numbers::e + (xp > 0.0 ? xp * std::log(xp) : 0.0));
      Fbar(j) += x;
    }
    row.mass += rho;
    row.rho_min = std::min(row.rho_min, rho);
    row.rho_max = std::max(row.rho_max, rho);
  }
  row.mass *= inv_np;
  row.jbar[0] *= inv_np;
  row.jbar[1] *= inv_np;
  row.l2 = std::sqrt(l2 * inv_np);
  row.entropy = entropy * inv_np;
  Fbar *= inv_np;

  // ||F - Fbar||^2 = ||F||^2 - ||Fbar||^2 under the normalized torus measure
  const double fbar_sq = (w.array() * Fbar.array().square()).sum();
  const double fluct_sq = std::max(0.0, l2 * inv_np - fbar_sq);

  const Vec J_ref = config.reference_flux();
  Vec target = Vec::Zero(nt);
  if (config.mode == SolverMode::linearized) {
    if (config.mu > 2.0) {
      // f_inf = mu (P_perp Jbar) . grad M_J
      Vec perp(2);
      perp << -J_ref(1), J_ref(0);
      perp /= perp.norm();
      const double along = perp(0) * row.jbar[0] + perp(1) * row.jbar[1];
      target = config.mu * along * (grad_j_von_mises(J_ref, grid) * perp);
    }
    const Vec diff = Fbar - target;
    row.dist = std::sqrt(fluct_sq + (w.array() * diff.array().square()).sum());
    return row;
  }

  if (config.mu <= 2.0) {
    const Vec diff = Fbar - config.mu * von_mises(Vec::Zero(2), grid);
    row.dist = std::sqrt(fluct_sq + (w.array() * diff.array().square()).sum());
    return row;
  }
  if (!Fbar.allFinite()) {
    row.dist = std::numeric_limits<double>::quiet_NaN();
    return row;
  }
  const double L = branch_l(config.mu, 2);
  const double hint = std::atan2(row.jbar[1], row.jbar[0]);
  row.dist = std::sqrt(fluct_sq + min_angular_distance_sq(Fbar, config.mu, L, grid, hint));
  return row;
}

DecayFit fit_decay_rate(const DiagnosticsSeries& series, double t_min, double t_max, DecayQuantity quantity) {
  if (!(t_max > t_min)) throw InvalidArgument("fit_decay_rate: requires t_max > t_min");
  const double floor = 1e3 * std::numeric_limits<double>::epsilon();
  std::vector<double> ts, ys;
  for (const DiagnosticsRow& r : series) {
    if (r.t < t_min || r.t > t_max) continue;
    const double q = quantity == DecayQuantity::dist ? r.dist : r.l2;
    if (!(q > floor)) continue;
    ts.push_back(r.t);
    ys.push_back(std::log(q));
  }
  DecayFit fit;
  fit.points_used = ts.size();
  if (ts.size() < 2) throw InvalidArgument("fit_decay_rate: fewer than two usable rows in the window");
  const double n = static_cast<double>(ts.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    my += ys[i];
  }
  mt /= n;
  my /= n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    sty += (ts[i] - mt) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (stt == 0.0) throw InvalidArgument("fit_decay_rate: all rows share one time");
  const double slope = sty / stt;
  fit.rate = -slope;
  const double ss_res = std::max(0.0, syy - slope * sty);
  // spread at rounding level counts as a constant series
  double ymax = 0.0;
  for (const double y : ys) ymax = std::max(ymax, std::abs(y));
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::max(ymax, 1.0);
  fit.r_squared = syy > n * noise * noise ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

EntropyFit fit_entropy_growth(const DiagnosticsSeries& series) {
  if (series.empty()) throw InvalidArgument("fit_entropy_growth: empty series");
  for (const DiagnosticsRow& r : series) {
    if (!std::isfinite(r.entropy)) throw InvalidArgument("fit_entropy_growth: non-finite entropy");
  }
  std::vector<double> cs{0.0};
  constexpr int kGrid = 81;
  for (int i = 0; i < kGrid; ++i) cs.push_back(std::pow(10.0, -3.0 + 4.0 * i / (kGrid - 1)));

  // smallest admissible C for a given c; nonincreasing in c
  auto constant_for = [&](double c) {
    double C = 0.0;
    for (const DiagnosticsRow& r : series) C = std::max(C, r.entropy / (1.0 + std::exp(c * r.t)));
    return C;
  };
  const double C_min = constant_for(cs.back());
  EntropyFit fit;
  for (const double c : cs) {
    const double C = constant_for(c);
    if (C <= C_min * (1.0 + 1e-12)) {
      fit.c = c;
      fit.C = C;
      break;
    }
  }
  fit.max_violation = -std::numeric_limits<double>::infinity();
  for (const DiagnosticsRow& r : series) {
    const double env = fit.C * (1.0 + std::exp(fit.c * r.t));
    const double excess = env > 0.0 ? r.entropy / env - 1.0 : (r.entropy > 0.0 ? 1.0 : -1.0);
    fit.max_violation = std::max(fit.max_violation, excess);
  }
  return fit;
}

}  // namespace vbgk
