#include "vbgk/equilibria.hpp"

#include "vbgk/error.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>

namespace vbgk {

namespace {

struct AxisMoments {
  double mass;  // int e^{r(cos-1)} sin^{d-2}
  double m1;    // ... times cos
  double m2;    // ... times cos^2
};

AxisMoments axis_moments(double r, int d) {
  const int n = 64 + 16 * static_cast<int>(std::ceil(std::sqrt(r)));
  const GaussLegendre gl = gauss_legendre(n);
  const double half = 0.5 * std::numbers::pi;
  AxisMoments acc{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double t = half * (gl.nodes[i] + 1.0);
    const double c = std::cos(t);
    const double w = gl.weights[i] * std::exp(r * (c - 1.0)) * std::pow(std::sin(t), d - 2);
    acc.mass += w;
    acc.m1 += w * c;
    acc.m2 += w * c * c;
  }
  return acc;
}

void check_dim(int d) {
  if (d < 2) throw InvalidArgument("dimension d must be >= 2, got " + std::to_string(d));
}

}  // namespace

ConcentrationValue concentration_c_with_derivative(double r, int d) {
  check_dim(d);
  if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidArgument("concentration_c: r must be finite and >= 0");
  const AxisMoments m = axis_moments(r, d);
  const double c = m.m1 / m.mass;
  return {c, m.m2 / m.mass - c * c};
}

double concentration_c(double r, int d) { return concentration_c_with_derivative(r, d).c; }

double asymptotic_l(double mu, int d) {
  check_dim(d);
  if (mu < d) throw InvalidArgument("asymptotic_l: requires mu >= d");
  return std::sqrt((d + 2.0) * (mu - d));
}

double solve_l(double mu, int d, double tol) {
  check_dim(d);
  if (!(tol > 0.0)) throw InvalidArgument("solve_l: tol must be positive");
  if (!std::isfinite(mu)) throw InvalidArgument("solve_l: mu must be finite");
  if (mu <= d) return 0.0;

  auto g = [&](double L) {
    const ConcentrationValue cv = concentration_c_with_derivative(L, d);
    return std::pair{mu * cv.c - L, mu * cv.dc - 1.0};
  };

  // g > 0 on (0, L_mu), g < 0 beyond; c < 1 gives g(mu) < 0.
  double hi = mu;
  double lo = 0.5 * asymptotic_l(mu, d);
  if (lo >= hi) lo = 0.5 * hi;
  int shrink = 0;
  while (g(lo).first <= 0.0) {
    lo *= 0.5;
    if (++shrink > 200) throw NumericalError("solve_l: could not bracket the nontrivial root for mu=" + std::to_string(mu));
  }

  double x = std::min(std::max(asymptotic_l(mu, d), lo), hi);
  for (int iter = 0; iter < 300; ++iter) {
    const auto [gx, dgx] = g(x);
    if (gx > 0.0) lo = x; else hi = x;
    if (std::abs(gx) <= 1e-3 * tol || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    double next = (dgx != 0.0) ? x - gx / dgx : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 2.0 * std::numeric_limits<double>::epsilon() * x) {
      x = next;
      break;
    }
    x = next;
  }
  const double residual = std::abs(g(x).first);
  if (!(residual <= tol)) {
    throw NumericalError("solve_l: residual " + std::to_string(residual) + " above tol for mu=" + std::to_string(mu));
  }
  return x;
}

double branch_l(double mu, int d) {
  static std::mutex mutex;
  static std::map<std::pair<int, double>, double> cache;
  const auto key = std::pair{d, mu};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double L = solve_l(mu, d);
  std::lock_guard lock(mutex);
  cache.emplace(key, L);
  return L;
}

EquilibriumBranch compute_branch(int d, std::span<const double> mus, double tol) {
  EquilibriumBranch branch;
  branch.d = d;
  branch.samples.reserve(mus.size());
  for (const double mu : mus) {
    const double L = solve_l(mu, d, tol);
    const double residual = std::abs(mu * concentration_c(L, d) - L);
    branch.samples.push_back({mu, L, residual});
  }
  return branch;
}

Vec project_to_manifold(double mu, const Vec& J_raw) {
  const int d = static_cast<int>(J_raw.size());
  check_dim(d);
  if (mu <= d) return Vec::Zero(d);
  const double norm = J_raw.norm();
  if (norm == 0.0) {
    throw InvalidArgument("project_to_manifold: J_raw = 0 has no direction (mu > d requires a nonzero mean flux)");
  }
  return branch_l(mu, d) * J_raw / norm;
}

bool on_manifold(double mu, const Vec& J, double tol) {
  const int d = static_cast<int>(J.size());
  const double r = J.norm();
  if (mu <= d) return r <= tol;
  return std::abs(mu * concentration_c(r, d) - r) <= tol && r > 0.0;
}

HomogeneousTrajectory homogeneous_flow(double mu, const Vec& J0, double t_end, double dt) {
  const int d = static_cast<int>(J0.size());
  check_dim(d);
  if (!(dt > 0.0)) throw InvalidArgument("homogeneous_flow: dt must be positive");
  if (!(t_end >= 0.0)) throw InvalidArgument("homogeneous_flow: t_end must be nonnegative");

  HomogeneousTrajectory traj;
  const double L0 = J0.norm();
  traj.direction = L0 > 0.0 ? Vec(J0 / L0) : Vec(Vec::Zero(d));

  auto rhs = [&](double L) { return mu * concentration_c(L, d) - L; };

  const auto steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  traj.times.reserve(static_cast<std::size_t>(steps) + 1);
  traj.L_values.reserve(static_cast<std::size_t>(steps) + 1);
  double t = 0.0;
  double L = L0;
  traj.times.push_back(t);
  traj.L_values.push_back(L);
  for (long s = 0; s < steps; ++s) {
    const double h = std::min(dt, t_end - t);
    if (L0 > 0.0) {
      const double k1 = rhs(L);
      const double k2 = rhs(std::max(0.0, L + 0.5 * h * k1));
      const double k3 = rhs(std::max(0.0, L + 0.5 * h * k2));
      const double k4 = rhs(std::max(0.0, L + h * k3));
      L = std::max(0.0, L + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    }
    t = (s + 1 == steps) ? t_end : t + h;
    traj.times.push_back(t);
    traj.L_values.push_back(L);
  }
  return traj;
}

}  // namespace vbgk
