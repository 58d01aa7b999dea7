#include "vbgk/linstab.hpp"

#include "vbgk/equilibria.hpp"
#include "vbgk/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace vbgk {

namespace {

constexpr cplx kI{0.0, 1.0};

void check_same_dim(const Vec& a, int d, const char* what) {
  if (a.size() != d) {
    throw InvalidArgument(std::string(what) + " has dimension " + std::to_string(a.size()) + ", expected " +
                          std::to_string(d));
  }
}

}  // namespace

FluxMatrix flux_relaxation_matrix(double mu, const Vec& J, const SphereGrid& grid) {
  const int d = grid.dim();
  check_same_dim(J, d, "flux_relaxation_matrix: J");
  if (!on_manifold(mu, J, 1e-8)) {
    throw InvalidArgument("flux_relaxation_matrix: J is not on the equilibrium manifold S(mu) for mu=" +
                          std::to_string(mu));
  }
  const Mat grad = grad_j_von_mises(J, grid);
  const Mat weighted_nodes = grid.weights().asDiagonal() * grid.nodes();
  Mat C = mu * weighted_nodes.transpose() * grad - Mat::Identity(d, d);
  return {std::move(C), mu, J};
}

double lambda_j(double mu, int d) {
  if (!(mu > d)) throw InvalidArgument("lambda_j: requires mu > d");
  const double L = branch_l(mu, d);
  return mu - d - L * L / mu;
}

// --- coefficients ------------------------------------------------------------

DispersionContext::DispersionContext(double mu_, Vec J_, Vec k_, SphereGrid grid_)
    : mu(mu_), J(std::move(J_)), k(std::move(k_)), grid(std::move(grid_)) {
  check_same_dim(J, grid.dim(), "DispersionContext: J");
  check_same_dim(k, grid.dim(), "DispersionContext: k");
  m = von_mises(J, grid);
  grad_m = grad_j_von_mises(J, grid);
  k_dot_w = grid.nodes() * k;
}

SphereGrid dispersion_grid(int d, double k_norm, double re_z_min, double j_norm) {
  const double base = 1.0 + re_z_min;
  if (!(base > 0.0)) throw InvalidArgument("dispersion_grid: requires Re z > -1");
  const double resolve = std::ceil(40.0 * k_norm / base);
  if (d == 2) {
    const int n = std::max(auto_node_count(j_norm), static_cast<int>(resolve) + 64);
    return build_sphere_grid(2, n);
  }
  if (d == 3) {
    const int n = std::max(auto_node_count(j_norm) / 2, static_cast<int>(std::ceil(0.5 * resolve)) + 32);
    return build_sphere_grid(3, n);
  }
  throw InvalidArgument("dispersion_grid: unsupported dimension d=" + std::to_string(d));
}

DispersionContext make_dispersion_context(double mu, const Vec& J, const Vec& k, double re_z_min) {
  const int d = static_cast<int>(J.size());
  return DispersionContext(mu, J, k, dispersion_grid(d, k.norm(), re_z_min, J.norm()));
}

DispersionCoefficients dispersion_coefficients(const DispersionContext& ctx, cplx z) {
  const int d = ctx.grid.dim();
  const auto n = static_cast<Eigen::Index>(ctx.grid.size());
  const Vec& w = ctx.grid.weights();
  const Mat& nodes = ctx.grid.nodes();

  DispersionCoefficients out;
  out.z = z;
  out.k = ctx.k;
  cplx a{0.0, 0.0};
  CVec b = CVec::Zero(d);
  CVec b_bar = CVec::Zero(d);
  CMat A = CMat::Zero(d, d);
  CMat S = CMat::Zero(d, d);
  const cplx shift = 1.0 + z;
  for (Eigen::Index i = 0; i < n; ++i) {
    const cplx inv = w(i) / (shift + kI * ctx.k_dot_w(i));
    const cplx im = inv * ctx.m(i);
    a += im;
    for (int p = 0; p < d; ++p) {
      const double wp = nodes(i, p);
      b(p) += im * wp;
      b_bar(p) += inv * ctx.grad_m(i, p);
      for (int q = 0; q < d; ++q) {
        S(p, q) += im * wp * nodes(i, q);
        A(p, q) += inv * wp * ctx.grad_m(i, q);
      }
    }
  }

  const CMat system = CMat::Identity(d, d) - ctx.mu * A;
  Eigen::JacobiSVD<CMat> svd(system);
  const auto& sv = svd.singularValues();
  out.min_singular = sv(sv.size() - 1);
  if (!(out.min_singular > 1e-13 * std::max(1.0, sv(0)))) {
    throw SingularSystem("Id - mu A is singular at z=(" + std::to_string(z.real()) + "," + std::to_string(z.imag()) +
                             "), smallest singular value " + std::to_string(out.min_singular),
                         out.min_singular);
  }
  const CVec x = system.partialPivLu().solve(b);
  out.h = 1.0 - a - ctx.mu * (b_bar.transpose() * x)(0);
  out.a = a;
  out.b = std::move(b);
  out.b_bar = std::move(b_bar);
  out.A = std::move(A);
  out.second_moment = std::move(S);
  return out;
}

DispersionCoefficients dispersion_coefficients(cplx z, const Vec& k, double mu, const Vec& J, const SphereGrid& grid) {
  return dispersion_coefficients(DispersionContext(mu, J, k, grid), z);
}

// --- axis coefficients and bounds ----------------------------------------------

AxisCoefficients axis_coefficients(cplx z, double k_norm, int d) {
  if (d < 2) throw InvalidArgument("axis_coefficients: d must be >= 2");
  if (!(k_norm >= 0.0)) throw InvalidArgument("axis_coefficients: |k| must be nonnegative");
  const double base = 1.0 + z.real();
  if (!(base > 0.0)) throw InvalidArgument("axis_coefficients: requires Re z > -1");

  const cplx shift = 1.0 + z;
  const cplx shift_sq = shift * shift;
  const double k2 = k_norm * k_norm;
  AxisCoefficients c{};
  cplx sym{0.0, 0.0};
  auto accumulate = [&](double weight, double w1) {
    const cplx inv = weight / (shift + kI * k_norm * w1);
    c.c0 += inv;
    c.c1 += inv * w1;
    c.c2 += inv * w1 * w1;
    sym += weight * w1 * w1 / (shift_sq + k2 * w1 * w1);
  };

  if (d == 2) {
    // periodic trapezoid in the angle; M_0 dw = dtheta / (2 pi)
    const int n = 64 + static_cast<int>(std::ceil(40.0 * k_norm / base));
    for (int j = 0; j < n; ++j) accumulate(1.0 / n, std::cos(2.0 * std::numbers::pi * j / n));
  } else {
    const int n = 64 + static_cast<int>(std::ceil(60.0 * k_norm / base));
    const GaussLegendre gl = gauss_legendre(n);
    const double half = 0.5 * std::numbers::pi;
    const double norm = axis_integral_recursive(0, d - 2);
    for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
      const double t = half * (gl.nodes[j] + 1.0);
      accumulate(half * gl.weights[j] * std::pow(std::sin(t), d - 2) / norm, std::cos(t));
    }
  }
  c.c1_symmetrized = -kI * k_norm * sym;
  return c;
}

cplx symbol_at_rest(const AxisCoefficients& c, double mu) { return 1.0 - c.c0 - mu * c.c1 * c.c1 / (1.0 - mu * c.c2); }

double phi2(double u) { return 1.0 - 1.0 / std::sqrt(1.0 + u * u); }

double alpha2(int d, double eps) {
  if (d < 2) throw InvalidArgument("alpha2: d must be >= 2");
  if (!(eps >= 0.0 && eps <= 1.0)) throw InvalidArgument("alpha2: eps must lie in [0, 1]");
  const double theta_eps = std::acos(eps);
  const GaussLegendre gl = gauss_legendre(64);
  const double half = 0.5 * theta_eps;
  double sum = 0.0;
  for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
    const double t = half * (gl.nodes[j] + 1.0);
    const double c = std::cos(t);
    sum += gl.weights[j] * c * c * std::pow(std::sin(t), d - 2);
  }
  return d * half * sum / axis_integral_recursive(0, d - 2);
}

double phi0(double gamma, int d) {
  if (!(gamma > 0.0)) throw InvalidArgument("phi0: gamma must be positive");
  if (d == 2) return std::max(0.0, 1.0 - (2.0 / std::numbers::pi + 0.5) / std::sqrt(gamma));
  if (d < 2) throw InvalidArgument("phi0: d must be >= 2");
  const double c_d = 1.0 / axis_integral_recursive(0, d - 2);
  return std::max(0.0, 1.0 - c_d * std::numbers::pi / gamma);
}

double default_bound_eps(int d) {
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (alpha2(d, mid) > 0.375) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double BoundBudget::abs_c1_bound() const { return 1.0 / (2.0 * std::sqrt(static_cast<double>(d))) + 1.0 / gamma; }

BoundBudget bound_budget(double gamma, int d, double eps) {
  if (!(gamma > 0.0)) throw InvalidArgument("bound_budget: gamma must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("bound_budget: eps must lie in (0, 1)");
  return BoundBudget{gamma, d, eps, phi0(gamma, d), phi2(eps * gamma), alpha2(d, eps)};
}

// --- resolvent solve -----------------------------------------------------------

double l2_norm(const CVec& values, const SphereGrid& grid) {
  if (static_cast<std::size_t>(values.size()) != grid.size()) throw InvalidArgument("l2_norm: length mismatch");
  return std::sqrt((grid.weights().array() * values.array().abs2()).sum());
}

FourierLaplaceSolution fl_solve(const DispersionContext& ctx, cplx z, const CVec& f0_hat) {
  if (static_cast<std::size_t>(f0_hat.size()) != ctx.grid.size()) {
    throw InvalidArgument("fl_solve: initial mode has " + std::to_string(f0_hat.size()) + " values, grid has " +
                          std::to_string(ctx.grid.size()));
  }
  const int d = ctx.grid.dim();
  const DispersionCoefficients c = dispersion_coefficients(ctx, z);

  const CVec den = ((1.0 + z) + kI * ctx.k_dot_w.array().cast<cplx>()).matrix();
  const CVec weighted = (ctx.grid.weights().array().cast<cplx>() * f0_hat.array() / den.array()).matrix();
  const cplx r_rho = weighted.sum();
  const CVec r_j = ctx.grid.nodes().transpose().cast<cplx>() * weighted;

  const CMat system = CMat::Identity(d, d) - ctx.mu * c.A;
  const auto lu = system.partialPivLu();
  const CVec x_r = lu.solve(r_j);
  const CVec x_b = lu.solve(c.b);
  if (std::abs(c.h) < 1e-13) {
    throw DispersionRoot("fl_solve: h(z,k) vanishes; z is a dispersion root", std::abs(c.h));
  }

  FourierLaplaceSolution sol;
  sol.h = c.h;
  sol.rho = (r_rho + ctx.mu * (c.b_bar.transpose() * x_r)(0)) / c.h;
  sol.J = x_b * sol.rho + x_r;
  sol.residual_j = (sol.J - c.b * sol.rho - ctx.mu * c.A * sol.J - r_j).norm();
  sol.residual_rho = std::abs(sol.rho - c.a * sol.rho - ctx.mu * (c.b_bar.transpose() * sol.J)(0) - r_rho);
  const CVec numer = sol.rho * ctx.m.cast<cplx>() + ctx.mu * ctx.grad_m.cast<cplx>() * sol.J + f0_hat;
  sol.f = (numer.array() / den.array()).matrix();
  return sol;
}

}  // namespace vbgk
