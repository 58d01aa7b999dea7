#pragma once

// Order parameter c(r), the bifurcation branch mu -> L_mu of L = mu c(L),
// and the spatially homogeneous flux dynamics.

#include "vbgk/sphere.hpp"

#include <span>
#include <vector>

namespace vbgk {

inline constexpr double kDefaultBranchTol = 1e-12;

// c(r) = <cos t> under the weight exp(r cos t) sin^{d-2} t on [0, pi].
double concentration_c(double r, int d);

struct ConcentrationValue {
  double c;
  double dc;  // c'(r) = <cos^2> - <cos>^2
};
ConcentrationValue concentration_c_with_derivative(double r, int d);

// Nontrivial root of L = mu c(L). Returns 0 for mu <= d without solving.
// Throws NumericalError if the safeguarded Newton iteration does not reach tol.
double solve_l(double mu, int d, double tol = kDefaultBranchTol);

// Memoized solve_l at the default tolerance. Safe for concurrent callers.
double branch_l(double mu, int d);

// sqrt((d+2)(mu-d)), the leading term of L_mu near the bifurcation point.
double asymptotic_l(double mu, int d);

struct BranchSample {
  double mu;
  double L;
  double residual;  // |mu c(L) - L|
};

struct EquilibriumBranch {
  int d = 2;
  std::vector<BranchSample> samples;
};

EquilibriumBranch compute_branch(int d, std::span<const double> mus, double tol = kDefaultBranchTol);

// L_mu J/|J| for mu > d, zero for mu <= d. J = 0 with mu > d throws InvalidArgument.
Vec project_to_manifold(double mu, const Vec& J_raw);

// True if J lies in S(mu) within tol (|mu c(|J|) - |J|| <= tol, or J = 0 when mu <= d).
bool on_manifold(double mu, const Vec& J, double tol = 1e-8);

struct HomogeneousTrajectory {
  std::vector<double> times;
  std::vector<double> L_values;
  Vec direction;  // J0/|J0|, zero vector when J0 = 0

  Vec flux_at(std::size_t i) const { return L_values[i] * direction; }
};

// Classical RK4 on dL/dt = mu c(L) - L with L(0) = |J0|; every step is recorded.
HomogeneousTrajectory homogeneous_flow(double mu, const Vec& J0, double t_end, double dt = 1e-2);

}  // namespace vbgk
