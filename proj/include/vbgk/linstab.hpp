#pragma once

// Linearization around a homogeneous equilibrium mu M_J, J in S(mu):
// the k = 0 flux-relaxation matrix, the Fourier-Laplace coefficients and
// scalar symbol h(z, k), the axis integrals c_j with their bounds, and
// resolvent solves.

#include "vbgk/kernels.hpp"
#include "vbgk/sphere.hpp"

#include <optional>
#include <vector>

namespace vbgk {

struct FluxMatrix {
  Mat C;  // mu int w (x) grad_J M_J dw - Id
  double mu = 0.0;
  Vec J;
};

// Throws InvalidArgument unless J is on the equilibrium manifold (tolerance 1e-8).
FluxMatrix flux_relaxation_matrix(double mu, const Vec& J, const SphereGrid& grid);

// mu - d - L_mu^2 / mu, the eigenvalue of C_J along J for mu > d.
double lambda_j(double mu, int d);

// Everything needed to evaluate the coefficients at many z for one (mu, J, k).
struct DispersionContext {
  DispersionContext(double mu, Vec J, Vec k, SphereGrid grid);

  double mu;
  Vec J;
  Vec k;
  SphereGrid grid;
  Vec m;        // M_J at the nodes
  Mat grad_m;   // grad_J M_J at the nodes, one column per component
  Vec k_dot_w;  // k . w at the nodes
};

// Grid fine enough for the coefficients at wave vector k and Re z >= re_z_min:
// the pole of 1/(1+z+ik.w) sits at distance ~(1+Re z)/|k| from the real
// angle axis, and M_J needs auto_node_count(|J|) nodes.
SphereGrid dispersion_grid(int d, double k_norm, double re_z_min, double j_norm = 0.0);

DispersionContext make_dispersion_context(double mu, const Vec& J, const Vec& k, double re_z_min);

struct DispersionCoefficients {
  cplx z;
  Vec k;
  cplx a;
  CVec b;
  CVec b_bar;
  CMat A;
  CMat second_moment;  // int w (x) w M_J / (1+z+ik.w) dw
  cplx h;
  double min_singular = 0.0;  // smallest singular value of Id - mu A
};

// Throws SingularSystem when Id - mu A is numerically singular.
DispersionCoefficients dispersion_coefficients(const DispersionContext& ctx, cplx z);
DispersionCoefficients dispersion_coefficients(cplx z, const Vec& k, double mu, const Vec& J, const SphereGrid& grid);

struct AxisCoefficients {
  cplx c0;
  cplx c1;
  cplx c2;
  cplx c1_symmetrized;  // -i|k| int w_1^2 M_0 / ((1+z)^2 + |k|^2 w_1^2)
};

// c_j = int w_1^j M_0 / (1 + z + i|k| w_1) dw by 1D quadrature in the polar angle.
AxisCoefficients axis_coefficients(cplx z, double k_norm, int d);

// h at J = 0: 1 - c0 - mu c1^2 / (1 - mu c2).
cplx symbol_at_rest(const AxisCoefficients& c, double mu);

// phi_2(u) = 1 - (1 + u^2)^{-1/2}.
double phi2(double u);
// d int_{w_1 >= eps} w_1^2 M_0 dw.
double alpha2(int d, double eps);
// Real-part bound function for c_0: Re c_0 <= 1 - phi_0(gamma, d).
// d >= 3: max(0, 1 - c_d pi / gamma) with c_d = 1 / I_{0,d-2}.
// d = 2: max(0, 1 - (2/pi + 1/2) / sqrt(gamma)) from the sqrt(|k|) splitting of the angular integral.
double phi0(double gamma, int d);
// eps with alpha2(d, eps) = 3/8.
double default_bound_eps(int d);

struct BoundBudget {
  double gamma;
  int d;
  double eps;
  double phi0;
  double phi2;    // phi_2(eps * gamma)
  double alpha2;  // alpha_2(d, eps)

  double re_c0_bound() const { return 1.0 - phi0; }
  double abs_c1_bound() const;
  double d_abs_c2_bound() const { return 1.0 - alpha2 * phi2; }
};

BoundBudget bound_budget(double gamma, int d, double eps);

// --- invertibility / symbol sweeps -------------------------------------------

struct SweepPoint {
  cplx z;
  Vec k;
  double min_singular = 0.0;
  double resolvent_norm = 0.0;  // || (Id - mu A)^{-1} ||_2
  double re_h = 0.0;
  bool singular = false;
};

struct SweepReport {
  std::vector<SweepPoint> points;  // ordered by k first, then z as given
  double min_singular = 0.0;
  double max_resolvent_norm = 0.0;
  double min_re_h = 0.0;
  std::size_t singular_count = 0;
  std::size_t below_fifth_count = 0;  // Re h < 1/5
};

// Evaluates Id - mu A and h at every (z, k) pair. Grids are chosen per k by
// dispersion_grid from the smallest Re z in z_grid.
SweepReport invertibility_sweep(double mu, const Vec& J, const std::vector<cplx>& z_grid, const std::vector<Vec>& k_set,
                                Execution exec = Execution::parallel);

// Rectangular z grid: re in [re_min, re_max] with n_re points, im in [-im_max, im_max] with n_im points.
std::vector<cplx> rectangular_z_grid(double re_min, double re_max, int n_re, double im_max, int n_im);

// Nonzero lattice vectors k = gamma k', k' in Z^d, with |k| <= k_max.
std::vector<Vec> lattice_wave_vectors(int d, double gamma, double k_max);

// --- resolvent solve -----------------------------------------------------------

struct FourierLaplaceSolution {
  cplx rho;
  CVec J;
  CVec f;  // f~ at the grid nodes
  cplx h;
  double residual_j = 0.0;    // |J - b rho - mu A J - r_J|
  double residual_rho = 0.0;  // |rho - a rho - mu b_bar . J - r_rho|
};

// Solves the closed (rho~, J~) system for one (z, k) and reconstructs f~.
// f0_hat holds the initial Fourier mode at the context's grid nodes.
FourierLaplaceSolution fl_solve(const DispersionContext& ctx, cplx z, const CVec& f0_hat);

// L^2(S^{d-1}) norm under the grid quadrature.
double l2_norm(const CVec& values, const SphereGrid& grid);

// --- spectral abscissa -------------------------------------------------------

struct SpectralOptions {
  double root_window = 0.5;  // roots searched in Re z >= -root_window
  double re_max = 1.0;
  double grid_step = 0.25;
  double dedup_distance = 1e-6;
};

struct SpectralEstimate {
  double rate = 0.0;      // predicted decay rate, minus the largest candidate real part
  double k0_rate = 0.0;   // contribution of the k = 0 flux/relaxation modes alone
  std::vector<cplx> roots;  // roots of h or det(Id - mu A) found in the window
};

// Candidates: nonzero eigenvalues of C_J, the -1 relaxation of the mean density,
// and roots in Re z >= -root_window of h(z,k) = 0 and det(Id - mu A) = 0
// for 0 < |k| <= k_max, seeded from a coarse z grid and polished by damped Newton.
SpectralEstimate spectral_abscissa(double mu, double gamma, int d, double k_max, const SpectralOptions& options = {});

}  // namespace vbgk
