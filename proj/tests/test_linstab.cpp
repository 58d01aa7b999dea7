#include "oracles.hpp"

#include "vbgk/equilibria.hpp"
#include "vbgk/error.hpp"
#include "vbgk/linstab.hpp"

#include <doctest.h>

#include <random>

using namespace vbgk;

namespace {

Vec equilibrium_flux(double mu, int d) {
  Vec J = Vec::Zero(d);
  if (mu > d) J(0) = branch_l(mu, d);
  return J;
}

}  // namespace

TEST_CASE("flux relaxation matrix below and above the bifurcation") {
  for (int d : {2, 3}) {
    const auto grid = build_sphere_grid(d, 48);
    const FluxMatrix low = flux_relaxation_matrix(0.7 * d, Vec::Zero(d), grid);
    CHECK((low.C - (0.7 - 1.0) * Mat::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-10);

    const double mu = d + 0.5;
    const FluxMatrix high = flux_relaxation_matrix(mu, equilibrium_flux(mu, d), grid);
    CHECK((high.C - high.C.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    const double L = branch_l(mu, d);
    CHECK(high.C(0, 0) == doctest::Approx(mu - d - L * L / mu).epsilon(1e-10));
    CHECK(lambda_j(mu, d) == doctest::Approx(high.C(0, 0)).epsilon(1e-10));
    for (int i = 1; i < d; ++i) CHECK(std::abs(high.C(i, i)) < 1e-10);
  }
  const auto grid = build_sphere_grid(2, 32);
  Vec off(2);
  off << 0.3, 0.0;
  CHECK_THROWS_AS(flux_relaxation_matrix(2.5, off, grid), InvalidArgument);
  CHECK_THROWS_AS(lambda_j(1.5, 2), InvalidArgument);
}

TEST_CASE("second moments of the equilibrium density") {
  for (int d : {2, 3}) {
    const double mu = d + 1.5;
    const auto grid = build_sphere_grid(d, 64);
    const Vec M = von_mises(equilibrium_flux(mu, d), grid);
    const Vec w1 = grid.nodes().col(0);
    const Vec w2 = grid.nodes().col(1);
    CHECK(grid.integrate(Vec(w1.cwiseProduct(w1).cwiseProduct(M))) == doctest::Approx(1.0 - (d - 1) / mu).epsilon(1e-9));
    CHECK(grid.integrate(Vec(w2.cwiseProduct(w2).cwiseProduct(M))) == doctest::Approx(1.0 / mu).epsilon(1e-9));
  }
}

TEST_CASE("axis coefficients match closed forms") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const double k = 60.0 * U(rng);
    const cplx z(-0.5 + 3.0 * U(rng), 80.0 * (U(rng) - 0.5));
    const AxisCoefficients c2 = axis_coefficients(z, k, 2);
    const oracle::AxisC o2 = oracle::axis_c_2d(z, k);
    CHECK(std::abs(c2.c0 - o2.c0) < 1e-11);
    CHECK(std::abs(c2.c1 - o2.c1) < 1e-11);
    CHECK(std::abs(c2.c2 - o2.c2) < 1e-11);
    const AxisCoefficients c3 = axis_coefficients(z, k, 3);
    const oracle::AxisC o3 = oracle::axis_c_3d(z, k);
    CHECK(std::abs(c3.c0 - o3.c0) < 1e-10);
    CHECK(std::abs(c3.c1 - o3.c1) < 1e-10);
    CHECK(std::abs(c3.c2 - o3.c2) < 1e-10);
    // c1 is odd in w_1, so it equals its symmetrized form
    CHECK(std::abs(c2.c1 - c2.c1_symmetrized) < 1e-11);
  }
  CHECK_THROWS_AS(axis_coefficients(cplx(-1.5, 0.0), 1.0, 2), InvalidArgument);
}

TEST_CASE("dispersion symbol at J = 0 reduces to the axis form") {
  for (double mu : {0.5, 1.0, 1.9}) {
    for (double kk : {3.0, 10.0, 30.0}) {
      for (cplx z : {cplx(0.0, 0.0), cplx(0.2, 5.0), cplx(-0.05, -12.0)}) {
        Vec k(2);
        k << kk, 0.0;
        const auto ctx = make_dispersion_context(mu, Vec::Zero(2), k, z.real());
        const DispersionCoefficients dc = dispersion_coefficients(ctx, z);
        const oracle::AxisC o = oracle::axis_c_2d(z, kk);
        const cplx h_ref = 1.0 - o.c0 - mu * o.c1 * o.c1 / (1.0 - mu * o.c2);
        CHECK(std::abs(dc.h - h_ref) < 1e-10);
        CHECK(std::abs(symbol_at_rest(axis_coefficients(z, kk, 2), mu) - h_ref) < 1e-10);
      }
    }
  }
}

TEST_CASE("bound ingredients") {
  for (double e : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    CHECK(alpha2(2, e) == doctest::Approx(oracle::alpha2_2d(e)).epsilon(1e-12));
    CHECK(alpha2(3, e) == doctest::Approx(oracle::alpha2_3d(e)).epsilon(1e-12));
  }
  CHECK(alpha2(2, 0.0) == doctest::Approx(0.5));
  for (int d : {2, 3}) CHECK(alpha2(d, default_bound_eps(d)) == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(phi2(0.0) == 0.0);
  CHECK(phi2(0.75) == doctest::Approx(0.2));
  CHECK(phi0(1e-3, 3) == 0.0);
  CHECK(phi0(100.0, 3) == doctest::Approx(1.0 - std::numbers::pi / (2.0 * 100.0)));
  CHECK(phi0(100.0, 2) == doctest::Approx(1.0 - (2.0 / std::numbers::pi + 0.5) / 10.0));
  const BoundBudget b = bound_budget(10.0, 2, default_bound_eps(2));
  CHECK(b.abs_c1_bound() == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0)) + 0.1));
  CHECK_THROWS_AS(bound_budget(10.0, 2, 0.0), InvalidArgument);
}

TEST_CASE("Fourier-Laplace solve agrees with a dense solve of the discrete system") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N(0.0, 1.0);
  for (double mu : {1.5, 2.3}) {
    const Vec J = equilibrium_flux(mu, 2);
    Vec k(2);
    k << 10.0, -10.0;
    const cplx z(0.1, 7.0);
    const auto ctx = make_dispersion_context(mu, J, k, z.real());
    const std::size_t n = ctx.grid.size();
    CVec f0(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < f0.size(); ++i) f0(i) = cplx(N(rng), N(rng));
    const FourierLaplaceSolution sol = fl_solve(ctx, z, f0);
    CHECK(sol.residual_j < 1e-11);
    CHECK(sol.residual_rho < 1e-11);

    const auto nn = static_cast<Eigen::Index>(n);
    CMat S = CMat::Zero(nn, nn);
    const Vec& w = ctx.grid.weights();
    const Mat& nodes = ctx.grid.nodes();
    for (Eigen::Index i = 0; i < nn; ++i) {
      S(i, i) += 1.0 + z + cplx(0.0, 1.0) * ctx.k_dot_w(i);
      for (Eigen::Index j = 0; j < nn; ++j) {
        S(i, j) -= w(j) * (ctx.m(i) + mu * (ctx.grad_m(i, 0) * nodes(j, 0) + ctx.grad_m(i, 1) * nodes(j, 1)));
      }
    }
    const CVec f_ref = S.partialPivLu().solve(f0);
    CHECK((sol.f - f_ref).norm() / f_ref.norm() < 1e-10);
    CHECK(std::abs(l2_norm(sol.f, ctx.grid) - l2_norm(f_ref, ctx.grid)) < 1e-9 * l2_norm(f_ref, ctx.grid));
  }
}

TEST_CASE("invertibility sweep: serial and parallel paths agree") {
  const auto zs = rectangular_z_grid(-0.05, 1.0, 3, 20.0, 11);
  const auto ks = lattice_wave_vectors(2, 10.0, 20.0);
  CHECK(ks.size() == 12);
  const Vec J = equilibrium_flux(2.05, 2);
  const SweepReport a = invertibility_sweep(2.05, J, zs, ks, Execution::serial);
  const SweepReport b = invertibility_sweep(2.05, J, zs, ks, Execution::parallel);
  REQUIRE(a.points.size() == zs.size() * ks.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].min_singular == b.points[i].min_singular);
    CHECK(a.points[i].re_h == b.points[i].re_h);
  }
  CHECK(a.min_singular > 0.0);
  CHECK(a.min_re_h >= 0.2);
  CHECK_THROWS_AS(invertibility_sweep(1.0, Vec::Zero(2), {}, ks), InvalidArgument);
  CHECK(rectangular_z_grid(0.0, 0.0, 1, 0.0, 1).size() == 1);
}

TEST_CASE("spectral abscissa") {
  const SpectralEstimate low = spectral_abscissa(1.5, 10.0, 2, 20.0);
  CHECK(low.k0_rate == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(low.rate <= low.k0_rate + 1e-12);
  CHECK(low.rate > 0.0);
  const SpectralEstimate high = spectral_abscissa(2.1, 10.0, 2, 20.0);
  CHECK(high.k0_rate == doctest::Approx(-lambda_j(2.1, 2)).epsilon(1e-8));
  CHECK_THROWS_AS(spectral_abscissa(2.0, 10.0, 2, 20.0), InvalidArgument);
}
