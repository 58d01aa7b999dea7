#include "vbgk/equilibria.hpp"
#include "vbgk/error.hpp"
#include "vbgk/io.hpp"
#include "vbgk/kinetic.hpp"
#include "vbgk/linstab.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>

using namespace vbgk;

namespace {

SolverConfig small_config(SolverMode mode, double mu) {
  SolverConfig c;
  c.mode = mode;
  c.mu = mu;
  c.nx = 8;
  c.ntheta = 32;
  c.gamma = 3.0;
  c.init.amplitude = 0.1;
  c.seed = 5;
  return c;
}

// Field constant in x with angular profile mu M_J0.
PhaseField homogeneous_field(const SolverConfig& c, const Vec& J0) {
  PhaseField F(c.nx, c.ntheta, c.gamma);
  const Vec M = von_mises(J0, solver_angles(c.ntheta));
  for (std::size_t i = 0; i < F.values().size(); ++i) {
    F.values()[i] = c.mu * M(static_cast<Eigen::Index>(i % static_cast<std::size_t>(c.ntheta)));
  }
  return F;
}

Vec jbar(const DiagnosticsRow& r) {
  Vec J(2);
  J << r.jbar[0], r.jbar[1];
  return J;
}

}  // namespace

TEST_CASE("regularized flux") {
  Vec J(2);
  J << 0.3, 0.4;
  CHECK((regularized_flux(J, 1.0) - J).norm() == 0.0);
  J << 3.0, 0.0;
  CHECK((regularized_flux(J, 1.0) - Vec::Unit(2, 0)).norm() < 1e-15);
  CHECK(regularized_flux(Vec::Zero(2), 0.5).norm() == 0.0);
  J << -30.0, 40.0;
  const Vec R = regularized_flux(J, 0.1);
  CHECK(R.norm() == doctest::Approx(10.0));
  CHECK(R(0) / R(1) == doctest::Approx(-0.75));
  CHECK_THROWS_AS(regularized_flux(J, 0.0), InvalidArgument);
}

TEST_CASE("initial data") {
  SolverConfig c = small_config(SolverMode::nonlinear, 2.5);
  c.init.amplitude = 0.0;
  const PhaseField eq = init_field(c);
  const Vec M = 2.5 * von_mises(c.reference_flux(), solver_angles(c.ntheta));
  double err = 0.0;
  for (std::size_t i = 0; i < eq.values().size(); ++i) {
    err = std::max(err, std::abs(eq.values()[i] - M(static_cast<Eigen::Index>(i % 32))));
  }
  CHECK(err < 1e-14);

  c.init.kind = InitKind::mode_bump;
  c.init.mode = {1, 0};
  c.init.amplitude = 1e-3;
  CHECK(std::abs(diagnostics(init_field(c), c).mass - 2.5) < 1e-13);

  SolverConfig lin = small_config(SolverMode::linearized, 1.5);
  CHECK(std::abs(diagnostics(init_field(lin), lin).mass) < 1e-13);

  c.init.amplitude = 1.5;
  CHECK_THROWS_AS(init_field(c), InvalidArgument);
  c.init.amplitude = 0.1;
  c.init.mode = {0, 0};
  CHECK_THROWS_AS(init_field(c), InvalidArgument);

  SolverConfig blob = small_config(SolverMode::regularized, 10.0);
  blob.init.kind = InitKind::large_blob;
  blob.init.blob_mass = 6.0;
  const DiagnosticsRow r = diagnostics(init_field(blob), blob);
  CHECK(r.mass == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(r.rho_max > 3.0 * r.rho_min);

  SolverConfig bad = small_config(SolverMode::nonlinear, 2.0);
  bad.dt = 0.0;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("dt"), InvalidArgument);
  bad = small_config(SolverMode::regularized, 2.0);
  bad.eps_reg = 0.0;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("eps_reg"), InvalidArgument);
}

TEST_CASE("spectral transform round trip") {
  const int nx = 16, nt = 12;
  SpectralTransform fft(nx, nt);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(nx * nx * nt));
  for (double& v : x) v = N(rng);
  std::vector<std::complex<double>> s;
  fft.forward(x, s);
  CHECK(s.size() == static_cast<std::size_t>(nx * (nx / 2 + 1) * nt));
  // zero mode of slice j is the spatial sum
  double sum0 = 0.0;
  for (int p = 0; p < nx * nx; ++p) sum0 += x[static_cast<std::size_t>(p * nt)];
  CHECK(s[0].real() == doctest::Approx(sum0).epsilon(1e-13));
  std::vector<double> y;
  fft.inverse(s, y);
  double err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(x[i] - y[i]));
  CHECK(err < 1e-12);
}

TEST_CASE("equilibrium is a fixed point of the step") {
  for (double angle : {0.0, 1.1}) {
    SolverConfig c = small_config(SolverMode::nonlinear, 2.4);
    c.eq_angle = angle;
    c.init.amplitude = 0.0;
    const PhaseField F0 = init_field(c);
    KineticSolver s(c, F0);
    for (int i = 0; i < 50; ++i) s.step();
    double err = 0.0;
    for (std::size_t i = 0; i < F0.values().size(); ++i) err = std::max(err, std::abs(F0.values()[i] - s.field().values()[i]));
    CHECK(err < 1e-11);
    CHECK(s.diagnostics().dist < 1e-10);
    CHECK((jbar(s.diagnostics()) - c.reference_flux()).norm() < 1e-8);
  }
}

TEST_CASE("mass is conserved over 10^4 steps in every mode") {
  for (SolverMode mode : {SolverMode::nonlinear, SolverMode::regularized, SolverMode::linearized}) {
    SolverConfig c = small_config(mode, mode == SolverMode::regularized ? 6.0 : 2.3);
    c.eps_reg = 0.5;
    c.init.kind = InitKind::mode_bump;
    c.init.mode = {1, 2};
    c.init.amplitude = 0.5;
    KineticSolver s(c, Execution::serial);
    const double m0 = s.diagnostics().mass;
    for (int i = 0; i < 10000; ++i) s.step();
    const double m1 = s.diagnostics().mass;
    if (mode == SolverMode::linearized) {
      CHECK(std::abs(m1) < 1e-12);
    } else {
      CHECK(std::abs(m1 - m0) / m0 < 1e-11);
    }
  }
}

TEST_CASE("serial and parallel kernels give identical fields") {
  for (SolverMode mode : {SolverMode::nonlinear, SolverMode::regularized, SolverMode::linearized}) {
    SolverConfig c = small_config(mode, 4.0);
    c.eps_reg = 0.5;
    c.init.amplitude = 1e-3;
    KineticSolver a(c, Execution::serial);
    KineticSolver b(c, Execution::parallel);
    for (int i = 0; i < 20; ++i) {
      a.step();
      b.step();
    }
    CHECK(a.field().values() == b.field().values());
  }
}

TEST_CASE("nonnegativity is preserved for nonnegative data") {
  SolverConfig c = small_config(SolverMode::nonlinear, 2.3);
  c.nx = 16;
  c.init.kind = InitKind::mode_bump;
  c.init.mode = {1, 1};
  c.init.amplitude = 0.9;
  KineticSolver s(c);
  double lowest = 0.0;
  for (int i = 0; i < 300; ++i) {
    s.step();
    for (const double v : s.field().values()) lowest = std::min(lowest, v);
  }
  CHECK(lowest >= -1e-10);
}

TEST_CASE("spatially constant data follows the homogeneous ODE to second order") {
  SolverConfig c = small_config(SolverMode::nonlinear, 2.5);
  c.nx = 4;
  c.ntheta = 64;
  Vec J0(2);
  J0 << 0.05, 0.02;
  const PhaseField F0 = homogeneous_field(c, J0);
  const Vec start = jbar(diagnostics(F0, c));
  const double T = 4.0;
  const auto ode = homogeneous_flow(2.5, start, T, 1e-3);
  const Vec exact = ode.flux_at(ode.times.size() - 1);

  auto run_to = [&](double dt) {
    KineticSolver s(c, F0);
    const long n = std::lround(T / dt);
    for (long i = 0; i < n; ++i) s.step(dt);
    return jbar(s.diagnostics());
  };
  const Vec ref = run_to(0.2 / 8.0);
  double prev = 0.0;
  for (double dt : {0.2, 0.1}) {
    const double err_ode = (run_to(dt) - exact).norm();
    const double err_ref = (run_to(dt) - ref).norm();
    CHECK(err_ode < 5.0 * dt * dt);
    if (prev > 0.0) CHECK(prev / err_ref == doctest::Approx(4.0).epsilon(0.15));
    prev = err_ref;
  }
  // direction is preserved exactly by the flux ODE
  const Vec end = run_to(0.1);
  CHECK(std::abs(end(0) * start(1) - end(1) * start(0)) / (end.norm() * start.norm()) < 1e-13);
}

TEST_CASE("linearized flux follows the k = 0 matrix exponential") {
  SolverConfig c = small_config(SolverMode::linearized, 2.4);
  c.ntheta = 64;
  KineticSolver s(c);
  const Vec J0 = jbar(s.diagnostics());
  const FluxMatrix fm = flux_relaxation_matrix(2.4, c.reference_flux(), solver_angles(64));
  const Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (fm.C + fm.C.transpose()));
  for (int i = 0; i < 300; ++i) s.step();
  const double t = s.time();
  const Vec expected =
      eig.eigenvectors() * (eig.eigenvalues() * t).array().exp().matrix().asDiagonal() * eig.eigenvectors().transpose() * J0;
  CHECK((jbar(s.diagnostics()) - expected).norm() < 1e-10 * std::max(1.0, J0.norm()));
  // the J-perp component is conserved
  CHECK(std::abs(s.diagnostics().jbar[1] - J0(1)) < 1e-12);
}

TEST_CASE("linearized L2 norm does not increase below the bifurcation") {
  SolverConfig c = small_config(SolverMode::linearized, 1.5);
  c.gamma = 10.0;
  c.nx = 16;
  c.init.amplitude = 1.0;
  KineticSolver s(c);
  double prev = s.diagnostics().l2;
  double worst = -1.0;
  for (int i = 0; i < 400; ++i) {
    s.step();
    const double now = s.diagnostics().l2;
    worst = std::max(worst, now - prev);
    prev = now;
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("diagnostics of simple fields") {
  SolverConfig c = small_config(SolverMode::nonlinear, 1.0);
  PhaseField F(c.nx, c.ntheta, c.gamma);
  const double level = 1.0 / (2.0 * std::numbers::pi);
  std::fill(F.values().begin(), F.values().end(), level);
  const DiagnosticsRow r = diagnostics(F, c, 3.0);
  CHECK(r.t == 3.0);
  CHECK(r.mass == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.entropy == doctest::Approx(2.0 * std::numbers::pi * (1.0 / std::numbers::e + level * std::log(level))).epsilon(1e-12));
  CHECK(r.dist < 1e-14);
  CHECK(r.l2 == doctest::Approx(std::sqrt(2.0 * std::numbers::pi) * level).epsilon(1e-14));

  std::fill(F.values().begin(), F.values().end(), 0.0);
  CHECK(diagnostics(F, c).entropy == doctest::Approx(2.0 * std::numbers::pi / std::numbers::e));
}

TEST_CASE("decay fit") {
  DiagnosticsSeries s;
  for (int i = 0; i <= 100; ++i) {
    DiagnosticsRow r;
    r.t = 0.1 * i;
    r.dist = 2.0 * std::exp(-0.3 * r.t);
    r.l2 = 5.0;
    s.push_back(r);
  }
  const DecayFit f = fit_decay_rate(s, 0.0, 10.0);
  CHECK(f.rate == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.points_used == 101);
  const DecayFit g = fit_decay_rate(s, 0.0, 10.0, DecayQuantity::l2);
  CHECK(std::abs(g.rate) < 1e-14);
  CHECK(g.r_squared == 1.0);
  for (auto& r : s) r.dist = 1e-20;
  CHECK_THROWS_AS(fit_decay_rate(s, 0.0, 10.0), InvalidArgument);
}

TEST_CASE("entropy growth fit") {
  DiagnosticsSeries s;
  for (int i = 0; i <= 50; ++i) {
    DiagnosticsRow r;
    r.t = 0.4 * i;
    r.entropy = 7.0;
    s.push_back(r);
  }
  EntropyFit f = fit_entropy_growth(s);
  CHECK(f.c == 0.0);
  CHECK(f.C == doctest::Approx(3.5));
  CHECK(f.max_violation <= 0.0);
  for (auto& r : s) r.entropy = 7.0 * std::exp(-r.t);
  f = fit_entropy_growth(s);
  CHECK(f.max_violation <= 0.0);
  CHECK(f.c == 0.0);
  CHECK(f.C == doctest::Approx(3.5));
  for (auto& r : s) r.entropy = 1.0 + std::exp(0.5 * r.t);
  f = fit_entropy_growth(s);
  CHECK(f.max_violation <= 0.0);
  CHECK(f.C == doctest::Approx(1.0));
  CHECK(f.c >= 0.5);
  CHECK(f.c < 0.6);
}

TEST_CASE("run samples diagnostics and snapshots") {
  SolverConfig c = small_config(SolverMode::nonlinear, 2.2);
  c.t_end = 1.0;
  c.dt = 0.05;
  c.snapshot_every = 4;
  std::vector<double> snap_times;
  RunOptions opt;
  opt.field_snapshot_every = 10;
  opt.on_field_snapshot = [&](double t, const PhaseField&) { snap_times.push_back(t); };
  const RunResult r = run(c, opt);
  CHECK_FALSE(r.aborted);
  CHECK(r.series.size() == 6);
  CHECK(r.series.back().t == doctest::Approx(1.0));
  CHECK(snap_times == std::vector<double>{0.0, 0.5, 1.0});
}

TEST_CASE("non-finite values abort the run") {
  SolverConfig c = small_config(SolverMode::nonlinear, 2.2);
  PhaseField F = init_field(c);
  F.values()[3] = std::numeric_limits<double>::quiet_NaN();
  KineticSolver s(c, F);
  CHECK_THROWS_AS(s.step(), SolverAbort);
  c.t_end = 0.5;
  const RunResult r = run(c, F);
  CHECK(r.aborted);
  CHECK(r.last_valid_time == 0.0);
}

TEST_CASE("snapshot and CSV formats") {
  SolverConfig c = small_config(SolverMode::nonlinear, 2.2);
  const PhaseField F = init_field(c);
  const auto dir = std::filesystem::temp_directory_path() / "vbgk_snapshot_test";
  std::filesystem::create_directories(dir);
  const auto paths = write_snapshot(dir / "f.bin", F, 2.2, 0.5, SolverMode::nonlinear);
  CHECK(std::filesystem::file_size(paths[0]) == F.values().size() * 8);
  const PhaseField G = read_snapshot(paths[0]);
  CHECK(G.values() == F.values());
  CHECK(G.nx() == F.nx());
  std::filesystem::remove_all(dir);

  DiagnosticsSeries s(1);
  s[0].t = 0.1;
  const std::string csv = diagnostics_csv(s);
  CHECK(csv.rfind(std::string(kDiagnosticsHeader) + "\n", 0) == 0);
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
