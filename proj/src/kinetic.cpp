#include "vbgk/kinetic.hpp"

#include "vbgk/equilibria.hpp"
#include "vbgk/error.hpp"
#include "vbgk/linstab.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>
#include <random>

namespace vbgk {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::string to_string(SolverMode mode) {
  switch (mode) {
    case SolverMode::nonlinear: return "nonlinear";
    case SolverMode::linearized: return "linearized";
    case SolverMode::regularized: return "regularized";
  }
  return "unknown";
}

SolverMode solver_mode_from_string(const std::string& name) {
  if (name == "nonlinear") return SolverMode::nonlinear;
  if (name == "linearized") return SolverMode::linearized;
  if (name == "regularized") return SolverMode::regularized;
  throw InvalidArgument("unknown solver mode '" + name + "' (expected nonlinear, linearized or regularized)");
}

std::string to_string(InitKind kind) {
  switch (kind) {
    case InitKind::mode_bump: return "mode-bump";
    case InitKind::random_smooth: return "random-smooth";
    case InitKind::large_blob: return "large-blob";
  }
  return "unknown";
}

InitKind init_kind_from_string(const std::string& name) {
  if (name == "mode-bump") return InitKind::mode_bump;
  if (name == "random-smooth") return InitKind::random_smooth;
  if (name == "large-blob") return InitKind::large_blob;
  throw InvalidArgument("unknown init recipe '" + name + "' (expected mode-bump, random-smooth or large-blob)");
}

void SolverConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) { throw InvalidArgument(key + ": " + why); };
  if (!(mu > 0.0) || !std::isfinite(mu)) fail("mu", "must be positive and finite");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) fail("gamma", "must be positive and finite");
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt", "must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) fail("t_end", "must be nonnegative");
  if (nx < 4 || nx % 2 != 0) fail("nx", "must be an even integer >= 4");
  if (ntheta < 8) fail("ntheta", "must be >= 8");
  if (snapshot_every < 1) fail("snapshot_every", "must be >= 1");
  if (!std::isfinite(eq_angle)) fail("eq_angle", "must be finite");
  if (mode == SolverMode::regularized && !(eps_reg > 0.0)) fail("eps_reg", "must be positive in regularized mode");
  if (!(init.amplitude >= 0.0) || !std::isfinite(init.amplitude)) fail("init.amplitude", "must be nonnegative");
  if (init.kind == InitKind::mode_bump && init.mode[0] == 0 && init.mode[1] == 0) {
    fail("init.mode", "wave vector must be nonzero");
  }
  if (init.kind == InitKind::mode_bump &&
      (std::abs(init.mode[0]) >= nx / 2 || std::abs(init.mode[1]) >= nx / 2)) {
    fail("init.mode", "wave vector is not resolved by nx");
  }
  if (init.kind == InitKind::large_blob) {
    if (mode == SolverMode::linearized) fail("init.kind", "large-blob is a density profile, not a linear perturbation");
    if (!(init.blob_mass > 0.0 && init.blob_mass <= mu)) fail("init.blob_mass", "must lie in (0, mu]");
    if (!(init.blob_width > 0.0)) fail("init.blob_width", "must be positive");
  }
}

Vec SolverConfig::reference_flux() const {
  Vec J = Vec::Zero(2);
  if (mu > 2.0) {
    const double L = branch_l(mu, 2);
    J(0) = L * std::cos(eq_angle);
    J(1) = L * std::sin(eq_angle);
  }
  return J;
}

PhaseField::PhaseField(int nx, int ntheta, double gamma) : nx_(nx), ntheta_(ntheta), gamma_(gamma) {
  if (nx < 1 || ntheta < 1) throw InvalidArgument("PhaseField: nx and ntheta must be positive");
  values_.assign(points() * static_cast<std::size_t>(ntheta), 0.0);
}

// --- FFT ----------------------------------------------------------------------

struct SpectralTransform::Plans {
  int nx = 0;
  int ntheta = 0;
  std::size_t n_real = 0;
  std::size_t n_cplx = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  ~Plans() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
    fftw_free(real);
    fftw_free(spec);
  }
};

SpectralTransform::SpectralTransform(int nx, int ntheta) : plans_(std::make_unique<Plans>()) {
  Plans& p = *plans_;
  p.nx = nx;
  p.ntheta = ntheta;
  const int half = nx / 2 + 1;
  p.n_real = static_cast<std::size_t>(nx) * nx * ntheta;
  p.n_cplx = static_cast<std::size_t>(nx) * half * ntheta;
  p.real = fftw_alloc_real(p.n_real);
  p.spec = fftw_alloc_complex(p.n_cplx);
  if (!p.real || !p.spec) throw NumericalError("SpectralTransform: allocation failed");
  const int dims[2] = {nx, nx};
  const int cdims[2] = {nx, half};
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  p.fwd = fftw_plan_many_dft_r2c(2, dims, ntheta, p.real, dims, ntheta, 1, p.spec, cdims, ntheta, 1, FFTW_ESTIMATE);
  p.inv = fftw_plan_many_dft_c2r(2, dims, ntheta, p.spec, cdims, ntheta, 1, p.real, dims, ntheta, 1, FFTW_ESTIMATE);
  if (!p.fwd || !p.inv) throw NumericalError("SpectralTransform: FFTW planning failed");
}

SpectralTransform::~SpectralTransform() = default;
SpectralTransform::SpectralTransform(SpectralTransform&&) noexcept = default;
SpectralTransform& SpectralTransform::operator=(SpectralTransform&&) noexcept = default;

std::size_t SpectralTransform::spectral_size() const { return plans_->n_cplx; }

void SpectralTransform::forward(const std::vector<double>& physical, std::vector<std::complex<double>>& spectrum) {
  Plans& p = *plans_;
  if (physical.size() != p.n_real) throw InvalidArgument("SpectralTransform::forward: size mismatch");
  std::copy(physical.begin(), physical.end(), p.real);
  fftw_execute(p.fwd);
  spectrum.resize(p.n_cplx);
  std::memcpy(static_cast<void*>(spectrum.data()), p.spec, p.n_cplx * sizeof(fftw_complex));
}

void SpectralTransform::inverse(std::vector<std::complex<double>>& spectrum, std::vector<double>& physical) {
  Plans& p = *plans_;
  if (spectrum.size() != p.n_cplx) throw InvalidArgument("SpectralTransform::inverse: size mismatch");
  std::memcpy(static_cast<void*>(p.spec), spectrum.data(), p.n_cplx * sizeof(fftw_complex));
  fftw_execute(p.inv);
  physical.resize(p.n_real);
  const double scale = 1.0 / (static_cast<double>(p.nx) * p.nx);
  for (std::size_t i = 0; i < p.n_real; ++i) physical[i] = p.real[i] * scale;
}

SphereGrid solver_angles(int ntheta) { return build_sphere_grid(2, ntheta); }

Vec regularized_flux(const Vec& J, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("regularized_flux: eps must be positive");
  const double n = J.norm();
  if (n == 0.0 || n <= 1.0 / eps) return J;
  return J * ((1.0 / eps) / n);
}

// --- initial data -----------------------------------------------------------------

namespace {

int signed_mode(int i, int nx) { return i <= nx / 2 ? i : i - nx; }

double field_mass(const PhaseField& F, const Vec& w) {
  const std::size_t nt = static_cast<std::size_t>(F.ntheta());
  double total = 0.0;
  for (std::size_t p = 0; p < F.points(); ++p) {
    const double* f = F.values().data() + p * nt;
    for (std::size_t j = 0; j < nt; ++j) total += w(static_cast<Eigen::Index>(j)) * f[j];
  }
  return total / static_cast<double>(F.points());
}

// Smooth random function of (x, theta) with |g| <= 1: low Fourier modes |k'_i| <= 2, angular order <= 2.
std::vector<double> random_smooth_profile(int nx, int ntheta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  struct Term {
    int k1, k2, m;
    double a, b;
  };
  std::vector<Term> terms;
  for (int k1 = -2; k1 <= 2; ++k1) {
    for (int k2 = -2; k2 <= 2; ++k2) {
      for (int m = 0; m <= 2; ++m) {
        const double damp = 1.0 / (1.0 + k1 * k1 + k2 * k2 + m * m);
        const double a = coef(rng) * damp;
        const double b = coef(rng) * damp;
        terms.push_back({k1, k2, m, a, b});
      }
    }
  }
  std::vector<double> g(static_cast<std::size_t>(nx) * nx * ntheta);
  double peak = 0.0;
  std::size_t idx = 0;
  for (int i1 = 0; i1 < nx; ++i1) {
    const double x1 = kTwoPi * i1 / nx;
    for (int i2 = 0; i2 < nx; ++i2) {
      const double x2 = kTwoPi * i2 / nx;
      for (int j = 0; j < ntheta; ++j, ++idx) {
        const double th = kTwoPi * j / ntheta;
        double v = 0.0;
        for (const Term& t : terms) {
          const double arg = t.k1 * x1 + t.k2 * x2 + t.m * th;
          v += t.a * std::cos(arg) + t.b * std::sin(arg);
        }
        g[idx] = v;
        peak = std::max(peak, std::abs(v));
      }
    }
  }
  if (peak > 0.0) {
    for (double& v : g) v /= peak;
  }
  return g;
}

}  // namespace

PhaseField init_field(const SolverConfig& config) {
  config.validate();
  const int nx = config.nx;
  const int nt = config.ntheta;
  const SphereGrid grid = solver_angles(nt);
  const Vec& w = grid.weights();
  const Vec J_ref = config.reference_flux();
  const Vec M = von_mises(J_ref, grid);
  const bool linear = config.mode == SolverMode::linearized;
  const double amp = config.init.amplitude;
  const double mu = config.mu;

  PhaseField F(nx, nt, config.gamma);
  auto& v = F.values();
  switch (config.init.kind) {
    case InitKind::mode_bump: {
      const auto [m1, m2] = config.init.mode;
      std::size_t idx = 0;
      for (int i1 = 0; i1 < nx; ++i1) {
        for (int i2 = 0; i2 < nx; ++i2) {
          const double wave = std::cos(kTwoPi * (m1 * i1 + m2 * i2) / nx);
          for (int j = 0; j < nt; ++j, ++idx) {
            const double base = mu * M(j);
            v[idx] = linear ? amp * wave * M(j) : base * (1.0 + amp * wave);
          }
        }
      }
      break;
    }
    case InitKind::random_smooth: {
      const std::vector<double> g = random_smooth_profile(nx, nt, config.seed);
      const double scale = amp * mu / kTwoPi;
      for (std::size_t idx = 0; idx < v.size(); ++idx) {
        const double base = linear ? 0.0 : mu * M(static_cast<Eigen::Index>(idx % static_cast<std::size_t>(nt)));
        v[idx] = base + scale * g[idx];
      }
      break;
    }
    case InitKind::large_blob: {
      const double width = config.init.blob_width;
      std::vector<double> bump(static_cast<std::size_t>(nx) * nx);
      double bump_mean = 0.0;
      for (int i1 = 0; i1 < nx; ++i1) {
        for (int i2 = 0; i2 < nx; ++i2) {
          // periodic distance to the torus centre
          double d1 = std::abs(kTwoPi * i1 / nx - std::numbers::pi);
          double d2 = std::abs(kTwoPi * i2 / nx - std::numbers::pi);
          d1 = std::min(d1, kTwoPi - d1);
          d2 = std::min(d2, kTwoPi - d2);
          const double b = std::exp(-(d1 * d1 + d2 * d2) / (2.0 * width * width));
          bump[static_cast<std::size_t>(i1 * nx + i2)] = b;
          bump_mean += b;
        }
      }
      bump_mean /= static_cast<double>(nx) * nx;
      const double background = mu - config.init.blob_mass;
      const double peak = config.init.blob_mass / bump_mean;
      std::size_t idx = 0;
      for (std::size_t p = 0; p < bump.size(); ++p) {
        const double rho = background + peak * bump[p];
        for (int j = 0; j < nt; ++j, ++idx) v[idx] = rho / kTwoPi;
      }
      break;
    }
  }

  if (linear) {
    // remove the mean so that the total perturbation mass vanishes
    const double shift = field_mass(F, w) / w.sum();
    for (double& x : v) x -= shift;
  } else {
    const double mass = field_mass(F, w);
    if (!(mass > 0.0)) throw InvalidArgument("init: initial datum has nonpositive mass");
    const double scale = mu / mass;
    for (double& x : v) x *= scale;
    const double lowest = *std::min_element(v.begin(), v.end());
    if (lowest < 0.0) {
      throw InvalidArgument("init.amplitude: perturbation makes F negative (min " + std::to_string(lowest) + ")");
    }
  }
  return F;
}

// --- solver -------------------------------------------------------------------------

struct KineticSolver::Impl {
  SolverConfig config;
  Execution exec;
  PhaseField field;
  SpectralTransform fft;
  std::vector<std::complex<double>> spectrum;
  std::vector<double> cos_t, sin_t, weights;
  SphereGrid grid;
  Vec J_ref;

  double phase_dt = -1.0;
  std::vector<std::complex<double>> phases;
  double linear_tau = -1.0;
  LinearCollisionData linear;

  double time = 0.0;
  long steps = 0;

  Impl(const SolverConfig& cfg, PhaseField initial, Execution ex)
      : config(cfg),
        exec(ex),
        field(std::move(initial)),
        fft(cfg.nx, cfg.ntheta),
        grid(solver_angles(cfg.ntheta)),
        J_ref(cfg.reference_flux()) {
    if (field.nx() != cfg.nx || field.ntheta() != cfg.ntheta) {
      throw InvalidArgument("KineticSolver: field shape does not match the configuration");
    }
    const auto n = static_cast<Eigen::Index>(cfg.ntheta);
    cos_t.resize(static_cast<std::size_t>(n));
    sin_t.resize(static_cast<std::size_t>(n));
    weights.resize(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
      cos_t[static_cast<std::size_t>(j)] = grid.nodes()(j, 0);
      sin_t[static_cast<std::size_t>(j)] = grid.nodes()(j, 1);
      weights[static_cast<std::size_t>(j)] = grid.weights()(j);
    }
  }

  AngularTable angles() const { return {cos_t, sin_t, weights}; }

  void build_phases(double dt) {
    const int nx = config.nx;
    const int half = nx / 2 + 1;
    const int nt = config.ntheta;
    const int keep = config.dealias ? nx / 3 : nx / 2 - 1;
    phases.assign(static_cast<std::size_t>(nx) * half * nt, {0.0, 0.0});
    std::size_t idx = 0;
    for (int i1 = 0; i1 < nx; ++i1) {
      const int k1 = signed_mode(i1, nx);
      for (int i2 = 0; i2 < half; ++i2) {
        const int k2 = i2;
        const bool kept = std::abs(k1) <= keep && std::abs(k2) <= keep;
        for (int j = 0; j < nt; ++j, ++idx) {
          if (!kept) continue;
          const double arg =
              -config.gamma * (k1 * cos_t[static_cast<std::size_t>(j)] + k2 * sin_t[static_cast<std::size_t>(j)]) * dt;
          phases[idx] = std::complex<double>(std::cos(arg), std::sin(arg));
        }
      }
    }
    phase_dt = dt;
  }

  void build_linear(double tau) {
    const FluxMatrix fm = flux_relaxation_matrix(config.mu, J_ref, grid);
    const Eigen::Matrix2d C = 0.5 * (fm.C + fm.C.transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(C);
    const Eigen::Vector2d lam = eig.eigenvalues();
    const Eigen::Matrix2d V = eig.eigenvectors();

    auto phi1 = [](double x) { return std::abs(x) < 1e-12 ? 1.0 + 0.5 * x : std::expm1(x) / x; };
    // int_0^tau e^{-(tau-s)} e^{lambda s} ds
    Eigen::Vector2d p;
    for (int i = 0; i < 2; ++i) p(i) = std::exp(-tau) * tau * phi1((1.0 + lam(i)) * tau);
    // int_0^tau e^{-(tau-s)} int_0^s e^{lambda r} dr ds, Gauss-Legendre in s
    const GaussLegendre gl = gauss_legendre(16);
    Eigen::Vector2d q = Eigen::Vector2d::Zero();
    for (std::size_t g = 0; g < gl.nodes.size(); ++g) {
      const double s = 0.5 * tau * (gl.nodes[g] + 1.0);
      const double wt = 0.5 * tau * gl.weights[g] * std::exp(-(tau - s));
      for (int i = 0; i < 2; ++i) q(i) += wt * s * phi1(lam(i) * s);
    }

    linear.m = von_mises(J_ref, grid);
    linear.mu_grad_m = config.mu * grad_j_von_mises(J_ref, grid);
    const Eigen::Vector2d m_first = grid.nodes().transpose() * (grid.weights().array() * linear.m.array()).matrix();
    linear.flux_propagator = V * p.asDiagonal() * V.transpose();
    linear.source_response = V * q.asDiagonal() * V.transpose() * m_first;
    linear.decay = std::exp(-tau);
    linear_tau = tau;
  }

  void collide(double tau) {
    std::span<double> values(field.values());
    if (config.mode == SolverMode::linearized) {
      if (tau != linear_tau) build_linear(tau);
      collide_linear(values, field.points(), angles(), linear, exec);
      return;
    }
    const double eps = config.mode == SolverMode::regularized ? config.eps_reg : 0.0;
    collide_nonlinear(values, field.points(), angles(), tau, eps, exec);
  }

  void transport(double dt) {
    if (dt != phase_dt) build_phases(dt);
    fft.forward(field.values(), spectrum);
    apply_phases(spectrum, phases, exec);
    fft.inverse(spectrum, field.values());
  }

  void check_finite(double t) const {
    double sum = 0.0;
    for (const double x : field.values()) sum += x;
    if (!std::isfinite(sum)) throw SolverAbort("non-finite value in the phase field at t=" + std::to_string(t), t);
  }
};

KineticSolver::KineticSolver(const SolverConfig& config, Execution exec)
    : KineticSolver(config, init_field(config), exec) {}

KineticSolver::KineticSolver(const SolverConfig& config, PhaseField initial, Execution exec) {
  config.validate();
  impl_ = std::make_unique<Impl>(config, std::move(initial), exec);
}

KineticSolver::~KineticSolver() = default;
KineticSolver::KineticSolver(KineticSolver&&) noexcept = default;
KineticSolver& KineticSolver::operator=(KineticSolver&&) noexcept = default;

const SolverConfig& KineticSolver::config() const { return impl_->config; }
const PhaseField& KineticSolver::field() const { return impl_->field; }
double KineticSolver::time() const { return impl_->time; }
long KineticSolver::steps_taken() const { return impl_->steps; }

void KineticSolver::collide(double tau) { impl_->collide(tau); }
void KineticSolver::transport(double dt) { impl_->transport(dt); }

void KineticSolver::step(double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("step: dt must be positive");
  if (impl_->steps == 0) impl_->check_finite(impl_->time);
  impl_->collide(0.5 * dt);
  impl_->transport(dt);
  impl_->collide(0.5 * dt);
  const double t_next = impl_->time + dt;
  impl_->check_finite(t_next);
  impl_->time = t_next;
  ++impl_->steps;
}

void KineticSolver::step() { step(impl_->config.dt); }

DiagnosticsRow KineticSolver::diagnostics() const { return vbgk::diagnostics(impl_->field, impl_->config, impl_->time); }

PhaseField step(const PhaseField& field, double dt, const SolverConfig& config) {
  KineticSolver solver(config, field, Execution::parallel);
  solver.step(dt);
  return solver.field();
}

RunResult run(const SolverConfig& config, const RunOptions& options) { return run(config, init_field(config), options); }

RunResult run(const SolverConfig& config, PhaseField initial, const RunOptions& options) {
  KineticSolver solver(config, std::move(initial), options.exec);
  RunResult result;
  const long n_steps = std::lround(config.t_end / config.dt);
  result.series.push_back(solver.diagnostics());
  if (options.on_field_snapshot) options.on_field_snapshot(0.0, solver.field());
  for (long s = 1; s <= n_steps; ++s) {
    try {
      solver.step(config.dt);
    } catch (const SolverAbort& e) {
      result.aborted = true;
      result.abort_message = e.what();
      return result;
    }
    const double t = static_cast<double>(s) * config.dt;
    result.last_valid_time = t;
    if (s % config.snapshot_every == 0 || s == n_steps) {
      DiagnosticsRow row = diagnostics(solver.field(), config, t);
      result.series.push_back(row);
    }
    const bool periodic = options.field_snapshot_every > 0 && s % options.field_snapshot_every == 0;
    if (options.on_field_snapshot && (periodic || s == n_steps)) options.on_field_snapshot(t, solver.field());
  }
  return result;
}

}  // namespace vbgk
