#pragma once

// Time-domain solver for the Vicsek-BGK equation on T^2 x S^1:
//
//   dF/dt + gamma w . grad_x F = rho_F M_{J_F} - F
//
// in nonlinear, linearized and flux-clamped (regularized) form. The torus is
// [0, 2 pi)^2 with normalized measure, so spatial integrals are means over the
// grid and a homogeneous equilibrium mu M_J carries total mass mu.
//
// Time stepping is Strang splitting: half collision step, exact spectral
// transport over dt, half collision step.

#include "vbgk/kernels.hpp"
#include "vbgk/sphere.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vbgk {

enum class SolverMode { nonlinear, linearized, regularized };

std::string to_string(SolverMode mode);
SolverMode solver_mode_from_string(const std::string& name);

enum class InitKind { mode_bump, random_smooth, large_blob };

std::string to_string(InitKind kind);
InitKind init_kind_from_string(const std::string& name);

struct InitRecipe {
  InitKind kind = InitKind::random_smooth;
  std::array<int, 2> mode{1, 0};  // integer wave vector of the bump; physical k = gamma * mode
  double amplitude = 1e-3;
  double blob_mass = 1.0;   // mass carried by the blob, rest is uniform background
  double blob_width = 1.0;  // Gaussian width in torus units ([0, 2 pi) per axis)
};

struct SolverConfig {
  SolverMode mode = SolverMode::nonlinear;
  double mu = 2.2;
  double gamma = 10.0;
  double dt = 0.01;
  double t_end = 10.0;
  int nx = 32;
  int ntheta = 64;
  InitRecipe init;
  int snapshot_every = 10;  // diagnostics row every this many steps
  std::uint64_t seed = 0;
  double eq_angle = 0.0;  // direction of the reference equilibrium flux
  double eps_reg = 0.1;   // clamp |J| <= 1/eps_reg in regularized mode
  bool dealias = true;    // 2/3-rule truncation in the transport step

  // Throws InvalidArgument naming the first offending field.
  void validate() const;
  // Reference equilibrium flux: L_mu (cos, sin)(eq_angle) for mu > 2, zero otherwise.
  Vec reference_flux() const;
};

class PhaseField {
 public:
  PhaseField(int nx, int ntheta, double gamma);

  int nx() const { return nx_; }
  int ntheta() const { return ntheta_; }
  double gamma() const { return gamma_; }
  std::size_t points() const { return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(nx_); }

  // Row-major (x1, x2, theta).
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double& at(int i1, int i2, int j) { return values_[index(i1, i2, j)]; }
  double at(int i1, int i2, int j) const { return values_[index(i1, i2, j)]; }

 private:
  std::size_t index(int i1, int i2, int j) const {
    return (static_cast<std::size_t>(i1) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i2)) *
               static_cast<std::size_t>(ntheta_) +
           static_cast<std::size_t>(j);
  }

  int nx_;
  int ntheta_;
  double gamma_;
  std::vector<double> values_;
};

// Spectral representation: for each theta, the r2c transform of the nx x nx slice,
// stored as [k1][k2][theta] with k2 in [0, nx/2]. Unnormalized forward transform.
class SpectralTransform {
 public:
  SpectralTransform(int nx, int ntheta);
  ~SpectralTransform();
  SpectralTransform(const SpectralTransform&) = delete;
  SpectralTransform& operator=(const SpectralTransform&) = delete;
  SpectralTransform(SpectralTransform&&) noexcept;
  SpectralTransform& operator=(SpectralTransform&&) noexcept;

  std::size_t spectral_size() const;
  void forward(const std::vector<double>& physical, std::vector<std::complex<double>>& spectrum);
  // Divides by nx^2, so inverse(forward(F)) == F.
  void inverse(std::vector<std::complex<double>>& spectrum, std::vector<double>& physical);

 private:
  struct Plans;
  std::unique_ptr<Plans> plans_;
};

// Angular grid on S^1 used by the solver (equispaced, trapezoid weights).
SphereGrid solver_angles(int ntheta);

// Builds the initial datum described by config.init around mu M_J, J = reference_flux().
// Nonlinear/regularized data are rescaled to total mass mu exactly; linearized data
// to zero total mass. Throws InvalidArgument if the recipe produces F < 0 where F must
// be a density.
PhaseField init_field(const SolverConfig& config);

// J^eps = J/|J| min(|J|, 1/eps); zero maps to zero.
Vec regularized_flux(const Vec& J, double eps);

struct DiagnosticsRow {
  double t = 0.0;
  double mass = 0.0;
  std::array<double, 2> jbar{0.0, 0.0};
  double l2 = 0.0;
  double entropy = 0.0;
  double dist = 0.0;
  double rho_min = 0.0;
  double rho_max = 0.0;
};

using DiagnosticsSeries = std::vector<DiagnosticsRow>;

// One diagnostics row at time t. dist is the L^2 distance to the equilibrium set:
// nonlinear/regularized modes minimize ||F - mu M_J|| over J in S(mu); linearized mode
// measures ||f - f_inf|| with f_inf = mu (P_perp Jbar_f) . grad_J M_J (zero for mu <= 2).
DiagnosticsRow diagnostics(const PhaseField& field, const SolverConfig& config, double t = 0.0);

class KineticSolver {
 public:
  explicit KineticSolver(const SolverConfig& config, Execution exec = Execution::parallel);
  KineticSolver(const SolverConfig& config, PhaseField initial, Execution exec = Execution::parallel);
  ~KineticSolver();
  KineticSolver(KineticSolver&&) noexcept;
  KineticSolver& operator=(KineticSolver&&) noexcept;

  const SolverConfig& config() const;
  const PhaseField& field() const;
  double time() const;
  long steps_taken() const;

  // One Strang step of length dt. Throws SolverAbort on non-finite values.
  void step(double dt);
  void step();

  // Split-step pieces, exposed for testing.
  void collide(double tau);
  void transport(double dt);

  DiagnosticsRow diagnostics() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Single step on a copy of F.
PhaseField step(const PhaseField& field, double dt, const SolverConfig& config);

struct RunOptions {
  Execution exec = Execution::parallel;
  int field_snapshot_every = 0;  // 0: only the initial and final field
  std::function<void(double t, const PhaseField&)> on_field_snapshot;
};

struct RunResult {
  DiagnosticsSeries series;
  bool aborted = false;
  std::string abort_message;
  double last_valid_time = 0.0;
};

RunResult run(const SolverConfig& config, const RunOptions& options = {});
RunResult run(const SolverConfig& config, PhaseField initial, const RunOptions& options = {});

enum class DecayQuantity { dist, l2 };

struct DecayFit {
  double rate = 0.0;
  double r_squared = 0.0;
  std::size_t points_used = 0;
};

// Least-squares slope of log(quantity) against t on [t_min, t_max]; rows whose value
// falls below 1e3 * machine epsilon are dropped.
DecayFit fit_decay_rate(const DiagnosticsSeries& series, double t_min, double t_max,
                        DecayQuantity quantity = DecayQuantity::dist);

struct EntropyFit {
  double c = 0.0;
  double C = 0.0;
  double max_violation = 0.0;  // max_t entropy / (C (1 + e^{ct})) - 1, <= 0 when the bound holds
};

// Envelope C (1 + e^{ct}) with c on {0} and a log grid in [1e-3, 10]. C is the
// smallest constant reachable on the grid (for series starting at t = 0 this is
// entropy(0)/2) and c the smallest grid value that reaches it.
EntropyFit fit_entropy_growth(const DiagnosticsSeries& series);

}  // namespace vbgk
