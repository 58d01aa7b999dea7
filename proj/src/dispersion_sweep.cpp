#include "vbgk/equilibria.hpp"
#include "vbgk/error.hpp"
#include "vbgk/linstab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>

namespace vbgk {

std::vector<cplx> rectangular_z_grid(double re_min, double re_max, int n_re, double im_max, int n_im) {
  if (n_re < 1 || n_im < 1) throw InvalidArgument("rectangular_z_grid: counts must be >= 1");
  std::vector<cplx> grid;
  grid.reserve(static_cast<std::size_t>(n_re) * static_cast<std::size_t>(n_im));
  for (int i = 0; i < n_re; ++i) {
    const double re = n_re == 1 ? re_min : re_min + (re_max - re_min) * i / (n_re - 1);
    for (int j = 0; j < n_im; ++j) {
      const double im = n_im == 1 ? 0.0 : -im_max + 2.0 * im_max * j / (n_im - 1);
      grid.emplace_back(re, im);
    }
  }
  return grid;
}

std::vector<Vec> lattice_wave_vectors(int d, double gamma, double k_max) {
  if (d != 2 && d != 3) throw InvalidArgument("lattice_wave_vectors: d must be 2 or 3");
  if (!(gamma > 0.0)) throw InvalidArgument("lattice_wave_vectors: gamma must be positive");
  const int r = static_cast<int>(std::floor(k_max / gamma + 1e-12));
  const double r2 = (k_max / gamma) * (k_max / gamma) * (1.0 + 1e-12);
  std::vector<Vec> out;
  const int rz = d == 3 ? r : 0;
  for (int i = -r; i <= r; ++i) {
    for (int j = -r; j <= r; ++j) {
      for (int l = -rz; l <= rz; ++l) {
        const double n2 = static_cast<double>(i * i + j * j + l * l);
        if (n2 == 0.0 || n2 > r2) continue;
        Vec k(d);
        k(0) = gamma * i;
        k(1) = gamma * j;
        if (d == 3) k(2) = gamma * l;
        out.push_back(std::move(k));
      }
    }
  }
  return out;
}

namespace {

SweepPoint evaluate_point(const DispersionContext& ctx, cplx z) {
  SweepPoint p;
  p.z = z;
  p.k = ctx.k;
  try {
    const DispersionCoefficients c = dispersion_coefficients(ctx, z);
    p.min_singular = c.min_singular;
    p.resolvent_norm = 1.0 / c.min_singular;
    p.re_h = c.h.real();
  } catch (const SingularSystem& e) {
    p.singular = true;
    p.min_singular = e.min_singular();
    p.resolvent_norm = std::numeric_limits<double>::infinity();
    p.re_h = std::numeric_limits<double>::quiet_NaN();
  }
  return p;
}

}  // namespace

SweepReport invertibility_sweep(double mu, const Vec& J, const std::vector<cplx>& z_grid, const std::vector<Vec>& k_set,
                                Execution exec) {
  if (z_grid.empty() || k_set.empty()) throw InvalidArgument("invertibility_sweep: empty z grid or k set");
  double re_min = std::numeric_limits<double>::infinity();
  for (const cplx z : z_grid) re_min = std::min(re_min, z.real());
  for (const Vec& k : k_set) {
    if (k.norm() == 0.0) throw InvalidArgument("invertibility_sweep: k = 0 is excluded");
  }

  std::vector<std::unique_ptr<DispersionContext>> contexts(k_set.size());
  for (std::size_t i = 0; i < k_set.size(); ++i) {
    contexts[i] = std::make_unique<DispersionContext>(make_dispersion_context(mu, J, k_set[i], re_min));
  }

  const std::size_t nz = z_grid.size();
  const auto total = static_cast<long long>(nz * k_set.size());
  SweepReport report;
  report.points.resize(static_cast<std::size_t>(total));
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 64)
    for (long long idx = 0; idx < total; ++idx) {
      const auto u = static_cast<std::size_t>(idx);
      report.points[u] = evaluate_point(*contexts[u / nz], z_grid[u % nz]);
    }
  } else {
    for (long long idx = 0; idx < total; ++idx) {
      const auto u = static_cast<std::size_t>(idx);
      report.points[u] = evaluate_point(*contexts[u / nz], z_grid[u % nz]);
    }
  }

  report.min_singular = std::numeric_limits<double>::infinity();
  report.min_re_h = std::numeric_limits<double>::infinity();
  for (const SweepPoint& p : report.points) {
    report.min_singular = std::min(report.min_singular, p.min_singular);
    report.max_resolvent_norm = std::max(report.max_resolvent_norm, p.resolvent_norm);
    if (p.singular) {
      ++report.singular_count;
      continue;
    }
    report.min_re_h = std::min(report.min_re_h, p.re_h);
    if (p.re_h < 0.2) ++report.below_fifth_count;
  }
  return report;
}

// --- spectral abscissa -------------------------------------------------------

namespace {

enum class RootTarget { symbol, determinant };

std::optional<cplx> evaluate_target(const DispersionContext& ctx, cplx z, RootTarget target) {
  if (target == RootTarget::symbol) {
    try {
      return dispersion_coefficients(ctx, z).h;
    } catch (const SingularSystem&) {
      return std::nullopt;
    }
  }
  const int d = ctx.grid.dim();
  // determinant only needs A; reuse the coefficient pass but tolerate singularity
  const cplx shift = 1.0 + z;
  CMat A = CMat::Zero(d, d);
  const Mat& nodes = ctx.grid.nodes();
  for (Eigen::Index i = 0; i < ctx.k_dot_w.size(); ++i) {
    const cplx inv = ctx.grid.weights()(i) / (shift + cplx(0.0, 1.0) * ctx.k_dot_w(i));
    for (int p = 0; p < d; ++p) {
      for (int q = 0; q < d; ++q) A(p, q) += inv * nodes(i, p) * ctx.grad_m(i, q);
    }
  }
  return (CMat::Identity(d, d) - ctx.mu * A).determinant();
}

std::optional<cplx> newton_polish(const DispersionContext& ctx, cplx z, RootTarget target, double re_floor) {
  auto value = [&](cplx x) { return evaluate_target(ctx, x, target); };
  std::optional<cplx> fz = value(z);
  if (!fz) return std::nullopt;
  for (int iter = 0; iter < 60; ++iter) {
    const double eta = 1e-6 * std::max(1.0, std::abs(z));
    const auto fp = value(z + eta);
    const auto fm = value(z - eta);
    if (!fp || !fm) return std::nullopt;
    const cplx deriv = (*fp - *fm) / (2.0 * eta);
    if (std::abs(deriv) == 0.0) return std::nullopt;
    cplx step = *fz / deriv;
    bool improved = false;
    for (int damp = 0; damp < 30; ++damp) {
      const cplx trial = z - step;
      if (trial.real() <= -1.0 + 1e-3) {
        step *= 0.5;
        continue;
      }
      const auto ft = value(trial);
      if (ft && std::abs(*ft) < std::abs(*fz)) {
        z = trial;
        fz = ft;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
    if (std::abs(step) < 1e-13 * std::max(1.0, std::abs(z)) || std::abs(*fz) < 1e-13) break;
  }
  if (std::abs(*fz) > 1e-9 || z.real() < re_floor) return std::nullopt;
  return z;
}

std::vector<cplx> roots_for_k(const DispersionContext& ctx, const SpectralOptions& opt) {
  const double re_lo = -opt.root_window;
  const double im_max = ctx.k.norm() + 2.0;
  const int n_re = std::max(2, static_cast<int>(std::round((opt.re_max - re_lo) / opt.grid_step)) + 1);
  const int n_im = std::max(2, static_cast<int>(std::round(2.0 * im_max / opt.grid_step)) + 1);
  std::vector<cplx> found;
  for (const RootTarget target : {RootTarget::symbol, RootTarget::determinant}) {
    std::vector<double> mag(static_cast<std::size_t>(n_re * n_im), std::numeric_limits<double>::infinity());
    auto at = [&](int i, int j) -> double& { return mag[static_cast<std::size_t>(i * n_im + j)]; };
    auto z_of = [&](int i, int j) {
      return cplx(re_lo + (opt.re_max - re_lo) * i / (n_re - 1), -im_max + 2.0 * im_max * j / (n_im - 1));
    };
    for (int i = 0; i < n_re; ++i) {
      for (int j = 0; j < n_im; ++j) {
        const auto v = evaluate_target(ctx, z_of(i, j), target);
        at(i, j) = v ? std::abs(*v) : 0.0;
      }
    }
    for (int i = 0; i < n_re; ++i) {
      for (int j = 0; j < n_im; ++j) {
        const double here = at(i, j);
        if (here > 0.5) continue;
        bool is_min = true;
        for (int di = -1; di <= 1 && is_min; ++di) {
          for (int dj = -1; dj <= 1; ++dj) {
            const int ii = i + di;
            const int jj = j + dj;
            if ((di == 0 && dj == 0) || ii < 0 || jj < 0 || ii >= n_re || jj >= n_im) continue;
            if (at(ii, jj) < here) {
              is_min = false;
              break;
            }
          }
        }
        if (!is_min) continue;
        const auto root = newton_polish(ctx, z_of(i, j), target, re_lo);
        if (!root) continue;
        const bool duplicate = std::any_of(found.begin(), found.end(),
                                           [&](cplx r) { return std::abs(r - *root) < opt.dedup_distance; });
        if (!duplicate) found.push_back(*root);
      }
    }
  }
  return found;
}

}  // namespace

SpectralEstimate spectral_abscissa(double mu, double gamma, int d, double k_max, const SpectralOptions& options) {
  if (mu == d) throw InvalidArgument("spectral_abscissa: mu = d is the bifurcation point (no decay)");
  if (!(gamma > 0.0)) throw InvalidArgument("spectral_abscissa: gamma must be positive");
  if (!(options.root_window > 0.0 && options.root_window < 1.0)) {
    throw InvalidArgument("spectral_abscissa: root_window must lie in (0, 1)");
  }

  Vec J = Vec::Zero(d);
  if (mu > d) J(0) = branch_l(mu, d);

  // k = 0: nonzero eigenvalues of C_J and the -1 relaxation of the mean density profile
  const FluxMatrix flux = flux_relaxation_matrix(mu, J, build_sphere_grid(d, auto_node_count(J.norm())));
  const Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (flux.C + flux.C.transpose()));
  double top = -1.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double ev = eig.eigenvalues()(i);
    if (std::abs(ev) > 1e-9) top = std::max(top, ev);
  }

  SpectralEstimate est;
  est.k0_rate = -top;

  const std::vector<Vec> ks = lattice_wave_vectors(d, gamma, k_max);
  std::vector<std::vector<cplx>> per_k(ks.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < static_cast<long long>(ks.size()); ++i) {
    const auto u = static_cast<std::size_t>(i);
    const DispersionContext ctx = make_dispersion_context(mu, J, ks[u], -options.root_window);
    per_k[u] = roots_for_k(ctx, options);
  }
  for (const auto& roots : per_k) {
    for (const cplx r : roots) {
      est.roots.push_back(r);
      top = std::max(top, r.real());
    }
  }
  std::sort(est.roots.begin(), est.roots.end(),
            [](cplx a, cplx b) { return a.real() != b.real() ? a.real() > b.real() : a.imag() < b.imag(); });
  est.rate = -top;
  return est;
}

}  // namespace vbgk
