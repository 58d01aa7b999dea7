#include "vbgk/sphere.hpp"

#include "vbgk/error.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

namespace vbgk {

namespace {

GaussLegendre compute_gauss_legendre(int n) {
  GaussLegendre gl;
  gl.nodes.resize(static_cast<std::size_t>(n));
  gl.weights.resize(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute the derivative at the converged node
    double p0 = 1.0;
    double p1 = x;
    for (int j = 2; j <= n; ++j) {
      const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    gl.nodes[static_cast<std::size_t>(i)] = -x;
    gl.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    gl.weights[static_cast<std::size_t>(i)] = w;
    gl.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return gl;
}

}  // namespace

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre: n must be >= 1, got " + std::to_string(n));
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const GaussLegendre>> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(n); it != cache.end()) return *it->second;
  }
  auto gl = std::make_shared<const GaussLegendre>(compute_gauss_legendre(n));
  std::lock_guard lock(mutex);
  cache.emplace(n, gl);
  return *gl;
}

double sphere_measure(int d) {
  if (d < 1) throw InvalidArgument("sphere_measure: d must be >= 1");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

SphereGrid::SphereGrid(int dim, Mat nodes, Vec weights)
    : dim_(dim), nodes_(std::move(nodes)), weights_(std::move(weights)) {
  if (nodes_.rows() != weights_.size() || nodes_.cols() != dim_) {
    throw InvalidArgument("SphereGrid: node/weight shape mismatch");
  }
}

double SphereGrid::integrate(const Vec& values) const {
  if (values.size() != weights_.size()) throw InvalidArgument("SphereGrid::integrate: length mismatch");
  return weights_.dot(values);
}

cplx SphereGrid::integrate(const CVec& values) const {
  if (values.size() != weights_.size()) throw InvalidArgument("SphereGrid::integrate: length mismatch");
  return (values.array() * weights_.array().cast<cplx>()).sum();
}

SphereGrid build_sphere_grid(int d, int n) {
  if (d != 2 && d != 3) {
    throw InvalidArgument("build_sphere_grid: unsupported dimension d=" + std::to_string(d) + " (expected 2 or 3)");
  }
  if (n < 4) throw InvalidArgument("build_sphere_grid: n must be >= 4, got " + std::to_string(n));

  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (d == 2) {
    Mat nodes(n, 2);
    Vec weights = Vec::Constant(n, two_pi / n);
    for (int i = 0; i < n; ++i) {
      const double theta = two_pi * i / n;
      nodes(i, 0) = std::cos(theta);
      nodes(i, 1) = std::sin(theta);
    }
    return SphereGrid(2, std::move(nodes), std::move(weights));
  }

  const int n_az = 2 * n;
  const GaussLegendre gl = gauss_legendre(n);
  Mat nodes(n * n_az, 3);
  Vec weights(n * n_az);
  for (int p = 0; p < n; ++p) {
    const double u = gl.nodes[static_cast<std::size_t>(p)];
    const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
    for (int a = 0; a < n_az; ++a) {
      const double phi = two_pi * a / n_az;
      const int row = p * n_az + a;
      nodes(row, 0) = s * std::cos(phi);
      nodes(row, 1) = s * std::sin(phi);
      nodes(row, 2) = u;
      weights(row) = gl.weights[static_cast<std::size_t>(p)] * two_pi / n_az;
    }
  }
  return SphereGrid(3, std::move(nodes), std::move(weights));
}

int auto_node_count(double j_norm) {
  return std::max(64, 8 * static_cast<int>(std::ceil(j_norm)));
}

namespace {

void check_param(const Vec& J, const SphereGrid& grid) {
  if (J.size() != grid.dim()) {
    throw InvalidArgument("von Mises parameter has dimension " + std::to_string(J.size()) +
                          ", grid has dimension " + std::to_string(grid.dim()));
  }
  if (!J.allFinite()) throw InvalidArgument("von Mises parameter has non-finite entries");
}

// exp(w.J - shift) at every node, shift = max exponent.
Vec shifted_exponentials(const Vec& J, const SphereGrid& grid, double& shift) {
  Vec exponent = grid.nodes() * J;
  shift = exponent.maxCoeff();
  return (exponent.array() - shift).exp().matrix();
}

}  // namespace

double log_partition_z(const Vec& J, const SphereGrid& grid) {
  check_param(J, grid);
  double shift = 0.0;
  const Vec e = shifted_exponentials(J, grid, shift);
  return shift + std::log(grid.weights().dot(e));
}

double partition_z(const Vec& J, const SphereGrid& grid) { return std::exp(log_partition_z(J, grid)); }

Vec von_mises(const Vec& J, const SphereGrid& grid) {
  check_param(J, grid);
  double shift = 0.0;
  Vec e = shifted_exponentials(J, grid, shift);
  e /= grid.weights().dot(e);
  return e;
}

Mat grad_j_von_mises(const Vec& J, const SphereGrid& grid) {
  const Vec m = von_mises(J, grid);
  Mat grad(static_cast<Eigen::Index>(grid.size()), grid.dim());
  // mean direction; the quadrature value of c(|J|) J/|J|, exactly zero at J = 0
  Vec mean = Vec::Zero(grid.dim());
  if (J.norm() > 0.0) mean = grid.nodes().transpose() * (grid.weights().array() * m.array()).matrix();
  for (int i = 0; i < grid.dim(); ++i) {
    grad.col(i) = ((grid.nodes().col(i).array() - mean(i)) * m.array()).matrix();
  }
  return grad;
}

MomentPair moments(const Vec& f, const SphereGrid& grid) {
  if (static_cast<std::size_t>(f.size()) != grid.size()) {
    throw InvalidArgument("moments: density has " + std::to_string(f.size()) + " values, grid has " +
                          std::to_string(grid.size()) + " nodes");
  }
  const Vec wf = (grid.weights().array() * f.array()).matrix();
  return MomentPair{wf.sum(), grid.nodes().transpose() * wf};
}

double axis_integral_quadrature(int k, int m) {
  if (k < 0 || m < 0) throw InvalidArgument("axis_integral: indices must be nonnegative");
  const GaussLegendre gl = gauss_legendre(64 + k + m);
  const double half = 0.5 * std::numbers::pi;
  double sum = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double t = half * (gl.nodes[i] + 1.0);
    sum += gl.weights[i] * std::pow(std::cos(t), k) * std::pow(std::sin(t), m);
  }
  return half * sum;
}

double axis_integral_recursive(int k, int m) {
  if (k < 0 || m < 0) throw InvalidArgument("axis_integral: indices must be nonnegative");
  if (k % 2 == 1) return 0.0;  // odd about pi/2
  if (k == 0) {
    if (m == 0) return std::numbers::pi;
    if (m == 1) return 2.0;
    return (m - 1.0) / m * axis_integral_recursive(0, m - 2);
  }
  if (k == 2) return axis_integral_recursive(0, m + 2) / (m + 1.0);
  // cos^2 = 1 - sin^2; for k = 4 this is I_{4,m} = I_{2,m} - I_{2,m+2}
  return axis_integral_recursive(k - 2, m) - axis_integral_recursive(k - 2, m + 2);
}

}  // namespace vbgk
