#include "vbgk/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace vbgk {

namespace {

struct Flux {
  double x = 0.0;
  double y = 0.0;
};

Flux clamp_flux(Flux J, double eps_reg) {
  if (eps_reg <= 0.0) return J;
  const double n = std::hypot(J.x, J.y);
  const double cap = 1.0 / eps_reg;
  if (n <= cap) return J;
  return {J.x * cap / n, J.y * cap / n};
}

// Normalized von Mises values M_J at the table nodes; returns m(J) = sum w w M_J.
Flux mises(Flux J, const AngularTable& angles, std::vector<double>& out) {
  const std::size_t n = angles.weights.size();
  double top = -std::hypot(J.x, J.y);
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = J.x * angles.cos_t[j] + J.y * angles.sin_t[j];
    top = std::max(top, out[j]);
  }
  double z = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = std::exp(out[j] - top);
    z += angles.weights[j] * out[j];
  }
  Flux m;
  const double inv = 1.0 / z;
  for (std::size_t j = 0; j < n; ++j) {
    out[j] *= inv;
    m.x += angles.weights[j] * angles.cos_t[j] * out[j];
    m.y += angles.weights[j] * angles.sin_t[j] * out[j];
  }
  return m;
}

void relax_point(double* F, const AngularTable& angles, double tau, double decay, double eps_reg,
                 std::vector<double>& buf) {
  const std::size_t n = angles.weights.size();
  double rho = 0.0;
  Flux J;
  for (std::size_t j = 0; j < n; ++j) {
    const double wf = angles.weights[j] * F[j];
    rho += wf;
    J.x += wf * angles.cos_t[j];
    J.y += wf * angles.sin_t[j];
  }
  // midpoint rule for dJ/dt = rho m(J^eps) - J over tau/2
  const double h = 0.5 * tau;
  auto rhs = [&](Flux K) {
    const Flux m = mises(clamp_flux(K, eps_reg), angles, buf);
    return Flux{rho * m.x - K.x, rho * m.y - K.y};
  };
  const Flux g0 = rhs(J);
  const Flux mid{J.x + 0.5 * h * g0.x, J.y + 0.5 * h * g0.y};
  const Flux g1 = rhs(mid);
  const Flux star{J.x + h * g1.x, J.y + h * g1.y};
  mises(clamp_flux(star, eps_reg), angles, buf);
  const double gain = (1.0 - decay) * rho;
  for (std::size_t j = 0; j < n; ++j) F[j] = decay * F[j] + gain * buf[j];
}

}  // namespace

void collide_nonlinear(std::span<double> values, std::size_t n_points, const AngularTable& angles, double tau,
                       double eps_reg, Execution exec) {
  const std::size_t nt = angles.weights.size();
  const double decay = std::exp(-tau);
  const auto total = static_cast<long long>(n_points);
  if (exec == Execution::parallel) {
#pragma omp parallel
    {
      std::vector<double> buf(nt);
#pragma omp for schedule(static)
      for (long long p = 0; p < total; ++p) {
        relax_point(values.data() + static_cast<std::size_t>(p) * nt, angles, tau, decay, eps_reg, buf);
      }
    }
  } else {
    std::vector<double> buf(nt);
    for (long long p = 0; p < total; ++p) {
      relax_point(values.data() + static_cast<std::size_t>(p) * nt, angles, tau, decay, eps_reg, buf);
    }
  }
}

namespace {

void relax_linear_point(double* f, const AngularTable& angles, const LinearCollisionData& data) {
  const std::size_t n = angles.weights.size();
  double rho = 0.0;
  Eigen::Vector2d J = Eigen::Vector2d::Zero();
  for (std::size_t j = 0; j < n; ++j) {
    const double wf = angles.weights[j] * f[j];
    rho += wf;
    J(0) += wf * angles.cos_t[j];
    J(1) += wf * angles.sin_t[j];
  }
  const Eigen::Vector2d K = data.flux_propagator * J + rho * data.source_response;
  const double gain = (1.0 - data.decay) * rho;
  for (std::size_t j = 0; j < n; ++j) {
    const auto r = static_cast<Eigen::Index>(j);
    f[j] = data.decay * f[j] + gain * data.m(r) + data.mu_grad_m(r, 0) * K(0) + data.mu_grad_m(r, 1) * K(1);
  }
}

}  // namespace

void collide_linear(std::span<double> values, std::size_t n_points, const AngularTable& angles,
                    const LinearCollisionData& data, Execution exec) {
  const std::size_t nt = angles.weights.size();
  const auto total = static_cast<long long>(n_points);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (long long p = 0; p < total; ++p) {
      relax_linear_point(values.data() + static_cast<std::size_t>(p) * nt, angles, data);
    }
  } else {
    for (long long p = 0; p < total; ++p) {
      relax_linear_point(values.data() + static_cast<std::size_t>(p) * nt, angles, data);
    }
  }
}

}  // namespace vbgk
