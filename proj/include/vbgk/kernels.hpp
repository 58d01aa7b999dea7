#pragma once

// Data-parallel inner loops of the kinetic solver. Every kernel has a serial
// reference path and an OpenMP path selected by Execution; the two produce
// identical results since each output element is written by exactly one
// iteration and no reductions cross iterations.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <span>

namespace vbgk {

enum class Execution { serial, parallel };

// Angular discretization of S^1 shared by the kernels.
struct AngularTable {
  std::span<const double> cos_t;
  std::span<const double> sin_t;
  std::span<const double> weights;
};

// Nonlinear (optionally flux-clamped) BGK relaxation over a substep tau, applied
// independently at each of n_points spatial points; values holds n_points blocks
// of n_theta angles. eps_reg <= 0 disables the clamp |J| <= 1/eps_reg.
void collide_nonlinear(std::span<double> values, std::size_t n_points, const AngularTable& angles, double tau,
                       double eps_reg, Execution exec);

// Exact solution over tau of the linearized relaxation
//   f' = rho_f M + mu J_f . grad M - f
// with precomputed propagators for the flux (see LinearCollisionData).
struct LinearCollisionData {
  Eigen::VectorXd m;                // M_J at the nodes
  Eigen::MatrixXd mu_grad_m;        // mu grad_J M_J, n_theta x 2
  Eigen::Matrix2d flux_propagator;  // int_0^tau e^{-(tau-s)} e^{C s} ds
  Eigen::Vector2d source_response;  // int_0^tau e^{-(tau-s)} int_0^s e^{C r} m_J dr ds
  double decay = 0.0;               // e^{-tau}
};

void collide_linear(std::span<double> values, std::size_t n_points, const AngularTable& angles,
                    const LinearCollisionData& data, Execution exec);

// spectrum[i] *= phases[i] for every i.
void apply_phases(std::span<std::complex<double>> spectrum, std::span<const std::complex<double>> phases,
                  Execution exec);

}  // namespace vbgk
