#pragma once

// Quadrature on the unit sphere S^{d-1} (d = 2, 3) and the von Mises family
// M_J(w) = exp(w.J) / Z(J) built on top of it.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

namespace vbgk {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendre gauss_legendre(int n);

// |S^{d-1}|: 2*pi for d = 2, 4*pi for d = 3, general d via the Gamma function.
double sphere_measure(int d);

class SphereGrid {
 public:
  SphereGrid(int dim, Mat nodes, Vec weights);

  int dim() const { return dim_; }
  std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }
  // size() x dim() matrix, one unit vector per row.
  const Mat& nodes() const { return nodes_; }
  const Vec& weights() const { return weights_; }
  Eigen::Ref<const Eigen::RowVectorXd> node(std::size_t i) const { return nodes_.row(static_cast<Eigen::Index>(i)); }
  double measure() const { return sphere_measure(dim_); }

  double integrate(const Vec& values) const;
  cplx integrate(const CVec& values) const;

 private:
  int dim_;
  Mat nodes_;
  Vec weights_;
};

// d = 2: n equispaced angles (periodic trapezoid rule).
// d = 3: n Gauss-Legendre nodes in cos(polar) times 2n equispaced azimuths.
SphereGrid build_sphere_grid(int d, int n);

// Node count that resolves M_J for the given |J|: max(64, 8*ceil(|J|)).
int auto_node_count(double j_norm);

struct MomentPair {
  double rho = 0.0;
  Vec J;
};

// Z(J) = int exp(w.J) dw.
double partition_z(const Vec& J, const SphereGrid& grid);
// log Z(J), stable for large |J|.
double log_partition_z(const Vec& J, const SphereGrid& grid);

// Nodal values of M_J, normalized by the same quadrature so they integrate to one.
Vec von_mises(const Vec& J, const SphereGrid& grid);

// grad_J M_J = (w - m(J)) M_J where m(J) = int w M_J dw = c(|J|) J/|J|.
// Column i holds the i-th component. At J = 0 this reduces to w_i M_0.
Mat grad_j_von_mises(const Vec& J, const SphereGrid& grid);

MomentPair moments(const Vec& f, const SphereGrid& grid);

// I_{k,m} = int_0^pi cos^k(t) sin^m(t) dt.
double axis_integral_quadrature(int k, int m);
double axis_integral_recursive(int k, int m);

}  // namespace vbgk
