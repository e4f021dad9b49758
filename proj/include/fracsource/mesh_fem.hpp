#ifndef FRACSOURCE_MESH_FEM_HPP
#define FRACSOURCE_MESH_FEM_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace fracsource {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Fractional order s in (0,1) together with the kernel normalization
// constant C_s = s 2^{2s} Gamma((2s+1)/2) / (sqrt(pi) Gamma(1-s)).
struct FractionalOrder {
  double s;
  double c_s;
  explicit FractionalOrder(double order);
};

// Uniform mesh on (-1,1) with N interior nodes, spacing h = 2/(N+1).
// Nodes x_i = -1 + h*i for i = 0..N+1; the boundary nodes carry the
// homogeneous exterior condition and are excluded from all matrices.
class Mesh1D {
 public:
  explicit Mesh1D(int interior_nodes);
  int interior() const { return n_; }
  double spacing() const { return h_; }
  double node(int i) const { return -1.0 + h_ * i; }  // i = 0..N+1
  Vector interior_nodes() const;

 private:
  int n_;
  double h_;
};

Mesh1D build_mesh(int interior_nodes);

// Index window of the interior nodes lying strictly inside (lo,hi).
class SubdomainMask {
 public:
  SubdomainMask(double lo, double hi, const Mesh1D& mesh);
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double measure() const { return hi_ - lo_; }
  int first() const { return first_; }  // 1-based interior node index
  int last() const { return last_; }
  int count() const { return last_ - first_ + 1; }
  bool contains(int i) const { return i >= first_ && i <= last_; }

 private:
  double lo_, hi_;
  int first_, last_;
};

// Symmetric banded matrix stored by diagonals (offset 0 = main).
class BandedMatrix {
 public:
  BandedMatrix(int order, std::vector<int> offsets);
  int order() const { return n_; }
  const std::vector<int>& offsets() const { return offsets_; }
  double& diag(int offset_index, int i) { return diags_[offset_index][i]; }
  double operator()(int i, int j) const;
  Vector apply(const Vector& v) const;
  Matrix dense() const;

 private:
  int n_;
  std::vector<int> offsets_;
  std::vector<std::vector<double>> diags_;
};

// Symmetric Toeplitz matrix: entry (i,j) = a(|i-j|).
class SymmetricToeplitzMatrix {
 public:
  SymmetricToeplitzMatrix(int order, Vector first_row);
  int order() const { return n_; }
  double operator()(int i, int j) const { return row_[std::abs(i - j)]; }
  const Vector& first_row() const { return row_; }
  Vector apply(const Vector& v) const;
  Matrix dense() const;

 private:
  int n_;
  Vector row_;
};

// Tridiagonal P1 mass matrix: diagonal 2h/3, off-diagonals h/6.
BandedMatrix assemble_mass(const Mesh1D& mesh);

// Fractional stiffness matrix. Entries are the bilinear-form values
// a(phi_i, phi_j) of the hat-function pair, computed by quadrature of the
// singular double integral reduced against the hat autocorrelation; they
// depend only on k = |i-j| and h.
SymmetricToeplitzMatrix assemble_stiffness(const Mesh1D& mesh,
                                           const FractionalOrder& order);

// Single Toeplitz entry a(k; h) via the reduced one-dimensional route.
double stiffness_entry(int k, double h, const FractionalOrder& order);

// Independent validation oracle: brute-force composite quadrature of the
// double singular integral, split at the diagonal and at hat kinks.
// Declared accuracy <= 1e-8 relative for k <= 10.
double stiffness_entry_oracle(int k, double h, const FractionalOrder& order);

// Appendix-style rule (h/12)(v_{j-1} + 10 v_j + v_{j+1}) for
// int phi_j(x) v(x) dx; exact when v samples a quadratic.
double hat_moment_rule(const Vector& values, int j, double h);

// (h/6)(v_{j-1} + 4 v_j + v_{j+1}); exact for piecewise-linear v.
double vh_product_rule(const Vector& values, int j, double h);

// Trapezoidal approximation of the L2(omega) inner product of two nodal
// functions, restricted to the masked nodes.
double subdomain_l2_inner(const Vector& u, const Vector& v,
                          const SubdomainMask& mask, const Mesh1D& mesh);

double mass_norm(const Vector& v, const BandedMatrix& mass);

}  // namespace fracsource

#endif
