#ifndef FRACSOURCE_SPECTRAL_BASIS_HPP
#define FRACSOURCE_SPECTRAL_BASIS_HPP

#include "fracsource/mesh_fem.hpp"

namespace fracsource {

// First n* eigenpairs of the generalized problem A_h v = lambda M_h v.
// Eigenvectors are M-orthonormal nodal functions; the sign convention keeps
// the L2 inner product against the asymptotic eigenfunction positive.
class SpectralBasis {
 public:
  SpectralBasis(Mesh1D mesh, double s, Vector lambdas, Matrix modes);

  const Mesh1D& mesh() const { return mesh_; }
  double order() const { return s_; }
  int truncation() const { return static_cast<int>(lambdas_.size()); }
  double lambda(int n) const { return lambdas_[n - 1]; }  // n = 1..n*
  const Vector& lambdas() const { return lambdas_; }
  Vector mode(int n) const { return modes_.col(n - 1); }
  const Matrix& modes() const { return modes_; }

 private:
  Mesh1D mesh_;
  double s_;
  Vector lambdas_;
  Matrix modes_;
};

SpectralBasis solve_eigenbasis(const Mesh1D& mesh, const BandedMatrix& mass,
                               const SymmetricToeplitzMatrix& stiffness,
                               double s, int truncation);

// lambda~_n = (n pi/2 - (1-s) pi/4)^{2s}
double asymptotic_eigenvalue(int n, double s);

// sin(mu_n x + n pi/2) with mu_n = lambda~_n^{1/(2s)} = n pi/2 - (1-s) pi/4
double asymptotic_eigenfunction(int n, double s, double x);

// Modal coefficients f_n = f^T M_h phi_n for n = 1..upto.
Vector project(const Vector& f, const SpectralBasis& basis, int upto);

// Nodal values of sum_n coeffs_n phi_n.
Vector synthesize(const Vector& coeffs, const SpectralBasis& basis);

// Action of the P1 mass matrix determined by the mesh (no assembly needed).
Vector mass_apply(const Mesh1D& mesh, const Vector& v);

}  // namespace fracsource

#endif
