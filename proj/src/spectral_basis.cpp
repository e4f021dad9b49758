#include "fracsource/spectral_basis.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fracsource {

SpectralBasis::SpectralBasis(Mesh1D mesh, double s, Vector lambdas,
                             Matrix modes)
    : mesh_(mesh), s_(s), lambdas_(std::move(lambdas)),
      modes_(std::move(modes)) {
  if (modes_.cols() != lambdas_.size() || modes_.rows() != mesh_.interior())
    throw std::invalid_argument("spectral basis shape mismatch");
}

double asymptotic_eigenvalue(int n, double s) {
  const double mu = n * std::numbers::pi / 2.0 -
                    (1.0 - s) * std::numbers::pi / 4.0;
  return std::pow(mu, 2.0 * s);
}

double asymptotic_eigenfunction(int n, double s, double x) {
  const double mu = n * std::numbers::pi / 2.0 -
                    (1.0 - s) * std::numbers::pi / 4.0;
  return std::sin(mu * x + n * std::numbers::pi / 2.0);
}

Vector mass_apply(const Mesh1D& mesh, const Vector& v) {
  const int n = mesh.interior();
  const double h = mesh.spacing();
  Vector out(n);
  for (int i = 0; i < n; ++i) {
    double acc = 2.0 * h / 3.0 * v[i];
    if (i > 0) acc += h / 6.0 * v[i - 1];
    if (i + 1 < n) acc += h / 6.0 * v[i + 1];
    out[i] = acc;
  }
  return out;
}

SpectralBasis solve_eigenbasis(const Mesh1D& mesh, const BandedMatrix& mass,
                               const SymmetricToeplitzMatrix& stiffness,
                               double s, int truncation) {
  const int n = mesh.interior();
  if (truncation < 1 || truncation > n)
    throw std::invalid_argument("eigenbasis truncation out of range");
  if (mass.order() != n || stiffness.order() != n)
    throw std::invalid_argument("matrix order does not match mesh");

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(stiffness.dense(),
                                                          mass.dense());
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("generalized eigensolver failed");

  Vector lambdas = solver.eigenvalues().head(truncation);
  Matrix modes = solver.eigenvectors().leftCols(truncation);

  // Deterministic orientation: positive L2 correlation with the asymptotic
  // eigenfunction, which keeps the sign stable across recomputations.
  for (int c = 0; c < truncation; ++c) {
    Vector ref(n);
    for (int i = 0; i < n; ++i)
      ref[i] = asymptotic_eigenfunction(c + 1, s, mesh.node(i + 1));
    if (modes.col(c).dot(mass_apply(mesh, ref)) < 0.0) modes.col(c) *= -1.0;
  }
  return SpectralBasis(mesh, s, std::move(lambdas), std::move(modes));
}

Vector project(const Vector& f, const SpectralBasis& basis, int upto) {
  if (upto < 0 || upto > basis.truncation())
    throw std::invalid_argument("projection count exceeds truncation");
  const Vector mf = mass_apply(basis.mesh(), f);
  return basis.modes().leftCols(upto).transpose() * mf;
}

Vector synthesize(const Vector& coeffs, const SpectralBasis& basis) {
  const int m = static_cast<int>(coeffs.size());
  if (m > basis.truncation())
    throw std::invalid_argument("coefficient count exceeds truncation");
  return basis.modes().leftCols(m) * coeffs;
}

}  // namespace fracsource
