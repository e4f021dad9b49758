#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fracsource/spectral_basis.hpp"

using namespace fracsource;

namespace {

SpectralBasis make_basis(int N, double s, int trunc) {
  const Mesh1D mesh(N);
  const BandedMatrix mass = assemble_mass(mesh);
  const SymmetricToeplitzMatrix stiff =
      assemble_stiffness(mesh, FractionalOrder(s));
  return solve_eigenbasis(mesh, mass, stiff, s, trunc);
}

// Frozen evaluations of (n pi/2 - (1-s) pi/4)^{2s} at s = 0.75.
constexpr double kAsym1 = 1.6113574638497827;
constexpr double kAsym20 = 174.43776818883262;
constexpr double kAsym50 = 693.432477881907;

}  // namespace

TEST_CASE("asymptotic eigenvalue formula against frozen values") {
  CHECK(asymptotic_eigenvalue(1, 0.75) ==
        doctest::Approx(kAsym1).epsilon(1e-14));
  CHECK(asymptotic_eigenvalue(20, 0.75) ==
        doctest::Approx(kAsym20).epsilon(1e-14));
  CHECK(asymptotic_eigenvalue(50, 0.75) ==
        doctest::Approx(kAsym50).epsilon(1e-14));
}

TEST_CASE("eigenbasis at N = 500, s = 0.75") {
  const SpectralBasis basis = make_basis(500, 0.75, 60);
  const Mesh1D& mesh = basis.mesh();
  const BandedMatrix mass = assemble_mass(mesh);

  SUBCASE("eigenvalues are positive and increasing") {
    CHECK(basis.lambda(1) > 0.0);
    for (int n = 2; n <= 60; ++n) CHECK(basis.lambda(n) > basis.lambda(n - 1));
  }

  SUBCASE("M-orthonormality") {
    const Matrix dense = mass.dense();
    const Matrix gram = basis.modes().transpose() * dense * basis.modes();
    const Matrix eye = Matrix::Identity(60, 60);
    CHECK((gram - eye).cwiseAbs().maxCoeff() < 1e-8);
  }

  SUBCASE("asymptotic window 20..50 within 3%") {
    for (int n = 20; n <= 50; ++n) {
      const double ref = asymptotic_eigenvalue(n, 0.75);
      CAPTURE(n);
      CHECK(std::abs(basis.lambda(n) - ref) / ref < 0.03);
    }
  }

  SUBCASE("sign convention pairs with the asymptotic eigenfunction") {
    for (int n = 1; n <= 10; ++n) {
      double ip = 0.0;
      for (int i = 0; i < mesh.interior(); ++i)
        ip += basis.mode(n)[i] *
              asymptotic_eigenfunction(n, 0.75, mesh.node(i + 1));
      CAPTURE(n);
      CHECK(ip > 0.0);
    }
  }

  SUBCASE("project and synthesize invert each other on the basis span") {
    Vector coeffs = Vector::Zero(8);
    coeffs << 1.0, -0.5, 0.25, 0.0, 2.0, 0.0, -1.5, 0.125;
    const Vector nodal = synthesize(coeffs, basis);
    const Vector back = project(nodal, basis, 8);
    CHECK((back - coeffs).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("mass_apply matches the assembled matrix") {
    Vector v(mesh.interior());
    for (int i = 0; i < v.size(); ++i) v[i] = std::sin(0.05 * i);
    CHECK((mass_apply(mesh, v) - mass.apply(v)).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("mesh refinement improves the low eigenvalues") {
  // measured against a refined computation; the asymptote itself carries an
  // O(1/n) bias that floors the n = 1 and n = 3 distances
  const SpectralBasis coarse = make_basis(500, 0.75, 20);
  const SpectralBasis fine = make_basis(1000, 0.75, 20);
  const SpectralBasis reference = make_basis(2000, 0.75, 20);
  for (int n = 1; n <= 20; ++n) {
    const double ref = reference.lambda(n);
    CAPTURE(n);
    CHECK(std::abs(fine.lambda(n) - ref) < std::abs(coarse.lambda(n) - ref));
  }
}
