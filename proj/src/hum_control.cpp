#include "fracsource/hum_control.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <stdexcept>

namespace fracsource {

ModeGramian assemble_gramian(const SpectralBasis& basis,
                             const SubdomainMask& mask, double tau,
                             const Mesh1D& mesh) {
  if (!(tau > 0.0)) throw std::invalid_argument("assemble_gramian: tau <= 0");
  const int m = basis.truncation();
  ModeGramian gram;
  gram.tau = tau;
  gram.G.resize(m, m);
  for (int a = 0; a < m; ++a) {
    const Vector pa = basis.mode(a + 1);
    for (int b = a; b < m; ++b) {
      const double overlap = subdomain_l2_inner(pa, basis.mode(b + 1), mask, mesh);
      const double rate = basis.lambda(a + 1) + basis.lambda(b + 1);
      const double val = overlap * (1.0 - std::exp(-rate * tau)) / rate;
      gram.G(a, b) = val;
      gram.G(b, a) = val;
    }
  }
  return gram;
}

Matrix assemble_lambda(const SpectralBasis& basis, const ModeGramian& gramian,
                       const Mesh1D& mesh) {
  const int m = basis.truncation();
  const int n = mesh.interior();
  const double h = mesh.spacing();
  Matrix proj(m, n);  // (phi_j)_m by the hat moment rule
  for (int c = 0; c < m; ++c) {
    const Vector mode = basis.mode(c + 1);
    for (int j = 1; j <= n; ++j) proj(c, j - 1) = hat_moment_rule(mode, j, h);
  }
  return basis.modes() * (gramian.G * proj);
}

Vector terminal_dataset(int n, double tau, const SpectralBasis& basis) {
  if (n < 1 || n > basis.truncation())
    throw std::invalid_argument("terminal_dataset: mode out of range");
  return std::exp(-basis.lambda(n) * tau) * basis.mode(n);
}

HUMSolution solve_hum(const Matrix& lambda, double epsilon, const Vector& phi0,
                      const SpectralBasis& basis, double tau) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("solve_hum: epsilon <= 0");
  const int n = static_cast<int>(phi0.size());
  Matrix sys = lambda;
  sys.diagonal().array() += 1.0 / epsilon;
  Eigen::PartialPivLU<Matrix> lu(sys);

  HUMSolution sol;
  sol.epsilon = epsilon;
  sol.tau = tau;
  sol.w0 = lu.solve(phi0);
  const double denom = phi0.norm();
  sol.residual = denom > 0.0 ? (sys * sol.w0 - phi0).norm() / denom : 0.0;
  sol.ill_conditioned = lu.rcond() < 1e-14;
  sol.modal = project(sol.w0, basis, basis.truncation());
  if (!sol.w0.allFinite())
    throw std::runtime_error("solve_hum: non-finite solution");
  (void)n;
  return sol;
}

std::vector<ControlFamily> build_control_families(const SpectralBasis& basis,
                                                  const SubdomainMask& mask,
                                                  const TimeGrid& grid,
                                                  double epsilon, int modes) {
  if (modes < 1 || modes > basis.truncation())
    throw std::invalid_argument("build_control_families: mode count");
  std::vector<ControlFamily> out(modes);
  for (int n = 0; n < modes; ++n) {
    out[n].epsilon = epsilon;
    out[n].mode = n + 1;
    out[n].modal.resize(grid.coarse_steps());
  }
  for (int l = 1; l <= grid.coarse_steps(); ++l) {
    const double tau = grid.coarse_time(l);
    const ModeGramian gram = assemble_gramian(basis, mask, tau, basis.mesh());
    Matrix sys = assemble_lambda(basis, gram, basis.mesh());
    sys.diagonal().array() += 1.0 / epsilon;
    Eigen::PartialPivLU<Matrix> lu(sys);
    for (int n = 1; n <= modes; ++n) {
      const Vector w0 = lu.solve(terminal_dataset(n, tau, basis));
      if (!w0.allFinite())
        throw std::runtime_error("control family: non-finite HUM solve at l=" +
                                 std::to_string(l));
      out[n - 1].modal[l - 1] = project(w0, basis, basis.truncation());
    }
  }
  return out;
}

ControlFamily build_control_family(const SpectralBasis& basis,
                                   const SubdomainMask& mask,
                                   const TimeGrid& grid, double epsilon,
                                   int mode) {
  if (mode < 1 || mode > basis.truncation())
    throw std::invalid_argument("build_control_family: mode out of range");
  ControlFamily fam;
  fam.epsilon = epsilon;
  fam.mode = mode;
  fam.modal.resize(grid.coarse_steps());
  for (int l = 1; l <= grid.coarse_steps(); ++l) {
    const double tau = grid.coarse_time(l);
    const ModeGramian gram = assemble_gramian(basis, mask, tau, basis.mesh());
    const Matrix lambda = assemble_lambda(basis, gram, basis.mesh());
    const HUMSolution sol =
        solve_hum(lambda, epsilon, terminal_dataset(mode, tau, basis), basis, tau);
    fam.modal[l - 1] = sol.modal;
  }
  return fam;
}

Matrix control_values(const ControlFamily& family, int ell,
                      const SpectralBasis& basis, const SubdomainMask& mask,
                      const TimeGrid& grid) {
  if (ell < 1 || ell > static_cast<int>(family.modal.size()))
    throw std::invalid_argument("control_values: horizon index");
  const int last = grid.fine_index(ell);
  const int n = basis.mesh().interior();
  const int m = basis.truncation();
  const Vector& coeffs = family.modal[ell - 1];

  Matrix vals = Matrix::Zero(n, last + 1);
  for (int j = 0; j <= last; ++j) {
    const double t = grid.fine_time(j);
    Vector modal(m);
    for (int c = 0; c < m; ++c)
      modal[c] = kControlSign * coeffs[c] * std::exp(-basis.lambda(c + 1) * t);
    const Vector full = basis.modes() * modal;
    for (int i = mask.first(); i <= mask.last(); ++i)
      vals(i - 1, j) = full[i - 1];
  }
  return vals;
}

double verify_null_control(const ControlFamily& family, int ell,
                           const SpectralBasis& basis,
                           const SubdomainMask& mask, const Mesh1D& mesh,
                           const BandedMatrix& mass,
                           const SymmetricToeplitzMatrix& stiffness,
                           const TimeGrid& grid) {
  const double tau = grid.coarse_time(ell);
  const Matrix control = control_values(family, ell, basis, mask, grid);
  const Trajectory traj = solve_backward_sampled(
      mesh, mass, stiffness, control, basis.mode(family.mode), grid, tau);
  return mass_norm(traj.values.col(0), mass);
}

Vector lambda_column_fem(int j, double tau, const Mesh1D& mesh,
                         const BandedMatrix& mass,
                         const SymmetricToeplitzMatrix& stiffness,
                         const SubdomainMask& mask, const TimeGrid& grid) {
  const int n = mesh.interior();
  if (j < 1 || j > n) throw std::invalid_argument("lambda_column_fem: node");
  Vector hat = Vector::Zero(n);
  hat[j - 1] = 1.0;
  const auto zero = [](double, double) { return 0.0; };
  const Trajectory psi =
      solve_backward(mesh, mass, stiffness, zero, hat, grid, tau);

  // Forward problem forced by the omega-restriction of psi.
  const int last = static_cast<int>(psi.values.cols()) - 1;
  const double k = grid.fine_step();
  const Matrix md = mass.dense();
  Eigen::LLT<Matrix> step(md + k * stiffness.dense());
  Vector w = Vector::Zero(n);
  for (int i = 0; i < last; ++i) {
    Vector f = Vector::Zero(n);
    for (int p = mask.first(); p <= mask.last(); ++p)
      f[p - 1] = psi.values(p - 1, i + 1);
    w = step.solve(md * (w + k * f));
  }
  return w;
}

EpsilonSelection select_epsilon(const SpectralBasis& basis,
                                const SubdomainMask& mask, const TimeGrid& grid,
                                int cap) {
  if (cap < 1 || cap > basis.truncation())
    throw std::invalid_argument("select_epsilon: cap out of range");
  const double tau = grid.coarse_time(1);
  const Mesh1D& mesh = basis.mesh();
  const ModeGramian gram = assemble_gramian(basis, mask, tau, mesh);
  const Matrix lambda = assemble_lambda(basis, gram, mesh);

  // Worst controlled-state L2(omega) norm over the first `cap` modes.
  const auto worst = [&](double eps) {
    Matrix sys = lambda;
    sys.diagonal().array() += 1.0 / eps;
    Eigen::PartialPivLU<Matrix> lu(sys);
    double top = 0.0;
    for (int n = 1; n <= cap; ++n) {
      const Vector state = lu.solve(terminal_dataset(n, tau, basis)) / eps;
      top = std::max(top,
                     std::sqrt(subdomain_l2_inner(state, state, mask, mesh)));
    }
    return top;
  };

  EpsilonSelection sel;
  sel.threshold = 0.01 * mask.measure();
  double lo = 0.0, hi = 0.0;  // exponents bracketing the criterion
  double hi_val = 0.0;
  for (int e = 1; e <= 8; ++e) {
    const double val = worst(std::pow(10.0, e));
    if (val < sel.threshold) {
      hi = e;
      hi_val = val;
      lo = e - 1;
      break;
    }
    sel.achieved = val;
  }
  if (hi == 0.0) return sel;  // criterion unreachable below 1e8
  if (hi > 1.0) {
    while (hi - lo > 0.1) {
      const double mid = 0.5 * (lo + hi);
      const double val = worst(std::pow(10.0, mid));
      if (val < sel.threshold) {
        hi = mid;
        hi_val = val;
      } else {
        lo = mid;
      }
    }
  }
  sel.success = true;
  sel.epsilon = std::pow(10.0, hi);
  sel.achieved = hi_val;
  return sel;
}

}  // namespace fracsource
