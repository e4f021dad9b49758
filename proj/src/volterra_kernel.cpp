#include "fracsource/volterra_kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace fracsource {

VolterraSystem build_block_system(const SigmaProfile& sigma, int points,
                                  double step) {
  if (points < 1 || step <= 0.0)
    throw std::invalid_argument("build_block_system: bad subgrid");
  if (std::abs(sigma.at_zero()) < 1e-14)
    throw std::runtime_error(
        "build_block_system: sigma(0) = 0 makes the system singular; "
        "the reconstruction (both theorems) requires sigma(0) != 0");
  VolterraSystem sys;
  sys.step = step;
  sys.points = points;
  sys.sigma0 = sigma.at_zero();
  sys.sig.resize(points);
  sys.dsig.resize(points);
  for (int d = 0; d < points; ++d) {
    sys.sig[d] = sigma(d * step);
    sys.dsig[d] = sigma.derivative(d * step);
  }
  return sys;
}

namespace {

// Accumulated kernel action k * sum_{i>j} w_i M((i-j) step) Theta_i with
// trapezoidal weights (1/2 at the far endpoint i = points-1).
void kernel_tail(const VolterraSystem& sys, const Matrix& th, int j,
                 double& acc0, double& acc1) {
  const int last = sys.points - 1;
  acc0 = 0.0;
  acc1 = 0.0;
  for (int i = j + 1; i <= last; ++i) {
    const double w = (i == last) ? 0.5 : 1.0;
    const int d = i - j;
    acc0 += w * th(1, i);
    acc1 += w * (sys.sig[d] * th(0, i) + sys.dsig[d] * th(1, i));
  }
  acc0 *= sys.step;
  acc1 *= sys.step;
}

}  // namespace

std::pair<Vector, Vector> solve_volterra(const Vector& control,
                                         const VolterraSystem& sys) {
  if (control.size() != sys.points)
    throw std::invalid_argument("solve_volterra: control length");
  const int last = sys.points - 1;
  Matrix th(2, sys.points);  // row 0 = theta, row 1 = theta_t
  th.col(last) << 0.0, control[last] / sys.sigma0;
  const double k = sys.step;

  // (L0 + (k/2) M(0)) is shared by every row of the back-substitution.
  const double a11 = 1.0, a12 = 0.5 * k;
  const double a21 = 0.5 * k * sys.sig[0];
  const double a22 = sys.sigma0 + 0.5 * k * sys.dsig[0];
  const double det = a11 * a22 - a12 * a21;
  if (std::abs(det) < 1e-14)
    throw std::runtime_error("solve_volterra: singular step block");

  for (int j = last - 1; j >= 0; --j) {
    double acc0, acc1;
    kernel_tail(sys, th, j, acc0, acc1);
    const double r0 = -acc0;
    const double r1 = control[j] - acc1;
    th(0, j) = (r0 * a22 - a12 * r1) / det;
    th(1, j) = (a11 * r1 - r0 * a21) / det;
  }
  if (!th.allFinite())
    throw std::runtime_error("solve_volterra: non-finite solution");
  return {th.row(0).transpose(), th.row(1).transpose()};
}

double volterra_residual(const Vector& control, const Vector& theta,
                         const Vector& theta_t, const VolterraSystem& sys) {
  const int last = sys.points - 1;
  Matrix th(2, sys.points);
  th.row(0) = theta.transpose();
  th.row(1) = theta_t.transpose();
  double worst = std::abs(theta[last]) +
                 std::abs(sys.sigma0 * theta_t[last] - control[last]);
  const double k = sys.step;
  for (int j = 0; j < last; ++j) {
    double acc0, acc1;
    kernel_tail(sys, th, j, acc0, acc1);
    const double half0 = 0.5 * k * th(1, j);
    const double half1 =
        0.5 * k * (sys.sig[0] * th(0, j) + sys.dsig[0] * th(1, j));
    const double r0 = th(0, j) + half0 + acc0;
    const double r1 = sys.sigma0 * th(1, j) + half1 + acc1 - control[j];
    worst = std::max({worst, std::abs(r0), std::abs(r1)});
  }
  return worst;
}

ModalVolterra solve_modal_family(const SpectralBasis& basis,
                                 const SigmaProfile& sigma,
                                 const TimeGrid& grid) {
  const int modes = basis.truncation();
  ModalVolterra fam;
  fam.theta.resize(grid.coarse_steps());
  fam.theta_t.resize(grid.coarse_steps());
  for (int l = 1; l <= grid.coarse_steps(); ++l) {
    const int last = grid.fine_index(l);
    const VolterraSystem sys =
        build_block_system(sigma, last + 1, grid.fine_step());
    Matrix th(modes, last + 1), tht(modes, last + 1);
    Vector control(last + 1);
    for (int n = 1; n <= modes; ++n) {
      const double lam = basis.lambda(n);
      for (int j = 0; j <= last; ++j)
        control[j] = std::exp(-lam * grid.fine_time(j));
      const auto [theta, theta_t] = solve_volterra(control, sys);
      th.row(n - 1) = theta.transpose();
      tht.row(n - 1) = theta_t.transpose();
    }
    fam.theta[l - 1] = std::move(th);
    fam.theta_t[l - 1] = std::move(tht);
  }
  return fam;
}

std::vector<VolterraSolution> solve_family(const ControlFamily& controls,
                                           const SigmaProfile& sigma,
                                           const SubdomainMask& mask,
                                           const SpectralBasis& basis,
                                           const TimeGrid& grid) {
  const ModalVolterra modal = solve_modal_family(basis, sigma, grid);
  const int rows = mask.count();
  const int cols = grid.fine_steps() + 1;

  // Nodal factors phi_n(x_i) on omega, scaled by the control coefficients.
  Matrix shapes(rows, basis.truncation());
  for (int c = 0; c < basis.truncation(); ++c)
    shapes.col(c) =
        basis.mode(c + 1).segment(mask.first() - 1, rows);

  std::vector<VolterraSolution> out(grid.coarse_steps());
  for (int l = 1; l <= grid.coarse_steps(); ++l) {
    const int last = grid.fine_index(l);
    Matrix weights = shapes;
    for (int c = 0; c < basis.truncation(); ++c)
      weights.col(c) *= kControlSign * controls.modal[l - 1][c];
    VolterraSolution sol;
    sol.ell = l;
    sol.theta = Matrix::Zero(rows, cols);
    sol.theta_t = Matrix::Zero(rows, cols);
    sol.theta.leftCols(last + 1) = weights * modal.theta[l - 1];
    sol.theta_t.leftCols(last + 1) = weights * modal.theta_t[l - 1];
    out[l - 1] = std::move(sol);
  }
  return out;
}

}  // namespace fracsource
