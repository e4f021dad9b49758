#include "fracsource/heat_dynamics.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <random>
#include <stdexcept>

#include "fracsource/quadrature.hpp"

namespace fracsource {

TimeGrid::TimeGrid(double horizon, int fine_steps, int coarse_steps)
    : T_(horizon), M_(fine_steps), fM_(coarse_steps) {
  if (!(horizon > 0.0)) throw std::invalid_argument("time horizon must be > 0");
  if (fine_steps < 1 || coarse_steps < 1)
    throw std::invalid_argument("step counts must be >= 1");
  if (fine_steps % coarse_steps != 0)
    throw std::invalid_argument("coarse steps must divide fine steps");
}

SigmaProfile::SigmaProfile(std::function<double(double)> value,
                           std::function<double(double)> derivative,
                           double horizon)
    : value_(std::move(value)), derivative_(std::move(derivative)) {
  sigma0_ = value_(0.0);
  sigmaT_ = value_(horizon);
  if (!std::isfinite(sigma0_) || !std::isfinite(sigmaT_))
    throw std::invalid_argument("sigma must be finite on [0,T]");
}

namespace {

// Index of t on the fine grid, or -1 when t falls between points.
int fine_index_of(const TimeGrid& grid, double t) {
  const double k = grid.fine_step();
  const int j = static_cast<int>(std::lround(t / k));
  if (j < 0 || j > grid.fine_steps()) return -1;
  if (std::abs(t - j * k) > 1e-12 * grid.horizon()) return -1;
  return j;
}

Matrix sample_source(const Mesh1D& mesh, const SpaceTimeFn& source,
                     const TimeGrid& grid, int last) {
  const int n = mesh.interior();
  Matrix f(n, last + 1);
  for (int j = 0; j <= last; ++j) {
    const double t = grid.fine_time(j);
    for (int i = 0; i < n; ++i) f(i, j) = source(mesh.node(i + 1), t);
  }
  return f;
}

}  // namespace

Trajectory solve_forward(const Mesh1D& mesh, const BandedMatrix& mass,
                         const SymmetricToeplitzMatrix& stiffness,
                         const SpaceTimeFn& source, const Vector& u0,
                         const TimeGrid& grid) {
  const int n = mesh.interior();
  if (u0.size() != n) throw std::invalid_argument("solve_forward: u0 size");
  const double k = grid.fine_step();
  const Matrix md = mass.dense();
  Eigen::LLT<Matrix> step(md + k * stiffness.dense());
  if (step.info() != Eigen::Success)
    throw std::runtime_error("solve_forward: stepping operator not SPD");

  const Matrix f = sample_source(mesh, source, grid, grid.fine_steps());
  Trajectory traj;
  traj.values.resize(n, grid.fine_steps() + 1);
  traj.values.col(0) = u0;
  for (int j = 0; j < grid.fine_steps(); ++j)
    traj.values.col(j + 1) =
        step.solve(md * (traj.values.col(j) + k * f.col(j + 1)));
  return traj;
}

Trajectory solve_backward_sampled(const Mesh1D& mesh, const BandedMatrix& mass,
                                  const SymmetricToeplitzMatrix& stiffness,
                                  const Matrix& source_values,
                                  const Vector& terminal, const TimeGrid& grid,
                                  double tau) {
  const int n = mesh.interior();
  if (terminal.size() != n)
    throw std::invalid_argument("solve_backward: terminal size");
  const int last = fine_index_of(grid, tau);
  if (last < 0)
    throw std::invalid_argument("solve_backward: tau is not a fine grid point");
  if (source_values.rows() != n || source_values.cols() < last + 1)
    throw std::invalid_argument("solve_backward: source shape");
  const double k = grid.fine_step();
  const Matrix md = mass.dense();
  Eigen::LLT<Matrix> step(md + k * stiffness.dense());
  if (step.info() != Eigen::Success)
    throw std::runtime_error("solve_backward: stepping operator not SPD");

  Trajectory traj;
  traj.values.resize(n, last + 1);
  traj.values.col(last) = terminal;
  for (int j = last - 1; j >= 0; --j)
    traj.values.col(j) = step.solve(
        md * (traj.values.col(j + 1) + k * source_values.col(j)));
  return traj;
}

Trajectory solve_backward(const Mesh1D& mesh, const BandedMatrix& mass,
                          const SymmetricToeplitzMatrix& stiffness,
                          const SpaceTimeFn& source, const Vector& terminal,
                          const TimeGrid& grid, double tau) {
  const int last = fine_index_of(grid, tau);
  if (last < 0)
    throw std::invalid_argument("solve_backward: tau is not a fine grid point");
  const Matrix f = sample_source(mesh, source, grid, last);
  return solve_backward_sampled(mesh, mass, stiffness, f, terminal, grid, tau);
}

Trajectory spectral_forward(const Vector& fcoeffs, const SigmaProfile& sigma,
                            const SpectralBasis& basis, const TimeGrid& grid) {
  const int m = static_cast<int>(fcoeffs.size());
  if (m > basis.truncation())
    throw std::invalid_argument("spectral_forward: too many coefficients");
  const int steps = grid.fine_steps();
  const double k = grid.fine_step();

  // I_n(t_{j+1}) = e^{-lambda k} I_n(t_j)
  //   + int_{t_j}^{t_{j+1}} e^{-lambda(t_{j+1}-s)} sigma(s) ds,
  // the increment integrated exactly per step by Gauss quadrature.
  Matrix amp(m, steps + 1);   // I_n(t_j)
  Matrix damp(m, steps + 1);  // sigma(t_j) - lambda_n I_n(t_j)
  for (int c = 0; c < m; ++c) {
    const double lam = basis.lambda(c + 1);
    amp(c, 0) = 0.0;
    damp(c, 0) = sigma(0.0);
    for (int j = 0; j < steps; ++j) {
      const double t1 = grid.fine_time(j + 1);
      const auto g = [&](double s) { return std::exp(-lam * (t1 - s)) * sigma(s); };
      amp(c, j + 1) = std::exp(-lam * k) * amp(c, j) +
                      gauss16(g, grid.fine_time(j), t1);
      damp(c, j + 1) = sigma(t1) - lam * amp(c, j + 1);
    }
  }
  for (int c = 0; c < m; ++c) {
    amp.row(c) *= fcoeffs[c];
    damp.row(c) *= fcoeffs[c];
  }
  Trajectory traj;
  traj.values = basis.modes().leftCols(m) * amp;
  traj.derivative = basis.modes().leftCols(m) * damp;
  return traj;
}

Trajectory duhamel_K(const Trajectory& w, const SigmaProfile& sigma,
                     const TimeGrid& grid) {
  const int steps = grid.fine_steps();
  if (w.values.cols() != steps + 1)
    throw std::invalid_argument("duhamel_K: trajectory/grid mismatch");
  const double k = grid.fine_step();
  Vector sig(steps + 1);
  for (int j = 0; j <= steps; ++j) sig[j] = sigma(grid.fine_time(j));

  Trajectory out;
  out.values = Matrix::Zero(w.values.rows(), steps + 1);
  for (int j = 1; j <= steps; ++j) {
    Vector acc = Vector::Zero(w.values.rows());
    for (int i = 0; i <= j; ++i) {
      const double wt = (i == 0 || i == j) ? 0.5 : 1.0;
      acc += wt * sig[i] * w.values.col(j - i);
    }
    out.values.col(j) = k * acc;
  }
  return out;
}

Trajectory apply_K_star(const Trajectory& theta, const SigmaProfile& sigma,
                        const TimeGrid& grid) {
  const int steps = grid.fine_steps();
  if (!theta.has_derivative())
    throw std::invalid_argument("apply_K_star: theta_t required");
  if (theta.values.cols() != steps + 1)
    throw std::invalid_argument("apply_K_star: trajectory/grid mismatch");
  const double k = grid.fine_step();
  Vector sig(steps + 1), dsig(steps + 1);
  for (int j = 0; j <= steps; ++j) {
    sig[j] = sigma(grid.fine_time(j));
    dsig[j] = sigma.derivative(grid.fine_time(j));
  }

  Trajectory out;
  out.values.resize(theta.values.rows(), steps + 1);
  for (int j = 0; j <= steps; ++j) {
    Vector acc = Vector::Zero(theta.values.rows());
    for (int i = j; i <= steps; ++i) {
      const double wt = (i == j || i == steps) ? 0.5 : 1.0;
      acc += wt * (sig[i - j] * theta.values.col(i) +
                   dsig[i - j] * theta.derivative.col(i));
    }
    if (j == steps) acc.setZero();  // zero-length window
    out.values.col(j) =
        sigma.at_zero() * theta.derivative.col(j) + k * acc;
  }
  return out;
}

ObservationData observe(const Trajectory& traj, const SubdomainMask& mask,
                        const TimeGrid& grid, double noise, unsigned seed) {
  const int steps = grid.fine_steps();
  if (traj.values.cols() != steps + 1)
    throw std::invalid_argument("observe: trajectory/grid mismatch");
  const int rows = mask.count();
  const int offset = mask.first() - 1;

  ObservationData obs;
  obs.first_node = mask.first();
  obs.u = traj.values.middleRows(offset, rows);
  if (traj.has_derivative()) {
    obs.ut = traj.derivative.middleRows(offset, rows);
  } else {
    const double k = grid.fine_step();
    obs.ut.resize(rows, steps + 1);
    for (int j = 0; j < steps; ++j)
      obs.ut.col(j) = (obs.u.col(j + 1) - obs.u.col(j)) / k;
    obs.ut.col(steps) = obs.ut.col(steps - 1);
  }
  if (noise > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, noise);
    for (int j = 0; j <= steps; ++j)
      for (int i = 0; i < rows; ++i) {
        obs.u(i, j) += gauss(rng);
        obs.ut(i, j) += gauss(rng);
      }
  }
  return obs;
}

}  // namespace fracsource
