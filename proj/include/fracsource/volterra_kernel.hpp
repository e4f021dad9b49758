#ifndef FRACSOURCE_VOLTERRA_KERNEL_HPP
#define FRACSOURCE_VOLTERRA_KERNEL_HPP

#include <utility>
#include <vector>

#include "fracsource/hum_control.hpp"

namespace fracsource {

// Discrete form of the backward second-kind system for Theta = (theta, theta_t):
//   L0 Theta(t) + int_t^tau M(t,s) Theta(s) ds = (0, h(t))
// with L0 = [[1,0],[0,sigma(0)]] and M(t,s) = [[0,1],[sigma(s-t), sigma'(s-t)]].
// The kernel depends on s - t only, so blocks are stored by lag.
struct VolterraSystem {
  double step = 0.0;        // uniform step of the time subgrid
  int points = 0;           // grid points t_0..t_{points-1}, tau at the end
  double sigma0 = 0.0;
  std::vector<double> sig;  // sigma(d * step), d = 0..points-1
  std::vector<double> dsig; // sigma'(d * step)
};

struct VolterraSolution {
  int ell = 0;       // coarse horizon index, tau = tau_ell
  Matrix theta;      // omega nodes x (M+1), zero beyond tau
  Matrix theta_t;
};

// Trapezoidal block system on a uniform subgrid with `points` nodes covering
// [0, tau]. Fails when sigma(0) = 0 (the equation is then first-kind).
VolterraSystem build_block_system(const SigmaProfile& sigma, int points,
                                  double step);

// Back-substitution through the block-triangular system for one control time
// series h(t_0..tau); terminal data theta(tau) = 0, theta_t(tau) = h(tau)/sigma(0).
std::pair<Vector, Vector> solve_volterra(const Vector& control,
                                         const VolterraSystem& system);

// Max-norm residual of a candidate solution in the trapezoidal discretization.
double volterra_residual(const Vector& control, const Vector& theta,
                         const Vector& theta_t, const VolterraSystem& system);

// One solution per horizon; each solve runs on the fine grid up to tau_ell.
// The control is modal, so the family is assembled from per-mode scalar
// solves with input e^{-lambda_n t}; this matches the per-node solves exactly
// by linearity and is tested against them.
std::vector<VolterraSolution> solve_family(const ControlFamily& controls,
                                           const SigmaProfile& sigma,
                                           const SubdomainMask& mask,
                                           const SpectralBasis& basis,
                                           const TimeGrid& grid);

// Scalar Theta_n^(l) solves with input e^{-lambda_n t}; building block of
// solve_family, exposed for the pairing-factorized reconstruction path.
struct ModalVolterra {
  // mode_theta[l-1] is truncation x (J_l + 1) with J_l = fine index of tau_l
  std::vector<Matrix> theta;
  std::vector<Matrix> theta_t;
};

ModalVolterra solve_modal_family(const SpectralBasis& basis,
                                 const SigmaProfile& sigma,
                                 const TimeGrid& grid);

}  // namespace fracsource

#endif
