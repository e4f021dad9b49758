#ifndef FRACSOURCE_HEAT_DYNAMICS_HPP
#define FRACSOURCE_HEAT_DYNAMICS_HPP

#include <functional>

#include "fracsource/spectral_basis.hpp"

namespace fracsource {

// Two nested uniform partitions of [0,T]: a fine grid t_j = j*T/M used for
// time stepping and convolutions, and a coarse grid tau_l = l*T/f_M of
// control horizons. f_M divides M so every tau_l is a fine point.
class TimeGrid {
 public:
  TimeGrid(double horizon, int fine_steps, int coarse_steps);

  double horizon() const { return T_; }
  int fine_steps() const { return M_; }
  int coarse_steps() const { return fM_; }
  double fine_step() const { return T_ / M_; }
  double coarse_step() const { return T_ / fM_; }
  double fine_time(int j) const { return j * T_ / M_; }
  double coarse_time(int l) const { return l * T_ / fM_; }
  int fine_index(int l) const { return l * (M_ / fM_); }  // of tau_l

 private:
  double T_;
  int M_;
  int fM_;
};

// Temporal factor sigma and its derivative, with the endpoint values cached.
class SigmaProfile {
 public:
  SigmaProfile(std::function<double(double)> value,
               std::function<double(double)> derivative, double horizon);

  double operator()(double t) const { return value_(t); }
  double derivative(double t) const { return derivative_(t); }
  double at_zero() const { return sigma0_; }
  double at_horizon() const { return sigmaT_; }

 private:
  std::function<double(double)> value_;
  std::function<double(double)> derivative_;
  double sigma0_;
  double sigmaT_;
};

// Nodal values over a time grid; column j holds U^j. When produced
// spectrally the exact time derivative comes along.
struct Trajectory {
  Matrix values;      // interior nodes x (steps+1)
  Matrix derivative;  // same shape when present, empty otherwise
  bool has_derivative() const { return derivative.size() > 0; }
};

// u and u_t restricted to the observation nodes, fine grid in time.
struct ObservationData {
  int first_node = 0;  // 1-based interior index of the first observed node
  Matrix u;            // observed nodes x (M+1)
  Matrix ut;
};

using SpaceTimeFn = std::function<double(double, double)>;  // (x, t)

// Implicit Euler for M_h U_t + A_h U = M_h F: each step solves
// (M_h + k A_h) U^{j+1} = M_h U^j + k M_h F^{j+1}.
Trajectory solve_forward(const Mesh1D& mesh, const BandedMatrix& mass,
                         const SymmetricToeplitzMatrix& stiffness,
                         const SpaceTimeFn& source, const Vector& u0,
                         const TimeGrid& grid);

// Backward marching on [0, tau] from a terminal datum at tau (which must be
// a fine grid point): (M_h + k A_h) U^j = M_h U^{j+1} + k M_h F^j.
Trajectory solve_backward(const Mesh1D& mesh, const BandedMatrix& mass,
                          const SymmetricToeplitzMatrix& stiffness,
                          const SpaceTimeFn& source, const Vector& terminal,
                          const TimeGrid& grid, double tau);

// Same backward scheme with the source given as nodal values per fine step
// (columns 0..J where tau = t_J); used by the control verification.
Trajectory solve_backward_sampled(const Mesh1D& mesh, const BandedMatrix& mass,
                                  const SymmetricToeplitzMatrix& stiffness,
                                  const Matrix& source_values,
                                  const Vector& terminal, const TimeGrid& grid,
                                  double tau);

// Partial-sum solution u = sum_n f_n (int_0^t e^{-lambda_n(t-s)} sigma(s) ds)
// phi_n with u(.,0) = 0, plus its exact time derivative.
Trajectory spectral_forward(const Vector& fcoeffs, const SigmaProfile& sigma,
                            const SpectralBasis& basis, const TimeGrid& grid);

// (Kv)(x,t) = int_0^t sigma(r) v(x, t-r) dr, trapezoid on the fine grid.
Trajectory duhamel_K(const Trajectory& w, const SigmaProfile& sigma,
                     const TimeGrid& grid);

// (K* theta)(x,t) = sigma(0) theta_t(x,t)
//   + int_t^T ( sigma(r-t) theta(x,r) + sigma'(r-t) theta_t(x,r) ) dr.
Trajectory apply_K_star(const Trajectory& theta, const SigmaProfile& sigma,
                        const TimeGrid& grid);

// Restrict to the observation nodes. u_t comes from the spectral derivative
// when available, else from first-order differences. noise > 0 adds i.i.d.
// Gaussian perturbations of that standard deviation (deterministic seed).
ObservationData observe(const Trajectory& traj, const SubdomainMask& mask,
                        const TimeGrid& grid, double noise = 0.0,
                        unsigned seed = 7u);

}  // namespace fracsource

#endif
