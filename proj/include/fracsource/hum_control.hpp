#ifndef FRACSOURCE_HUM_CONTROL_HPP
#define FRACSOURCE_HUM_CONTROL_HPP

#include <vector>

#include "fracsource/heat_dynamics.hpp"

namespace fracsource {

// Global orientation of the emitted control. The printed closed form
// h = sum_n (w0)_n e^{-lambda_n t} phi_n and the operator chain that derives
// it disagree in sign; the backward re-simulation check settles it: with -1
// the controlled state at t=0 shrinks to eps^{-1} w0, with +1 it grows.
inline constexpr double kControlSign = -1.0;

// Mode-space Gramian of {e^{-lambda_n t} phi_n|_omega} over omega x (0,tau):
// G_nm = <phi_n,phi_m>_{L2(omega)} (1 - e^{-(lambda_n+lambda_m)tau})
//        / (lambda_n + lambda_m).
struct ModeGramian {
  double tau = 0.0;
  Matrix G;
};

struct HUMSolution {
  double epsilon = 0.0;
  double tau = 0.0;
  Vector w0;        // nodal solution of (eps^{-1} I + Lambda) w0 = Phi_0(.,0)
  Vector modal;     // (w0)_n, projection onto the basis
  double residual = 0.0;  // relative linear-system residual
  bool ill_conditioned = false;
};

// Controls h^(tau_l)(x,t) = kControlSign sum_n (w0)_n e^{-lambda_n t} phi_n(x)
// on omega x (0, tau_l], zero outside omega and beyond the horizon.
struct ControlFamily {
  double epsilon = 0.0;
  int mode = 0;                  // terminal eigenmode index n
  std::vector<Vector> modal;     // per l = 1..f_M, length n*
};

ModeGramian assemble_gramian(const SpectralBasis& basis,
                             const SubdomainMask& mask, double tau,
                             const Mesh1D& mesh);

// Lambda_N column j: Phi_j(.,0) = sum_n [ sum_m (phi_j)_m G_nm ] phi_n with
// hat-projection coefficients (phi_j)_m from the composite moment rule.
Matrix assemble_lambda(const SpectralBasis& basis, const ModeGramian& gramian,
                       const Mesh1D& mesh);

// Free backward decay of the chosen terminal mode: e^{-lambda_n tau} phi_n.
Vector terminal_dataset(int n, double tau, const SpectralBasis& basis);

HUMSolution solve_hum(const Matrix& lambda, double epsilon, const Vector& phi0,
                      const SpectralBasis& basis, double tau);

ControlFamily build_control_family(const SpectralBasis& basis,
                                   const SubdomainMask& mask,
                                   const TimeGrid& grid, double epsilon,
                                   int mode);

// Same per-horizon HUM solves shared across terminal modes 1..modes; the
// per-horizon operator is factored once.
std::vector<ControlFamily> build_control_families(const SpectralBasis& basis,
                                                  const SubdomainMask& mask,
                                                  const TimeGrid& grid,
                                                  double epsilon, int modes);

// Nodal control values (all interior nodes, zero outside omega) on the fine
// grid columns 0..J with tau_l = t_J.
Matrix control_values(const ControlFamily& family, int ell,
                      const SpectralBasis& basis, const SubdomainMask& mask,
                      const TimeGrid& grid);

// Re-simulate the controlled backward problem by FEM from terminal phi_n and
// return the mass norm of the state at t = 0.
double verify_null_control(const ControlFamily& family, int ell,
                           const SpectralBasis& basis,
                           const SubdomainMask& mask, const Mesh1D& mesh,
                           const BandedMatrix& mass,
                           const SymmetricToeplitzMatrix& stiffness,
                           const TimeGrid& grid);

// FEM cross-check of one Lambda column: free backward solve from the hat at
// node j, then a forward solve forced by its omega-restriction.
Vector lambda_column_fem(int j, double tau, const Mesh1D& mesh,
                         const BandedMatrix& mass,
                         const SymmetricToeplitzMatrix& stiffness,
                         const SubdomainMask& mask, const TimeGrid& grid);

struct EpsilonSelection {
  bool success = false;
  double epsilon = 0.0;   // smallest tested value meeting the criterion
  double achieved = 0.0;  // max controlled-state L2(omega) norm at epsilon
  double threshold = 0.0; // 1% of m(omega)
};

// Smallest eps (decades 10^1..10^8, exponent bisected to 0.1) for which
// max_{n<=cap} ||phi_eps,n^(tau_1)(.,0)||_{L2(omega)} < m(omega) * 1%.
EpsilonSelection select_epsilon(const SpectralBasis& basis,
                                const SubdomainMask& mask, const TimeGrid& grid,
                                int cap);

}  // namespace fracsource

#endif
