#ifndef FRACSOURCE_SOURCE_RECONSTRUCTION_HPP
#define FRACSOURCE_SOURCE_RECONSTRUCTION_HPP

#include <optional>
#include <stdexcept>
#include <vector>

#include "fracsource/volterra_kernel.hpp"

namespace fracsource {

// Violated theorem hypothesis (sigma(T) = 0, c_n = 0, ...); mapped to its own
// exit code by the CLI.
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ReconstructionReport {
  int theorem = 0;  // 1 or 2
  std::vector<double> coefficients;     // recovered f_n, n = 1..e_n
  std::vector<double> cn;               // Theorem-2 factors (empty for Thm 1)
  std::vector<bool> recoverable;        // false where |c_n| below threshold
  std::vector<double> reference;        // true projections when f is known
  std::vector<bool> sign_match;
  Vector recovered;                     // nodal partial sum
  Vector projected;                     // e_n-term projection of the reference
  double relative_l2_error = -1.0;      // vs the reference projection
};

// <u, theta>_{H1(0,T;L2(omega))} = int_0^T int_omega (u theta + u_t theta_t),
// trapezoid in time on the fine grid, trapezoid in space on the omega nodes.
double h1_omega_pairing(const ObservationData& obs,
                        const VolterraSolution& theta,
                        const SubdomainMask& mask, const Mesh1D& mesh,
                        const TimeGrid& grid);

// The same pairing against every member of a Volterra family; entry 0 is the
// tau = 0 horizon and is identically zero.
std::vector<double> pairing_series(const ObservationData& obs,
                                   const std::vector<VolterraSolution>& family,
                                   const SubdomainMask& mask, const Mesh1D& mesh,
                                   const TimeGrid& grid);

// Handling of the tau = 0 endpoint in the outer coarse-grid trapezoids.
// The exact pairing tends to -f_n as tau -> 0, so dropping the endpoint
// (kZero, the zero-window convention) biases f_n by about kappa lambda_n / 2.
// kImplicit keeps the trapezoid on the same nodes but accounts for the
// endpoint through its known limit: the term (kappa/2) w(T) (-f_n) moves to
// the left-hand side, dividing the result by 1 - (kappa/2) w(T) / normalizer.
enum class TauEndpoint { kImplicit, kZero };

// f_n = sigma(T)^{-1} ( -sigma(0) p_{f_M}
//        - int_0^T sigma'(T-tau) p(tau) dtau
//        - lambda_n int_0^T sigma(T-tau) p(tau) dtau ),
// outer integrals by trapezoid over the coarse horizons.
double reconstruct_thm1_from_pairings(const std::vector<double>& pairings,
                                      const SigmaProfile& sigma, double lambda,
                                      const TimeGrid& grid,
                                      TauEndpoint endpoint = TauEndpoint::kImplicit);

// f_n = c_n^{-1} ( -sigma(0) p_{f_M} - int_0^T sigma'(T-tau) p(tau) dtau ).
double reconstruct_thm2_from_pairings(const std::vector<double>& pairings,
                                      const SigmaProfile& sigma, double cn,
                                      const TimeGrid& grid,
                                      TauEndpoint endpoint = TauEndpoint::kImplicit);

double reconstruct_thm1(int n, const ObservationData& obs,
                        const std::vector<VolterraSolution>& family,
                        const SigmaProfile& sigma, double lambda,
                        const SubdomainMask& mask, const Mesh1D& mesh,
                        const TimeGrid& grid);

double reconstruct_thm2(int n, const ObservationData& obs,
                        const std::vector<VolterraSolution>& family,
                        const SigmaProfile& sigma, double lambda,
                        const SubdomainMask& mask, const Mesh1D& mesh,
                        const TimeGrid& grid);

// c_n = sigma(T) - lambda int_0^T e^{lambda(s-T)} sigma(s) ds and the
// integrated-by-parts variant e^{-lambda T} sigma(0)
// + int_0^T e^{lambda(s-T)} sigma'(s) ds.
std::pair<double, double> compute_cn(double lambda, const SigmaProfile& sigma,
                                     double T);

inline constexpr double kCnThreshold = 1e-8;

ReconstructionReport reconstruct_source(
    int theorem, const std::vector<double>& coefficients,
    const std::vector<double>& cn, const SpectralBasis& basis,
    const std::optional<Vector>& reference);

}  // namespace fracsource

#endif
