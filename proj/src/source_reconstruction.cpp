#include "fracsource/source_reconstruction.hpp"

#include <cmath>

#include "fracsource/quadrature.hpp"

namespace fracsource {

double h1_omega_pairing(const ObservationData& obs,
                        const VolterraSolution& theta,
                        const SubdomainMask& mask, const Mesh1D& mesh,
                        const TimeGrid& grid) {
  const int rows = mask.count();
  const int cols = grid.fine_steps() + 1;
  if (obs.u.rows() != rows || theta.theta.rows() != rows ||
      obs.u.cols() != cols || theta.theta.cols() != cols)
    throw std::invalid_argument("h1_omega_pairing: shape mismatch");
  const double h = mesh.spacing();
  const double k = grid.fine_step();

  double acc = 0.0;
  for (int j = 0; j < cols; ++j) {
    const double wt = (j == 0 || j == cols - 1) ? 0.5 : 1.0;
    double space = 0.0;
    for (int i = 0; i < rows; ++i) {
      const double wx = (i == 0 || i == rows - 1) ? 0.5 : 1.0;
      space += wx * (obs.u(i, j) * theta.theta(i, j) +
                     obs.ut(i, j) * theta.theta_t(i, j));
    }
    acc += wt * space;
  }
  return acc * h * k;
}

std::vector<double> pairing_series(const ObservationData& obs,
                                   const std::vector<VolterraSolution>& family,
                                   const SubdomainMask& mask, const Mesh1D& mesh,
                                   const TimeGrid& grid) {
  if (static_cast<int>(family.size()) != grid.coarse_steps())
    throw std::invalid_argument("pairing_series: family size");
  std::vector<double> p(grid.coarse_steps() + 1, 0.0);
  for (int l = 1; l <= grid.coarse_steps(); ++l)
    p[l] = h1_omega_pairing(obs, family[l - 1], mask, mesh, grid);
  return p;
}

namespace {

// Trapezoid over the coarse horizons of weight(T - tau_l) * p_l; p_0 = 0 so
// the tau = 0 endpoint drops out of the half-weighting.
double coarse_integral(const std::vector<double>& pairings,
                       const std::function<double(double)>& weight,
                       const TimeGrid& grid) {
  const int fM = grid.coarse_steps();
  if (static_cast<int>(pairings.size()) != fM + 1)
    throw std::invalid_argument("reconstruction: pairing series length");
  const double kappa = grid.coarse_step();
  const double T = grid.horizon();
  double acc = 0.0;
  for (int l = 1; l <= fM; ++l) {
    const double wt = (l == fM) ? 0.5 : 1.0;
    acc += wt * weight(T - grid.coarse_time(l)) * pairings[l];
  }
  return acc * kappa;
}

// Normalizer minus the implicit tau = 0 endpoint mass. Once lambda kappa is
// order one the endpoint panel dominates the whole integral and the linear
// correction overshoots, so the factor is clamped at half the base.
double implicit_denominator(double base, double endpoint_mass) {
  const double d = base - endpoint_mass;
  if (std::abs(d) < 0.5 * std::abs(base)) return 0.5 * base;
  return d;
}

}  // namespace

double reconstruct_thm1_from_pairings(const std::vector<double>& pairings,
                                      const SigmaProfile& sigma, double lambda,
                                      const TimeGrid& grid,
                                      TauEndpoint endpoint) {
  if (std::abs(sigma.at_horizon()) < 1e-12)
    throw PreconditionError(
        "Theorem 1 requires sigma(T) != 0; use the Theorem 2 formula");
  const double ip_dsig = coarse_integral(
      pairings, [&](double t) { return sigma.derivative(t); }, grid);
  const double ip_sig =
      coarse_integral(pairings, [&](double t) { return sigma(t); }, grid);
  const double pT = pairings.back();
  const double rhs = -sigma.at_zero() * pT - ip_dsig - lambda * ip_sig;
  double denom = sigma.at_horizon();
  if (endpoint == TauEndpoint::kImplicit) {
    const double mass = 0.5 * grid.coarse_step() *
                        (sigma.derivative(grid.horizon()) +
                         lambda * sigma(grid.horizon()));
    denom = implicit_denominator(denom, mass);
  }
  return rhs / denom;
}

double reconstruct_thm2_from_pairings(const std::vector<double>& pairings,
                                      const SigmaProfile& sigma, double cn,
                                      const TimeGrid& grid,
                                      TauEndpoint endpoint) {
  if (std::abs(cn) < kCnThreshold)
    throw PreconditionError(
        "Theorem 2 requires c_n != 0; the coefficient is unrecoverable");
  const double ip_dsig = coarse_integral(
      pairings, [&](double t) { return sigma.derivative(t); }, grid);
  const double rhs = -sigma.at_zero() * pairings.back() - ip_dsig;
  double denom = cn;
  if (endpoint == TauEndpoint::kImplicit)
    denom = implicit_denominator(
        cn, 0.5 * grid.coarse_step() * sigma.derivative(grid.horizon()));
  return rhs / denom;
}

double reconstruct_thm1(int n, const ObservationData& obs,
                        const std::vector<VolterraSolution>& family,
                        const SigmaProfile& sigma, double lambda,
                        const SubdomainMask& mask, const Mesh1D& mesh,
                        const TimeGrid& grid) {
  (void)n;
  const std::vector<double> p = pairing_series(obs, family, mask, mesh, grid);
  return reconstruct_thm1_from_pairings(p, sigma, lambda, grid);
}

double reconstruct_thm2(int n, const ObservationData& obs,
                        const std::vector<VolterraSolution>& family,
                        const SigmaProfile& sigma, double lambda,
                        const SubdomainMask& mask, const Mesh1D& mesh,
                        const TimeGrid& grid) {
  (void)n;
  const std::vector<double> p = pairing_series(obs, family, mask, mesh, grid);
  const auto [cn, cn_alt] = compute_cn(lambda, sigma, grid.horizon());
  (void)cn_alt;
  return reconstruct_thm2_from_pairings(p, sigma, cn, grid);
}

std::pair<double, double> compute_cn(double lambda, const SigmaProfile& sigma,
                                     double T) {
  // e^{lambda(s-T)} concentrates near s = T on the scale 1/lambda; panels are
  // graded toward that endpoint.
  const int levels = 60;
  const auto primary_integrand = [&](double s) {
    return std::exp(lambda * (s - T)) * sigma(s);
  };
  const auto alternate_integrand = [&](double s) {
    return std::exp(lambda * (s - T)) * sigma.derivative(s);
  };
  const double primary =
      sigma.at_horizon() -
      lambda * graded_gauss16(primary_integrand, 0.0, T, /*toward_a=*/false,
                              levels);
  const double alternate =
      std::exp(-lambda * T) * sigma.at_zero() +
      graded_gauss16(alternate_integrand, 0.0, T, /*toward_a=*/false, levels);
  return {primary, alternate};
}

ReconstructionReport reconstruct_source(
    int theorem, const std::vector<double>& coefficients,
    const std::vector<double>& cn, const SpectralBasis& basis,
    const std::optional<Vector>& reference) {
  const int e_n = static_cast<int>(coefficients.size());
  if (e_n > basis.truncation())
    throw std::invalid_argument("reconstruct_source: too many coefficients");

  ReconstructionReport rep;
  rep.theorem = theorem;
  rep.coefficients = coefficients;
  rep.cn = cn;
  rep.recoverable.assign(e_n, true);
  for (int i = 0; i < static_cast<int>(cn.size()) && i < e_n; ++i)
    rep.recoverable[i] = std::abs(cn[i]) >= kCnThreshold;

  Vector coeffs(e_n);
  for (int i = 0; i < e_n; ++i)
    coeffs[i] = rep.recoverable[i] ? coefficients[i] : 0.0;
  rep.recovered = synthesize(coeffs, basis);

  if (reference) {
    const Vector ref_coeffs = project(*reference, basis, e_n);
    rep.reference.assign(ref_coeffs.data(), ref_coeffs.data() + e_n);
    rep.projected = synthesize(ref_coeffs, basis);
    rep.sign_match.resize(e_n);
    for (int i = 0; i < e_n; ++i)
      rep.sign_match[i] = (coefficients[i] >= 0.0) == (ref_coeffs[i] >= 0.0);
    const Vector diff = rep.recovered - rep.projected;
    const double denom = std::sqrt(
        diff.size() > 0 ? rep.projected.dot(mass_apply(basis.mesh(),
                                                       rep.projected))
                        : 0.0);
    const double num = std::sqrt(diff.dot(mass_apply(basis.mesh(), diff)));
    rep.relative_l2_error = denom > 0.0 ? num / denom : num;
  }
  return rep;
}

}  // namespace fracsource
