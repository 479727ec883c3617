#pragma once

#include <memory>
#include <optional>
#include <string>

#include "stfe/coefficients.hpp"
#include "stfe/grid.hpp"

namespace stfe {

Real mass(const Field& u);

// E(u) = integral of 1/2 |u_x|^2 + phi(u) with the forward-difference
// gradient, so the semi-implicit scheme's discrete energy is the natural
// Lyapunov candidate. Passing no potential drops the phi term.
Real energy(const Field& u, const PotentialSpec* pot);

// Entropy density h_beta with h_beta'' (r) = r^beta / m(r) and
// h_beta(1) = h_beta'(1) = 0. Power-law mobilities use the closed forms
//   (1/(b+1)) ((r^{b+2}-1)/(b+2) - r + 1)   b = beta - n not in {-1,-2}
//   r - 1 - log r                            b = -2
//   r log r - r + 1                          b = -1
// and everything else Gauss-Legendre quadrature on dyadic panels, with a
// monotone interpolation cache for repeated field evaluation.
class EntropyDensity {
 public:
  EntropyDensity(MobilitySpec mobility, double beta);

  double beta() const { return beta_; }
  const MobilitySpec& mobility() const { return mobility_; }
  bool has_closed_form() const { return closed_exponent_.has_value(); }

  double operator()(double r) const;  // closed form if available, else cache
  double quadrature(double r) const;  // always the quadrature path

 private:
  struct Cache;
  double cached(double r) const;

  MobilitySpec mobility_;
  double beta_;
  std::optional<double> closed_exponent_;  // beta - n for PowerLaw
  mutable std::shared_ptr<Cache> cache_;
};

// H_beta(u) = integral of h_beta(u).
Real alpha_entropy(const Field& u, const EntropyDensity& ed);

// gamma interval [ (beta+2 -+ sqrt((1-beta)(1+2beta)))/3 ] on which the
// alpha-entropy dissipation functional closes; beta in (-1/2, 1).
struct GammaRange {
  double lo, hi;
};
GammaRange gamma_range(double beta);

// Dissipation integrands along a trajectory: the energy production
// m(u) (u_xx - phi'(u))_x^2 and the three alpha-entropy dissipations
// u^{beta-theta-2} u_x^2, u^{beta-2 gamma+2} (u^gamma)_xx^2,
// u^{beta-2} u_x^4, all with centered differences.
struct Dissipations {
  Real energy = 0;  // D_energy
  Real d1 = 0, d2 = 0, d3 = 0;
};
Dissipations dissipations(const Field& u, const MobilitySpec& mob,
                          const PotentialSpec* pot, double beta, double gamma);

// sup f^{beta-theta} <= ((beta-theta)^2/2) int f^{beta-theta-2} f_x^2
//                       + 2 (int f)^{beta-theta},
// with the gradient term evaluated through differences of f^{(beta-theta)/2}
// (the exact discrete chain rule), which makes the discrete inequality
// inherit the continuum proof.
struct SupBoundCheck {
  Real lhs = 0, rhs = 0;
  bool pass = false;
};
SupBoundCheck check_sup_bound_explicit(const Field& f, double beta, double theta);

// Calibrated ratios for the implicit-constant inequalities; reported, never
// asserted against an invented constant.
struct SupBoundRatios {
  Real r_313 = 0;        // sup f^{beta+5} / [ (int f^{beta-2} f_x^4)(int f)^3 + (int f)^{beta+5} ]
  Real r_energy_min = 0; // sup f^{(2-theta)/2} / [ E(f) + (int f)^{(2-theta)/2} ]
  Real r_energy_max = 0; // sup f^3 / [ E(f)(int f) + (int f)^3 ]
};
SupBoundRatios sup_bound_ratios(const Field& f, double beta,
                                const PotentialSpec& pot);

// Admissible-parameter report: (p > 2 and kappa in [0, p/2-1)) or
// (q = p = 2, kappa = 0); s + 2 - 4(1+kappa)/p - d/q > 0; and
// s + 2 - 4(1+kappa)/p > 1 - s.
struct AdmissibleReport {
  bool integrability_ok = false;
  bool trace_positive_ok = false;
  bool multiplier_ok = false;
  double trace_smoothness = 0;  // s + 2 - 4(1+kappa)/p
  bool admissible() const {
    return integrability_ok && trace_positive_ok && multiplier_ok;
  }
};
AdmissibleReport check_admissible(double p, double kappa, double s, double q,
                                  int d);

// exp of a band-limited Gaussian field: the random positive profiles used
// by the inequality corpus. Modes k = 1..k_max carry N(0,1) coefficients
// scaled by amplitude/k.
Field corpus_field(const TorusGrid& g, int k_max, double amplitude,
                   std::uint64_t seed, std::uint64_t index);

// One diagnostics sample along a trajectory. CSV header:
// t,mass,min_u,max_u,energy,H_beta,D_energy,D1,D2,D3,h1_norm,dt
struct DiagnosticsRow {
  Real t = 0;
  Real mass = 0, min_u = 0, max_u = 0;
  Real energy = 0, H_beta = 0;
  Real D_energy = 0, D1 = 0, D2 = 0, D3 = 0;
  Real h1_norm = 0;
  Real dt_used = 0;
};
extern const char* kDiagnosticsHeader;
std::string format_diagnostics_row(const DiagnosticsRow& row);

}  // namespace stfe
