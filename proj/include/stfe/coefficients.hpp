#pragma once

#include <string>
#include <utility>
#include <vector>

namespace stfe {

// Mobility families. All members are smooth on (0, infinity) with analytic
// first and second derivatives; negative arguments are a hard error (only
// the regularized coefficients below accept all of R).
struct MobilitySpec {
  enum class Kind { PowerLaw, MixedPowers, NonlinearInterp };

  Kind kind = Kind::PowerLaw;
  double exponent = 2.0;                             // PowerLaw
  std::vector<std::pair<double, double>> terms;      // MixedPowers: (c_j, n_j)
  double delta = 1.0;                                // NonlinearInterp
  std::vector<MobilitySpec> inner;                   // NonlinearInterp: two specs

  static MobilitySpec power_law(double n);
  static MobilitySpec mixed_powers(std::vector<std::pair<double, double>> terms);
  static MobilitySpec interpolation(double delta, MobilitySpec a, MobilitySpec b);
};

struct MobilityEval {
  double m, m1, m2;  // value, first and second derivative
};
MobilityEval mobility_eval(const MobilitySpec& spec, double r);

struct MobilityValidation {
  bool ok = false;
  std::string message;
  double n_degeneracy = 0;  // largest admissible exponent of degeneracy
  double nu_growth = 0;     // growth exponent, in [0, 6)
  // measured on the log-spaced probe grid [1e-8, 1e8]
  double deriv1_constant = 0;  // sup |m'| r / m
  double deriv2_constant = 0;  // sup |m''| r^2 / m
  double min_value = 0;        // inf m on the probe grid
};
MobilityValidation validate_mobility(const MobilitySpec& spec);

// Interface potentials: phi(r) = r^-theta - r^-2 + c (Lennard-Jones type)
// or phi(r) = r^-theta. theta > 2 in both cases.
struct PotentialSpec {
  enum class Kind { LennardJonesType, PurePower };

  Kind kind = Kind::LennardJonesType;
  double theta = 8.0;
  double c_theta = 1.0;  // LennardJonesType only

  static PotentialSpec lennard_jones(double theta, double c_theta);
  static PotentialSpec pure_power(double theta);
};

struct PotentialEval {
  double phi, phi1, phi2;
};
PotentialEval potential_eval(const PotentialSpec& spec, double r);

// Joint admissibility of a (mobility, potential) pair: theta must exceed
// max{2, 6 - 2n}, and phi'' must sit between r^-theta-2 bounds up to the
// measured constants reported here. Never throws; failures come back as a
// report.
struct PairValidation {
  bool ok = false;
  std::string message;
  double n_degeneracy = 0;
  double theta = 0;
  double theta_required = 0;      // max{2, 6 - 2n}
  double upper_constant = 0;      // sup phi'' r^(theta+2)
  double lower_offset_c0 = 0;     // sup (r^(-theta-2) - phi''), clipped at 0
  double min_potential = 0;       // inf phi on the probe grid
  double min_admissible_c = 0;    // smallest c keeping phi > 0 (LJ only)
};
PairValidation validate_pair(const MobilitySpec& mob, const PotentialSpec& pot);

// Coefficients of the quasilinear form: g = sqrt(m), Phi = m phi'' and the
// Stratonovich-effective drift coefficient Phi + (C/8) (m')^2 / m valid
// under spatially constant noise intensity C. Passing no potential sets
// Phi = 0.
struct DerivedCoefficients {
  double g, g1, Phi, Phi_strat;
};
DerivedCoefficients derived_coefficients(const MobilitySpec& mob,
                                         const PotentialSpec* pot, double r,
                                         double c_intensity);

// Smooth cutoff eta: 0 on s <= 1, 1 on s >= 2, built from rho(t) = exp(-1/t).
double cutoff_eta(double s);
double cutoff_eta_derivative(double s);

struct CutoffSpec {
  int j = 1;
  explicit CutoffSpec(int j_);
};

// Regularized coefficients m_j = eta_j m + (1 - eta_j), Phi_j = eta_j Phi,
// g_j = eta_j g with eta_j(r) = eta(j r). Defined on all of R; for
// r <= 1/j they are exactly (1, 0, 0).
struct RegularizedEval {
  double m, m1, Phi, g;
};
RegularizedEval regularize(const MobilitySpec& mob, const PotentialSpec* pot,
                           const CutoffSpec& cut, double r);

}  // namespace stfe
