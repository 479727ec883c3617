#include "stfe/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stfe {

namespace {

// r^e with a multiplication chain when e is a small integer; the solver
// evaluates coefficients per grid point per step, so this path is hot.
double real_pow(double r, double e) {
  const double re = std::round(e);
  if (re == e && std::abs(re) <= 40) {
    long n = static_cast<long>(re);
    const bool neg = n < 0;
    unsigned long p = static_cast<unsigned long>(neg ? -n : n);
    double base = r, acc = 1.0;
    while (p) {
      if (p & 1ul) acc *= base;
      base *= base;
      p >>= 1;
    }
    return neg ? 1.0 / acc : acc;
  }
  return std::pow(r, e);
}

void require_positive(double r, const char* who) {
  if (!(r > 0.0)) throw std::domain_error(std::string(who) + ": r must be > 0");
}

std::vector<double> probe_grid() {
  // 400 log-spaced points on [1e-8, 1e8]
  std::vector<double> r(400);
  for (int i = 0; i < 400; ++i)
    r[i] = std::pow(10.0, -8.0 + 16.0 * i / 399.0);
  return r;
}

}  // namespace

MobilitySpec MobilitySpec::power_law(double n) {
  MobilitySpec s;
  s.kind = Kind::PowerLaw;
  s.exponent = n;
  return s;
}

MobilitySpec MobilitySpec::mixed_powers(
    std::vector<std::pair<double, double>> terms) {
  MobilitySpec s;
  s.kind = Kind::MixedPowers;
  s.terms = std::move(terms);
  return s;
}

MobilitySpec MobilitySpec::interpolation(double delta, MobilitySpec a,
                                         MobilitySpec b) {
  if (!(delta > 0)) throw std::invalid_argument("interpolation: delta must be > 0");
  MobilitySpec s;
  s.kind = Kind::NonlinearInterp;
  s.delta = delta;
  s.inner.push_back(std::move(a));
  s.inner.push_back(std::move(b));
  return s;
}

MobilityEval mobility_eval(const MobilitySpec& spec, double r) {
  require_positive(r, "mobility_eval");
  switch (spec.kind) {
    case MobilitySpec::Kind::PowerLaw: {
      const double n = spec.exponent;
      const double v = real_pow(r, n);
      return {v, n * v / r, n * (n - 1) * v / (r * r)};
    }
    case MobilitySpec::Kind::MixedPowers: {
      double m = 0, m1 = 0, m2 = 0;
      for (const auto& [c, n] : spec.terms) {
        const double v = c * real_pow(r, n);
        m += v;
        m1 += n * v / r;
        m2 += n * (n - 1) * v / (r * r);
      }
      return {m, m1, m2};
    }
    case MobilitySpec::Kind::NonlinearInterp: {
      const auto a = mobility_eval(spec.inner[0], r);
      const auto b = mobility_eval(spec.inner[1], r);
      const double d = spec.delta;
      // m = N/D with N = a b, D = delta a + b
      const double N = a.m * b.m;
      const double N1 = a.m1 * b.m + a.m * b.m1;
      const double N2 = a.m2 * b.m + 2 * a.m1 * b.m1 + a.m * b.m2;
      const double D = d * a.m + b.m;
      const double D1 = d * a.m1 + b.m1;
      const double D2 = d * a.m2 + b.m2;
      const double m = N / D;
      const double m1 = (N1 - m * D1) / D;
      const double m2 = (N2 - m * D2 - 2 * m1 * D1) / D;
      return {m, m1, m2};
    }
  }
  throw std::logic_error("mobility_eval: unreachable");
}

namespace {

// Structural exponents of the family (before numeric confirmation).
struct Exponents {
  double n, nu;
  bool ok;
  std::string message;
};

Exponents structural_exponents(const MobilitySpec& spec) {
  switch (spec.kind) {
    case MobilitySpec::Kind::PowerLaw: {
      const double n = spec.exponent;
      if (n < 0 || n >= 6)
        return {0, 0, false, "power-law exponent must lie in [0, 6)"};
      return {n, n, true, {}};
    }
    case MobilitySpec::Kind::MixedPowers: {
      if (spec.terms.empty())
        return {0, 0, false, "mixed powers: no terms"};
      double nmin = std::numeric_limits<double>::infinity();
      double nmax = -std::numeric_limits<double>::infinity();
      for (const auto& [c, n] : spec.terms) {
        if (!(c > 0)) return {0, 0, false, "mixed powers: coefficients must be > 0"};
        nmin = std::min(nmin, n);
        nmax = std::max(nmax, n);
      }
      if (nmax < 0)
        return {0, 0, false, "mixed powers: max exponent must be >= 0"};
      if (nmax >= 6)
        return {0, 0, false, "mixed powers: growth exponent must be < 6"};
      return {nmin, nmax, true, {}};
    }
    case MobilitySpec::Kind::NonlinearInterp: {
      const auto a = structural_exponents(spec.inner[0]);
      const auto b = structural_exponents(spec.inner[1]);
      if (!a.ok) return a;
      if (!b.ok) return b;
      return {std::max(a.n, b.n), std::min(a.nu, b.nu), true, {}};
    }
  }
  return {0, 0, false, "unknown mobility kind"};
}

}  // namespace

MobilityValidation validate_mobility(const MobilitySpec& spec) {
  MobilityValidation v;
  const auto exps = structural_exponents(spec);
  if (!exps.ok) {
    v.message = exps.message;
    return v;
  }
  v.n_degeneracy = exps.n;
  v.nu_growth = exps.nu;
  if (v.nu_growth >= 6) {
    v.message = "growth exponent must be < 6";
    return v;
  }

  double c1 = 0, c2 = 0;
  double mmin = std::numeric_limits<double>::infinity();
  for (double r : probe_grid()) {
    const auto e = mobility_eval(spec, r);
    if (!(e.m > 0)) {
      v.message = "mobility not positive on probe grid";
      return v;
    }
    mmin = std::min(mmin, e.m);
    c1 = std::max(c1, std::abs(e.m1) * r / e.m);
    c2 = std::max(c2, std::abs(e.m2) * r * r / e.m);
    // degeneracy/growth behavior on the probe range
    if (r <= 1e-2) {
      if (e.m / real_pow(r, v.n_degeneracy) > 1e12) {
        v.message = "m(r)/r^n unbounded as r -> 0 on probe grid";
        return v;
      }
      if (e.m / real_pow(r, v.n_degeneracy + 2) < 1e-12) {
        v.message = "m(r)/r^(n+2) vanishes as r -> 0 on probe grid";
        return v;
      }
    }
    if (r >= 1e2) {
      if (e.m / real_pow(r, v.nu_growth) > 1e12) {
        v.message = "m(r)/r^nu unbounded as r -> infinity on probe grid";
        return v;
      }
      if (e.m < 1e-12) {
        v.message = "m(r) not bounded below as r -> infinity";
        return v;
      }
    }
  }
  v.deriv1_constant = c1;
  v.deriv2_constant = c2;
  v.min_value = mmin;
  v.ok = true;
  return v;
}

PotentialSpec PotentialSpec::lennard_jones(double theta, double c_theta) {
  if (!(theta > 2)) throw std::invalid_argument("potential: theta must be > 2");
  PotentialSpec p;
  p.kind = Kind::LennardJonesType;
  p.theta = theta;
  p.c_theta = c_theta;
  return p;
}

PotentialSpec PotentialSpec::pure_power(double theta) {
  if (!(theta > 2)) throw std::invalid_argument("potential: theta must be > 2");
  PotentialSpec p;
  p.kind = Kind::PurePower;
  p.theta = theta;
  p.c_theta = 0;
  return p;
}

PotentialEval potential_eval(const PotentialSpec& spec, double r) {
  require_positive(r, "potential_eval");
  const double t = spec.theta;
  const double pt = real_pow(r, -t);
  if (spec.kind == PotentialSpec::Kind::PurePower)
    return {pt, -t * pt / r, t * (t + 1) * pt / (r * r)};
  const double p2 = 1.0 / (r * r);
  return {pt - p2 + spec.c_theta,
          -t * pt / r + 2 * p2 / r,
          t * (t + 1) * pt / (r * r) - 6 * p2 / (r * r)};
}

PairValidation validate_pair(const MobilitySpec& mob, const PotentialSpec& pot) {
  PairValidation v;
  v.theta = pot.theta;
  const auto mv = validate_mobility(mob);
  if (!mv.ok) {
    v.message = "mobility invalid: " + mv.message;
    return v;
  }
  v.n_degeneracy = mv.n_degeneracy;
  v.theta_required = std::max(2.0, 6.0 - 2.0 * mv.n_degeneracy);
  if (!(pot.theta > v.theta_required)) {
    v.message = "theta must exceed max{2, 6 - 2n}";
    return v;
  }

  double upper = 0, c0 = 0;
  double phimin = std::numeric_limits<double>::infinity();
  double need_c = -std::numeric_limits<double>::infinity();
  for (double r : probe_grid()) {
    const auto e = potential_eval(pot, r);
    phimin = std::min(phimin, e.phi);
    const double ref = real_pow(r, -pot.theta - 2);
    upper = std::max(upper, e.phi2 / ref);
    c0 = std::max(c0, ref - e.phi2);
    if (pot.kind == PotentialSpec::Kind::LennardJonesType)
      need_c = std::max(need_c, 1.0 / (r * r) - real_pow(r, -pot.theta));
  }
  v.upper_constant = upper;
  v.lower_offset_c0 = std::max(0.0, c0);
  v.min_potential = phimin;
  v.min_admissible_c =
      pot.kind == PotentialSpec::Kind::LennardJonesType ? need_c : 0.0;
  if (!(phimin > 0)) {
    v.message = "potential not positive on probe grid";
    return v;
  }
  if (!std::isfinite(upper) || !std::isfinite(v.lower_offset_c0)) {
    v.message = "phi'' sandwich constants not finite on probe grid";
    return v;
  }
  v.ok = true;
  return v;
}

DerivedCoefficients derived_coefficients(const MobilitySpec& mob,
                                         const PotentialSpec* pot, double r,
                                         double c_intensity) {
  require_positive(r, "derived_coefficients");
  if (c_intensity < 0)
    throw std::domain_error("derived_coefficients: intensity must be >= 0");
  const auto me = mobility_eval(mob, r);
  const double g = std::sqrt(me.m);
  const double Phi = pot ? me.m * potential_eval(*pot, r).phi2 : 0.0;
  return {g, me.m1 / (2 * g), Phi,
          Phi + (c_intensity / 8.0) * me.m1 * me.m1 / me.m};
}

namespace {

inline double rho(double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; }
inline double rho1(double t) { return t > 0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }

}  // namespace

double cutoff_eta(double s) {
  if (s <= 1.0) return 0.0;
  if (s >= 2.0) return 1.0;
  const double a = rho(s - 1.0), b = rho(2.0 - s);
  return a / (a + b);
}

double cutoff_eta_derivative(double s) {
  if (s <= 1.0 || s >= 2.0) return 0.0;
  const double a = rho(s - 1.0), b = rho(2.0 - s);
  const double a1 = rho1(s - 1.0), b1 = -rho1(2.0 - s);
  const double d = a + b;
  return (a1 * b - a * b1) / (d * d);
}

CutoffSpec::CutoffSpec(int j_) : j(j_) {
  if (j < 1) throw std::invalid_argument("CutoffSpec: j must be >= 1");
}

RegularizedEval regularize(const MobilitySpec& mob, const PotentialSpec* pot,
                           const CutoffSpec& cut, double r) {
  const double s = cut.j * r;
  if (s <= 1.0) return {1.0, 0.0, 0.0, 0.0};
  const double eta = cutoff_eta(s);
  const double eta1 = cut.j * cutoff_eta_derivative(s);
  const auto me = mobility_eval(mob, r);
  const double Phi = pot ? me.m * potential_eval(*pot, r).phi2 : 0.0;
  return {eta * me.m + (1.0 - eta),
          eta1 * (me.m - 1.0) + eta * me.m1,
          eta * Phi,
          eta * std::sqrt(me.m)};
}

}  // namespace stfe
