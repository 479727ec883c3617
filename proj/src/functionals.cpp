#include "stfe/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "stfe/rng.hpp"

namespace stfe {

namespace {

void require_positive_field(const Field& u, const char* who) {
  if (!(u.values.minCoeff() > 0))
    throw std::domain_error(std::string(who) + ": field must be positive");
}

// 16-point Gauss-Legendre on [-1, 1], positive half.
constexpr int kGLHalf = 8;
constexpr double kGLNode[kGLHalf] = {
    0.09501250983763744, 0.28160355077925891, 0.45801677765722739,
    0.61787624440264375, 0.75540440835500303, 0.86563120238783174,
    0.94457502307323258, 0.98940093499164993};
constexpr double kGLWeight[kGLHalf] = {
    0.18945061045506850, 0.18260341504492359, 0.16915651939500254,
    0.14959598881657673, 0.12462897125553387, 0.09515851168249278,
    0.06225352393864789, 0.02715245941175409};

template <class Fn>
double gauss_legendre(Fn&& f, double a, double b) {
  const double mid = 0.5 * (a + b), rad = 0.5 * (b - a);
  double acc = 0;
  for (int i = 0; i < kGLHalf; ++i)
    acc += kGLWeight[i] * (f(mid + rad * kGLNode[i]) + f(mid - rad * kGLNode[i]));
  return rad * acc;
}

// Integral of |r - s| s^beta / m(s) over the interval between 1 and r,
// split on dyadic panels so each octave gets its own 16-point rule. This is
// the iterated entropy integral with the inner integral carried out
// exactly.
template <class Fn>
double dyadic_panels(Fn&& f, double r) {
  double acc = 0;
  if (r > 1.0) {
    double a = 1.0;
    while (a < r) {
      const double b = std::min(2.0 * a, r);
      acc += gauss_legendre(f, a, b);
      a = b;
    }
  } else {
    double b = 1.0;
    while (b > r) {
      const double a = std::max(0.5 * b, r);
      acc += gauss_legendre(f, a, b);
      b = a;
    }
  }
  return acc;
}

double entropy_quadrature(const MobilitySpec& mob, double beta, double r) {
  if (!(r > 0)) throw std::domain_error("entropy_density: r must be > 0");
  if (r == 1.0) return 0.0;
  return dyadic_panels(
      [&](double s) {
        return std::abs(r - s) * std::pow(s, beta) / mobility_eval(mob, s).m;
      },
      r);
}

// h_beta'(r), the oriented integral of s^beta / m(s) from 1 to r
double entropy_slope_quadrature(const MobilitySpec& mob, double beta, double r) {
  if (r == 1.0) return 0.0;
  const double mag = dyadic_panels(
      [&](double s) { return std::pow(s, beta) / mobility_eval(mob, s).m; }, r);
  return r > 1.0 ? mag : -mag;
}

// Monotone cubic Hermite interpolation. Slopes are supplied analytically
// and clamped into the Fritsch-Carlson region, which keeps each monotone
// branch of the table monotone without costing accuracy where the data is
// smooth.
struct Pchip {
  std::vector<double> x, y, d;

  void set_clamped_slopes(std::vector<double> slopes) {
    const int n = static_cast<int>(x.size());
    d = std::move(slopes);
    for (int i = 0; i < n; ++i) {
      const double dl = i > 0 ? (y[i] - y[i - 1]) / (x[i] - x[i - 1]) : 0.0;
      const double dr =
          i + 1 < n ? (y[i + 1] - y[i]) / (x[i + 1] - x[i]) : 0.0;
      const double lim = 3.0 * std::max(std::abs(dl), std::abs(dr));
      d[i] = std::clamp(d[i], -lim, lim);
    }
  }

  double eval(double xq) const {
    const auto it = std::upper_bound(x.begin(), x.end(), xq);
    int i = static_cast<int>(it - x.begin()) - 1;
    i = std::clamp(i, 0, static_cast<int>(x.size()) - 2);
    const double h = x[i + 1] - x[i];
    const double t = (xq - x[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return y[i] * (2 * t3 - 3 * t2 + 1) + h * d[i] * (t3 - 2 * t2 + t) +
           y[i + 1] * (-2 * t3 + 3 * t2) + h * d[i + 1] * (t3 - t2);
  }
};

}  // namespace

struct EntropyDensity::Cache {
  std::once_flag built;
  Pchip interp;
  double lo = 1e-7, hi = 1e7;
};

EntropyDensity::EntropyDensity(MobilitySpec mobility, double beta)
    : mobility_(std::move(mobility)), beta_(beta),
      cache_(std::make_shared<Cache>()) {
  if (!(beta > -0.5 && beta < 1.0))
    throw std::invalid_argument("EntropyDensity: beta must lie in (-1/2, 1)");
  if (mobility_.kind == MobilitySpec::Kind::PowerLaw)
    closed_exponent_ = beta_ - mobility_.exponent;
  const double probe = mobility_eval(mobility_, 1.0).m;  // must be defined
  if (!(probe > 0)) throw std::invalid_argument("EntropyDensity: m(1) <= 0");
}

double EntropyDensity::operator()(double r) const {
  if (!(r > 0)) throw std::domain_error("entropy_density: r must be > 0");
  if (closed_exponent_) {
    const double b = *closed_exponent_;
    if (b == -2.0) return r - 1.0 - std::log(r);
    if (b == -1.0) return r * std::log(r) - r + 1.0;
    return ((std::pow(r, b + 2.0) - 1.0) / (b + 2.0) - r + 1.0) / (b + 1.0);
  }
  // quadrature is cheap near 1 and the cache's relative accuracy degrades
  // there (h vanishes quadratically), so split
  if (r > 0.7 && r < 1.45) return quadrature(r);
  if (r < cache_->lo || r > cache_->hi) return quadrature(r);
  return cached(r);
}

double EntropyDensity::quadrature(double r) const {
  return entropy_quadrature(mobility_, beta_, r);
}

double EntropyDensity::cached(double r) const {
  std::call_once(cache_->built, [&] {
    const int per_decade = 256;
    const double llo = std::log(cache_->lo), lhi = std::log(cache_->hi);
    const int n = static_cast<int>(per_decade * (lhi - llo) / std::log(10.0)) + 1;
    cache_->interp.x.resize(n);
    cache_->interp.y.resize(n);
    std::vector<double> slopes(n);
    for (int i = 0; i < n; ++i) {
      const double lx = llo + (lhi - llo) * i / (n - 1);
      const double rx = std::exp(lx);
      cache_->interp.x[i] = lx;
      cache_->interp.y[i] = entropy_quadrature(mobility_, beta_, rx);
      // chain rule for the log abscissa
      slopes[i] = rx * entropy_slope_quadrature(mobility_, beta_, rx);
    }
    cache_->interp.set_clamped_slopes(std::move(slopes));
  });
  return cache_->interp.eval(std::log(r));
}

Real mass(const Field& u) { return integrate(u); }

Real energy(const Field& u, const PotentialSpec* pot) {
  const int n = u.n();
  const Real h = u.h();
  Real acc = 0;
  for (int i = 0; i < n; ++i) {
    const Real du = (u.values[(i + 1) % n] - u.values[i]) / h;
    acc += 0.5 * du * du;
  }
  if (pot) {
    require_positive_field(u, "energy");
    for (int i = 0; i < n; ++i) acc += potential_eval(*pot, u.values[i]).phi;
  }
  return h * acc;
}

Real alpha_entropy(const Field& u, const EntropyDensity& ed) {
  require_positive_field(u, "alpha_entropy");
  Real acc = 0;
  for (int i = 0; i < u.n(); ++i) acc += ed(u.values[i]);
  return u.h() * acc;
}

GammaRange gamma_range(double beta) {
  if (!(beta > -0.5 && beta < 1.0))
    throw std::invalid_argument("gamma_range: beta must lie in (-1/2, 1)");
  const double root = std::sqrt((1.0 - beta) * (1.0 + 2.0 * beta));
  return {(beta + 2.0 - root) / 3.0, (beta + 2.0 + root) / 3.0};
}

Dissipations dissipations(const Field& u, const MobilitySpec& mob,
                          const PotentialSpec* pot, double beta, double gamma) {
  require_positive_field(u, "dissipations");
  const auto range = gamma_range(beta);
  if (gamma < range.lo - 1e-12 || gamma > range.hi + 1e-12)
    throw std::invalid_argument("dissipations: gamma outside the admissible interval");

  const int n = u.n();
  const Field ux = fd_diff(u, 1);
  const Field uxx = fd_diff(u, 2);

  ArrayXr w(n);
  for (int i = 0; i < n; ++i)
    w[i] = uxx.values[i] - (pot ? potential_eval(*pot, u.values[i]).phi1 : 0.0);
  const Field wx = fd_diff(Field(u.grid, std::move(w)), 1);

  ArrayXr ug(n);
  for (int i = 0; i < n; ++i) ug[i] = std::pow(u.values[i], gamma);
  const Field ugxx = fd_diff(Field(u.grid, std::move(ug)), 2);

  Dissipations d;
  ArrayXr e(n), d1(n), d2(n), d3(n);
  const double theta = pot ? pot->theta : 0.0;
  for (int i = 0; i < n; ++i) {
    const double ui = u.values[i];
    e[i] = mobility_eval(mob, ui).m * wx.values[i] * wx.values[i];
    d1[i] = pot ? std::pow(ui, beta - theta - 2.0) * ux.values[i] * ux.values[i]
                : 0.0;
    d2[i] = std::pow(ui, beta - 2.0 * gamma + 2.0) * ugxx.values[i] * ugxx.values[i];
    const double g2 = ux.values[i] * ux.values[i];
    d3[i] = std::pow(ui, beta - 2.0) * g2 * g2;
  }
  d.energy = integrate(Field(u.grid, std::move(e)));
  d.d1 = integrate(Field(u.grid, std::move(d1)));
  d.d2 = integrate(Field(u.grid, std::move(d2)));
  d.d3 = integrate(Field(u.grid, std::move(d3)));
  return d;
}

SupBoundCheck check_sup_bound_explicit(const Field& f, double beta,
                                       double theta) {
  require_positive_field(f, "check_sup_bound_explicit");
  if (!(beta > -0.5 && beta < 1.0))
    throw std::invalid_argument("check_sup_bound_explicit: beta out of range");
  if (!(theta > 2.0))
    throw std::invalid_argument("check_sup_bound_explicit: theta must be > 2");
  const double p = beta - theta;  // < 0
  const int n = f.n();
  const Real h = f.h();
  ArrayXr g(n);
  for (int i = 0; i < n; ++i) g[i] = std::pow(f.values[i], 0.5 * p);
  double grad2 = 0;
  for (int i = 0; i < n; ++i) {
    const double dg = (g[(i + 1) % n] - g[i]) / h;
    grad2 += dg * dg;
  }
  grad2 *= h;  // = (p^2/4) int f^{p-2} f_x^2 via the discrete chain rule
  const double gmax = g.maxCoeff();
  SupBoundCheck out;
  out.lhs = gmax * gmax;
  out.rhs = 2.0 * grad2 + 2.0 * std::pow(integrate(f), p);
  out.pass = out.lhs <= out.rhs * (1.0 + 1e-8);
  return out;
}

SupBoundRatios sup_bound_ratios(const Field& f, double beta,
                                const PotentialSpec& pot) {
  require_positive_field(f, "sup_bound_ratios");
  const int n = f.n();
  const Field fx = fd_diff(f, 1);
  ArrayXr d3(n);
  for (int i = 0; i < n; ++i) {
    const double g2 = fx.values[i] * fx.values[i];
    d3[i] = std::pow(f.values[i], beta - 2.0) * g2 * g2;
  }
  const double q4 = integrate(Field(f.grid, std::move(d3)));
  const double m0 = integrate(f);
  const double fmax = f.values.maxCoeff();
  const double en = energy(f, &pot);

  SupBoundRatios out;
  out.r_313 = std::pow(fmax, beta + 5.0) /
              (q4 * m0 * m0 * m0 + std::pow(m0, beta + 5.0));
  out.r_energy_min = std::pow(f.values.minCoeff(), 0.5 * (2.0 - pot.theta)) /
                     (en + std::pow(m0, 0.5 * (2.0 - pot.theta)));
  out.r_energy_max = fmax * fmax * fmax / (en * m0 + m0 * m0 * m0);
  return out;
}

AdmissibleReport check_admissible(double p, double kappa, double s, double q,
                                  int d) {
  AdmissibleReport r;
  const bool weighted = p > 2.0 && kappa >= 0.0 && kappa < p / 2.0 - 1.0;
  const bool hilbert = p == 2.0 && q == 2.0 && kappa == 0.0;
  r.integrability_ok = (weighted || hilbert) && p >= 2.0 && q >= 2.0;
  r.trace_smoothness = s + 2.0 - 4.0 * (1.0 + kappa) / p;
  r.trace_positive_ok = r.trace_smoothness - static_cast<double>(d) / q > 0.0;
  r.multiplier_ok = r.trace_smoothness > 1.0 - s;
  return r;
}

Field corpus_field(const TorusGrid& g, int k_max, double amplitude,
                   std::uint64_t seed, std::uint64_t index) {
  ArrayXr log_u = ArrayXr::Zero(g.n);
  for (int k = 1; k <= k_max; ++k) {
    rng::Key ka{seed, rng::Stream::Corpus, static_cast<std::uint32_t>(k),
                index, 0, 0};
    rng::Key kb{seed, rng::Stream::Corpus, static_cast<std::uint32_t>(k),
                index, 1, 0};
    const double a = amplitude / k * rng::normal(ka);
    const double b = amplitude / k * rng::normal(kb);
    for (int i = 0; i < g.n; ++i) {
      const double arg = 2.0 * std::numbers::pi * k * g.x(i);
      log_u[i] += a * std::cos(arg) + b * std::sin(arg);
    }
  }
  return Field(g, log_u.exp());
}

const char* kDiagnosticsHeader =
    "t,mass,min_u,max_u,energy,H_beta,D_energy,D1,D2,D3,h1_norm,dt";

std::string format_diagnostics_row(const DiagnosticsRow& row) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                "%.17g,%.17g",
                row.t, row.mass, row.min_u, row.max_u, row.energy, row.H_beta,
                row.D_energy, row.D1, row.D2, row.D3, row.h1_norm, row.dt_used);
  return buf;
}

}  // namespace stfe
