#include "stfe/maxreg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "stfe/rng.hpp"

namespace stfe {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double mu_of(int k) {
  const double w = kTwoPi * k;
  return w * w * w * w;
}

}  // namespace

CoefficientPath::CoefficientPath(std::vector<double> times,
                                 std::vector<double> vals, double lam)
    : switch_times(std::move(times)), values(std::move(vals)), lambda(lam) {
  if (switch_times.empty() || switch_times.front() != 0.0)
    throw std::invalid_argument("CoefficientPath: switch times must start at 0");
  if (switch_times.size() != values.size())
    throw std::invalid_argument("CoefficientPath: one value per piece");
  if (!(lambda >= 1.0))
    throw std::invalid_argument("CoefficientPath: lambda must be >= 1");
  for (std::size_t i = 0; i + 1 < switch_times.size(); ++i)
    if (!(switch_times[i] < switch_times[i + 1]))
      throw std::invalid_argument("CoefficientPath: times must increase");
  for (double v : values)
    if (!(v >= 1.0 / lambda - 1e-12 && v <= lambda + 1e-12))
      throw std::invalid_argument("CoefficientPath: value outside [1/lambda, lambda]");
}

int CoefficientPath::piece_of(double t) const {
  const auto it =
      std::upper_bound(switch_times.begin(), switch_times.end(), t);
  const int i = static_cast<int>(it - switch_times.begin()) - 1;
  return std::clamp(i, 0, static_cast<int>(switch_times.size()) - 1);
}

WeightSpec::WeightSpec(double kappa_, double p_, double q_)
    : kappa(kappa_), p(p_), q(q_) {
  if (!(p > 2.0)) throw std::invalid_argument("WeightSpec: p must exceed 2");
  if (!(q >= 2.0)) throw std::invalid_argument("WeightSpec: q must be >= 2");
  if (!(kappa >= 0.0 && kappa < p / 2.0 - 1.0))
    throw std::invalid_argument("WeightSpec: kappa must lie in [0, p/2 - 1)");
}

std::complex<double> ModeTrajectories::u_at(int k, double t) const {
  const int i = a.piece_of(t);
  const double t0 = a.switch_times[i];
  const std::complex<double> u0 = piece_start[k][i];
  const std::complex<double> fk = f.amplitude[k][i];
  if (k == 0) return u0 + fk * (t - t0);
  const double am = a.values[i] * mu_of(k);
  const std::complex<double> c1 = fk / am;
  return c1 + (u0 - c1) * std::exp(-am * (t - t0));
}

std::complex<double> ModeTrajectories::ut_at(int k, double t) const {
  return f.at(k, a, t) - bilap_at(k, t);
}

std::complex<double> ModeTrajectories::bilap_at(int k, double t) const {
  if (k == 0) return 0.0;
  return a.at(t) * mu_of(k) * u_at(k, t);
}

Field ModeTrajectories::field_at(double t, const TorusGrid& g) const {
  ArrayXr v = ArrayXr::Constant(g.n, u_at(0, t).real());
  for (int k = 1; k <= k_modes; ++k) {
    const std::complex<double> uk = u_at(k, t);
    for (int i = 0; i < g.n; ++i) {
      const double arg = kTwoPi * k * g.x(i);
      v[i] += 2.0 * (uk.real() * std::cos(arg) - uk.imag() * std::sin(arg));
    }
  }
  return Field(g, std::move(v));
}

ModeTrajectories solve_exact(const CoefficientPath& a, const ForcingSpec& f,
                             double T, int k_modes, int n_t,
                             const std::vector<std::complex<double>>* u0) {
  if (f.k_modes < k_modes)
    throw std::invalid_argument("solve_exact: forcing has too few modes");
  if (n_t < 1) throw std::invalid_argument("solve_exact: n_t must be >= 1");
  // the sample grid must contain every switch time
  for (double ts : a.switch_times) {
    const double j = ts / T * n_t;
    if (std::abs(j - std::round(j)) > 1e-9)
      throw std::invalid_argument(
          "solve_exact: switch times must lie on the sample grid");
  }

  ModeTrajectories traj;
  traj.a = a;
  traj.f = f;
  traj.T = T;
  traj.k_modes = k_modes;
  traj.n_t = n_t;

  const int pieces = static_cast<int>(a.values.size());
  traj.piece_start.assign(k_modes + 1, {});
  for (int k = 0; k <= k_modes; ++k) {
    auto& starts = traj.piece_start[k];
    starts.resize(pieces);
    std::complex<double> u = u0 ? (*u0)[k] : 0.0;
    for (int i = 0; i < pieces; ++i) {
      starts[i] = u;
      const double t0 = a.switch_times[i];
      const double t1 = (i + 1 < pieces) ? a.switch_times[i + 1] : T;
      const std::complex<double> fk = f.amplitude[k][i];
      if (k == 0) {
        u = u + fk * (t1 - t0);
      } else {
        const double am = a.values[i] * mu_of(k);
        const std::complex<double> c1 = fk / am;
        u = c1 + (u - c1) * std::exp(-am * (t1 - t0));
      }
    }
  }

  traj.u_sample.assign(k_modes + 1, std::vector<std::complex<double>>(n_t + 1));
  traj.bilap_sample.assign(k_modes + 1,
                           std::vector<std::complex<double>>(n_t + 1));
  for (int k = 0; k <= k_modes; ++k)
    for (int j = 0; j <= n_t; ++j) {
      const double t = T * j / n_t;
      traj.u_sample[k][j] = traj.u_at(k, t);
      traj.bilap_sample[k][j] = traj.bilap_at(k, t);
    }
  return traj;
}

double weighted_norm(const ModeTrajectories& traj, const WeightSpec& w,
                     TrajComponent component, int n_x) {
  const TorusGrid g(n_x);
  const auto& st = traj.a.switch_times;
  const int pieces = static_cast<int>(st.size());
  const int per_piece = std::max(1, traj.n_t / pieces);

  // e^{i 2 pi k x} tabulated per mode (phase rotation, no per-point trig)
  Eigen::MatrixXcd phases(traj.k_modes + 1, n_x);
  phases.row(0).setOnes();
  for (int k = 1; k <= traj.k_modes; ++k) {
    std::complex<double> rot = 1.0;
    const std::complex<double> stepk =
        std::exp(std::complex<double>(0.0, kTwoPi * k / n_x));
    for (int i = 0; i < n_x; ++i) {
      phases(k, i) = rot;
      rot *= stepk;
    }
  }

  // After a coefficient or forcing switch, u_t carries e^{-a mu_k s} layers
  // whose widths span many orders of magnitude; a per-piece geometric
  // grading resolves them at fixed point count where a uniform grid cannot.
  constexpr double kGrade = 20.0;
  const double denom = std::expm1(kGrade);

  double acc = 0;
  ArrayXr v(n_x);
  for (int p = 0; p < pieces; ++p) {
    const double t0 = st[p];
    const double t1 = (p + 1 < pieces) ? st[p + 1] : traj.T;
    const double len = t1 - t0;
    double frac_prev = 0.0;
    for (int j = 1; j <= per_piece; ++j) {
      const double frac = std::expm1(kGrade * j / per_piece) / denom;
      const double a = t0 + len * frac_prev;
      const double b = t0 + len * frac;
      frac_prev = frac;
      const double t = 0.5 * (a + b);  // midpoint: a(t), f(t) unambiguous
      v.setZero();
      auto mode_value = [&](int k) -> std::complex<double> {
        switch (component) {
          case TrajComponent::UT: return traj.ut_at(k, t);
          case TrajComponent::BilapU: return traj.bilap_at(k, t);
          case TrajComponent::F: return traj.f.at(k, traj.a, t);
        }
        return 0.0;
      };
      v += mode_value(0).real();
      for (int k = 1; k <= traj.k_modes; ++k) {
        const std::complex<double> c = mode_value(k);
        if (c.real() == 0.0 && c.imag() == 0.0) continue;
        for (int i = 0; i < n_x; ++i) {
          const auto ph = phases(k, i);
          v[i] += 2.0 * (c.real() * ph.real() - c.imag() * ph.imag());
        }
      }
      const double lq = lq_norm(Field(g, v), w.q);
      acc += std::pow(lq, w.p) * std::pow(t, w.kappa) * (b - a);
    }
  }
  return std::pow(acc, 1.0 / w.p);
}

namespace {

// average of t^alpha over [a, b] in closed form
double power_average(double alpha, double a, double b) {
  if (a == 0.0 && alpha <= -1.0) return std::numeric_limits<double>::infinity();
  if (alpha == -1.0)
    return (std::log(b) - std::log(a)) / (b - a);
  return (std::pow(b, alpha + 1.0) - std::pow(a, alpha + 1.0)) /
         ((alpha + 1.0) * (b - a));
}

}  // namespace

double muckenhoupt_constant(double kappa, double p, int max_depth) {
  if (!(p > 1.0)) throw std::invalid_argument("muckenhoupt_constant: p > 1");
  const double pprime = p / (p - 1.0);
  double best = 0;
  for (int depth = 0; depth <= max_depth; ++depth) {
    const int count = 1 << depth;
    for (int j = 0; j < count; ++j) {
      const double a = static_cast<double>(j) / count;
      const double b = static_cast<double>(j + 1) / count;
      const double m1 = power_average(kappa, a, b);
      const double m2 = power_average(kappa * (1.0 - pprime), a, b);
      const double prod = m1 * std::pow(m2, p - 1.0);
      if (std::isinf(m1) || std::isinf(m2))
        return std::numeric_limits<double>::infinity();
      best = std::max(best, prod);
    }
  }
  return best;
}

EnergyIdentity energy_identity(const ModeTrajectories& traj) {
  EnergyIdentity out;
  const auto& a = traj.a;
  const int pieces = static_cast<int>(a.values.size());
  double u_final2 = 0, dissip = 0, work = 0;
  for (int k = 0; k <= traj.k_modes; ++k) {
    const double wgt = (k == 0) ? 1.0 : 2.0;  // conjugate pair multiplicity
    const double lap2 = (k == 0) ? 0.0 : std::pow(kTwoPi * k, 4.0);
    for (int i = 0; i < pieces; ++i) {
      const double t0 = a.switch_times[i];
      const double t1 = (i + 1 < pieces) ? a.switch_times[i + 1] : traj.T;
      const double dt = t1 - t0;
      const std::complex<double> u0 = traj.piece_start[k][i];
      const std::complex<double> fk = traj.f.amplitude[k][i];
      if (k == 0) {
        // u = u0 + f t; lap u = 0
        work += (fk * std::conj(u0 + 0.5 * fk * dt)).real() * dt;
        continue;
      }
      const double am = a.values[i] * mu_of(k);
      const std::complex<double> c1 = fk / am;
      const std::complex<double> c2 = u0 - c1;
      const double e1 = -std::expm1(-am * dt);        // 1 - e^{-am dt}
      const double e2 = -std::expm1(-2.0 * am * dt);  // 1 - e^{-2 am dt}
      const double i1 = e1 / am;
      const double i2 = e2 / (2.0 * am);
      const double int_u2 = std::norm(c1) * dt +
                            2.0 * (c1 * std::conj(c2)).real() * i1 +
                            std::norm(c2) * i2;
      dissip += wgt * a.values[i] * lap2 * int_u2;
      const std::complex<double> int_u = c1 * dt + c2 * i1;
      work += wgt * (fk * std::conj(int_u)).real();
    }
    const std::complex<double> uT = traj.u_at(k, traj.T);
    u_final2 += wgt * std::norm(uT);
  }
  out.lhs = 0.5 * u_final2 + dissip;
  out.rhs = work;
  return out;
}

namespace {

CoefficientPath random_path(double lambda, int pieces, double T,
                            std::uint64_t seed, std::uint64_t trial) {
  std::vector<double> times(pieces), vals(pieces);
  for (int i = 0; i < pieces; ++i) {
    times[i] = T * i / pieces;
    rng::Key key{seed, rng::Stream::MaxregCoeff, 0, trial,
                 static_cast<std::uint64_t>(i), 0};
    vals[i] = rng::uniform(key, 1.0 / lambda, lambda);
  }
  return CoefficientPath(std::move(times), std::move(vals), lambda);
}

ForcingSpec random_forcing(int k_modes, int pieces, std::uint64_t seed) {
  ForcingSpec f;
  f.k_modes = k_modes;
  f.amplitude.assign(k_modes + 1,
                     std::vector<std::complex<double>>(pieces, 0.0));
  for (int k = 1; k <= k_modes; ++k)
    for (int i = 0; i < pieces; ++i) {
      rng::Key kr{seed, rng::Stream::MaxregForcing,
                  static_cast<std::uint32_t>(k),
                  static_cast<std::uint64_t>(i), 0, 0};
      rng::Key ki{seed, rng::Stream::MaxregForcing,
                  static_cast<std::uint32_t>(k),
                  static_cast<std::uint64_t>(i), 1, 0};
      f.amplitude[k][i] = {rng::normal(kr), rng::normal(ki)};
    }
  return f;
}

}  // namespace

MrRatioReport mr_ratio_experiment(double lambda, int trials,
                                  const WeightSpec& w, double T, int k_modes,
                                  int pieces, int n_t, std::uint64_t seed) {
  if (trials < 1 || pieces < 1)
    throw std::invalid_argument("mr_ratio_experiment: trials, pieces >= 1");
  if (n_t % pieces != 0)
    throw std::invalid_argument(
        "mr_ratio_experiment: n_t must be a multiple of pieces");
  MrRatioReport rep;
  rep.lambda = lambda;
  rep.trials = trials;
  rep.pieces = pieces;
  rep.k_modes = k_modes;
  rep.n_t = n_t;
  rep.T = T;
  rep.p = w.p;
  rep.q = w.q;
  rep.kappa = w.kappa;

  const ForcingSpec f = random_forcing(k_modes, pieces, seed);
  auto measure = [&](const CoefficientPath& a, int nt) {
    const ModeTrajectories traj = solve_exact(a, f, T, k_modes, nt);
    const double nf = weighted_norm(traj, w, TrajComponent::F);
    return (weighted_norm(traj, w, TrajComponent::UT) +
            weighted_norm(traj, w, TrajComponent::BilapU)) /
           nf;
  };

  rep.max_r = 0;
  rep.min_r = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const CoefficientPath a = random_path(lambda, pieces, T, seed, t);
    const double r = measure(a, n_t);
    const double r2 = measure(a, 2 * n_t);
    rep.ratios.push_back(r);
    rep.mean_r += r / trials;
    rep.max_r = std::max(rep.max_r, r);
    rep.min_r = std::min(rep.min_r, r);
    rep.max_rel_change_nt_doubling =
        std::max(rep.max_rel_change_nt_doubling, std::abs(r2 - r) / r);
  }
  rep.spread = rep.max_r / rep.min_r;
  return rep;
}

double caccioppoli_ratio(const ModeTrajectories& traj, const ParabolicCube& q) {
  const double r_space = std::pow(q.r, 0.25);
  const double r2_space = std::pow(2.0 * q.r, 0.25);
  if (!(q.t - 2.0 * q.r >= q.r))
    throw std::invalid_argument("caccioppoli_ratio: cube too close to t=0");
  if (!(q.t + 2.0 * q.r <= traj.T) || !(2.0 * r2_space <= 1.0))
    throw std::invalid_argument("caccioppoli_ratio: cube out of domain");

  auto u_point = [&](double t, double x) {
    double v = traj.u_at(0, t).real();
    for (int k = 1; k <= traj.k_modes; ++k) {
      const std::complex<double> uk = traj.u_at(k, t);
      const double arg = kTwoPi * k * x;
      v += 2.0 * (uk.real() * std::cos(arg) - uk.imag() * std::sin(arg));
    }
    return v;
  };

  const int ns = 32;
  double sup = 0;
  for (int it = 0; it < ns; ++it)
    for (int ix = 0; ix < ns; ++ix) {
      const double t = q.t - q.r + (it + 0.5) * (2.0 * q.r / ns);
      const double x = q.x - r_space + (ix + 0.5) * (2.0 * r_space / ns);
      sup = std::max(sup, std::abs(u_point(t, x)));
    }
  double mean2 = 0;
  for (int it = 0; it < ns; ++it)
    for (int ix = 0; ix < ns; ++ix) {
      const double t = q.t - 2.0 * q.r + (it + 0.5) * (4.0 * q.r / ns);
      const double x = q.x - r2_space + (ix + 0.5) * (2.0 * r2_space / ns);
      const double u = u_point(t, x);
      mean2 += u * u;
    }
  mean2 /= ns * ns;
  return sup / std::sqrt(mean2);
}

CaccioppoliReport caccioppoli_experiment(double lambda, int trials,
                                         const std::vector<double>& cube_scales,
                                         std::uint64_t seed, double T,
                                         int k_modes, int pieces,
                                         int cubes_per_trial) {
  CaccioppoliReport rep;
  rep.scales = cube_scales;
  rep.lambda = lambda;
  rep.trials = trials;
  rep.cubes_per_trial = cubes_per_trial;
  rep.k_modes = k_modes;
  rep.T = T;
  rep.max_ratio.assign(cube_scales.size(), 0.0);

  ForcingSpec f;  // homogeneous
  f.k_modes = k_modes;
  f.amplitude.assign(k_modes + 1, std::vector<std::complex<double>>(pieces, 0.0));

  for (int trial = 0; trial < trials; ++trial) {
    const CoefficientPath a = random_path(lambda, pieces, T, seed, trial);
    std::vector<std::complex<double>> u0(k_modes + 1);
    for (int k = 0; k <= k_modes; ++k) {
      rng::Key kr{seed, rng::Stream::CaccInit,
                  static_cast<std::uint32_t>(k),
                  static_cast<std::uint64_t>(trial), 0, 0};
      rng::Key ki{seed, rng::Stream::CaccInit,
                  static_cast<std::uint32_t>(k),
                  static_cast<std::uint64_t>(trial), 1, 0};
      u0[k] = (k == 0) ? std::complex<double>(rng::normal(kr), 0.0)
                       : std::complex<double>(rng::normal(kr), rng::normal(ki));
    }
    const ModeTrajectories traj = solve_exact(a, f, T, k_modes, pieces, &u0);

    for (std::size_t si = 0; si < cube_scales.size(); ++si) {
      const double r = cube_scales[si];
      for (int c = 0; c < cubes_per_trial; ++c) {
        rng::Key kt{seed, rng::Stream::CaccCube,
                    static_cast<std::uint32_t>(trial),
                    static_cast<std::uint64_t>(si),
                    static_cast<std::uint64_t>(c), 0};
        rng::Key kx{seed, rng::Stream::CaccCube,
                    static_cast<std::uint32_t>(trial),
                    static_cast<std::uint64_t>(si),
                    static_cast<std::uint64_t>(c), 1};
        ParabolicCube q;
        q.r = r;
        q.t = rng::uniform(kt, 3.0 * r, T - 2.0 * r);
        q.x = rng::uniform(kx, 0.0, 1.0);
        rep.max_ratio[si] =
            std::max(rep.max_ratio[si], caccioppoli_ratio(traj, q));
      }
    }
  }
  const double lo =
      *std::min_element(rep.max_ratio.begin(), rep.max_ratio.end());
  const double hi =
      *std::max_element(rep.max_ratio.begin(), rep.max_ratio.end());
  rep.cross_scale_spread = hi / lo;
  return rep;
}

}  // namespace stfe
