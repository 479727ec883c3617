#include "stfe/solver.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "stfe/rng.hpp"

namespace stfe {

namespace {

// Pointwise mobility and effective drift coefficient, regularized when a
// cutoff is active.
struct CoefficientTable {
  ArrayXr m;        // mobility (or m_j)
  ArrayXr phi_eff;  // Phi, Phi_strat or Phi_j (+ correction)
  ArrayXr g;        // sqrt(m) (or g_j)
};

double strat_intensity(const SimConfig& cfg) {
  if (cfg.scheme == Scheme::Stratonovich) return cfg.effective_intensity();
  if (cfg.strat_correction_c) return *cfg.strat_correction_c;
  return 0.0;
}

CoefficientTable coefficient_table(const Field& u, const SimConfig& cfg) {
  const int n = u.n();
  CoefficientTable t{ArrayXr(n), ArrayXr(n), ArrayXr(n)};
  const double C = strat_intensity(cfg);
  const PotentialSpec* pot = cfg.potential_ptr();
  if (cfg.cutoff) {
    for (int i = 0; i < n; ++i) {
      const auto e = regularize(cfg.mobility, pot, *cfg.cutoff, u.values[i]);
      t.m[i] = e.m;
      t.g[i] = e.g;
      t.phi_eff[i] = e.Phi + (C / 8.0) * e.m1 * e.m1 / e.m;
    }
    return t;
  }
  if (!(u.values.minCoeff() > 0))
    throw std::domain_error("drift coefficients need u > 0 (or a cutoff)");
  for (int i = 0; i < n; ++i) {
    const auto me = mobility_eval(cfg.mobility, u.values[i]);
    t.m[i] = me.m;
    t.g[i] = std::sqrt(me.m);
    const double Phi =
        pot ? me.m * potential_eval(*pot, u.values[i]).phi2 : 0.0;
    t.phi_eff[i] = Phi + (C / 8.0) * me.m1 * me.m1 / me.m;
  }
  return t;
}

}  // namespace

Field SimConfig::initial_field() const {
  const TorusGrid g(n);
  if (init_file) {
    Field f = read_field_csv(*init_file);
    if (f.n() != n)
      throw std::invalid_argument("initial field file does not match grid");
    return f;
  }
  const double a = init_amp;
  const int k = init_freq;
  return Field::sample(g, [&](double x) {
    return init_mean + a * std::sin(2.0 * std::numbers::pi * k * x);
  });
}

double SimConfig::diag_gamma() const {
  if (gamma_diag) return *gamma_diag;
  const auto r = gamma_range(beta_diag);
  return 0.5 * (r.lo + r.hi);
}

double SimConfig::effective_intensity() const {
  return noise.intensity_constant();
}

std::string SimConfig::validate() const {
  if (n < 8 || n % 2 != 0) return "grid: n must be even and >= 8";
  if (!(T >= 0)) return "time: T must be >= 0";
  if (!(dt0 > 0) || !(dt_min > 0) || !(dt_min < dt0))
    return "time: need 0 < dt_min < dt0";
  if (!(pos_floor > 0)) return "adaptivity: pos_floor must be > 0";
  if (!(drop_ratio > 0 && drop_ratio < 1))
    return "adaptivity: drop_ratio must lie in (0,1)";
  if (!(h1_max > 0)) return "adaptivity: h1_max must be > 0";
  if (paths < 1) return "run: paths must be >= 1";
  if (output_stride < 1) return "output: stride must be >= 1";
  if (!(beta_diag > -0.5 && beta_diag < 1.0))
    return "diagnostics: beta must lie in (-1/2, 1)";
  const auto gr = gamma_range(beta_diag);
  const double g = diag_gamma();
  if (g < gr.lo - 1e-12 || g > gr.hi + 1e-12)
    return "diagnostics: gamma outside the admissible interval";
  const auto mv = validate_mobility(mobility);
  if (!mv.ok) return "mobility: " + mv.message;
  if (scheme == Scheme::Stratonovich) {
    const auto prof = intensity_profile(noise, TorusGrid(n));
    if (prof.max_deviation > 1e-10)
      return "scheme: Stratonovich requires a constant-intensity basis";
  }
  if (strat_correction_c && *strat_correction_c < 0)
    return "scheme: strat_correction_c must be >= 0";
  if (!cutoff) {
    const Field u0 = initial_field();
    if (!(u0.values.minCoeff() > pos_floor))
      return "initial: field must exceed pos_floor (or enable the cutoff)";
  }
  return {};
}

namespace {

DriftSplit drift_from_table(const Field& u, const CoefficientTable& tab) {
  const int n = u.n();
  const Real h = u.h();
  DriftSplit out;
  out.a_faces.resize(n);
  ArrayXr flux(n);
  for (int i = 0; i < n; ++i) {
    const int ip = (i + 1 < n) ? i + 1 : 0;
    out.a_faces[i] = 0.5 * (tab.m[i] + tab.m[ip]);
    flux[i] = 0.5 * (tab.phi_eff[i] + tab.phi_eff[ip]) *
              (u.values[ip] - u.values[i]) / h;
  }
  out.explicit_rhs = flux_divergence(u.grid, flux);
  return out;
}

}  // namespace

DriftSplit drift_split(const Field& u, const SimConfig& cfg) {
  return drift_from_table(u, coefficient_table(u, cfg));
}

namespace {

CyclicPentaLU::Diagonals assemble_resolvent(const ArrayXr& a_faces, double dt,
                                            int n, double h) {
  const double kappa = dt / (h * h * h * h);
  CyclicPentaLU::Diagonals d;
  for (auto& di : d) di.resize(n);
  for (int i = 0; i < n; ++i) {
    const double ai = a_faces[i];
    const double am = a_faces[(i + n - 1) % n];
    d[0][i] = kappa * am;                    // v_{i-2}
    d[1][i] = kappa * (-ai - 3.0 * am);      // v_{i-1}
    d[2][i] = 1.0 + kappa * 3.0 * (ai + am); // v_i
    d[3][i] = kappa * (-3.0 * ai - am);      // v_{i+1}
    d[4][i] = kappa * ai;                    // v_{i+2}
  }
  return d;
}

}  // namespace

namespace {

// The resolvent has unit column sums, so the exact solution carries the
// mean of the rhs; projecting the numerical mean back restores exact mass
// conservation (the shift is within the residual tolerance).
ArrayXr solve_mean_projected(const CyclicPentaLU& lu, const ArrayXr& rhs) {
  ArrayXr x = lu.solve(rhs);
  x += rhs.mean() - x.mean();
  return x;
}

}  // namespace

Field implicit_solve(const ArrayXr& a_faces, const Field& rhs, double dt) {
  if (dt < 0) throw std::invalid_argument("implicit_solve: dt must be >= 0");
  if (!(a_faces.minCoeff() > 0))
    throw std::invalid_argument("implicit_solve: face coefficients must be > 0");
  if (dt == 0) return rhs;
  CyclicPentaLU lu;
  lu.compute(assemble_resolvent(a_faces, dt, rhs.n(), rhs.h()));
  return Field(rhs.grid, solve_mean_projected(lu, rhs.values));
}

namespace {

// One trajectory: every accepted step advances one dyadic interval of the
// base grid [0, T] = M * dt0; rejections descend one level through the
// Brownian bridge, recoveries ascend only at even indices so each step
// stays a single dyadic node.
class Engine {
 public:
  Engine(const SimConfig& cfg, std::uint32_t path)
      : cfg_(cfg), grid_(cfg.n), path_(path),
        entropy_(cfg.mobility, cfg.beta_diag) {
    u0_ = cfg_.initial_field();
    resolve_time_grid();
    psi_ = cfg_.noise.tabulate(grid_);
    trees_.reserve(cfg_.noise.mode_count());
    for (int m = 0; m < cfg_.noise.mode_count(); ++m)
      trees_.emplace_back(cfg_.seed, path_, static_cast<std::uint32_t>(m),
                          dt0_);
  }

  RunResult adaptive() { return loop(/*fixed_level=*/-1, false); }
  RunResult fixed(int level, bool heun) { return loop(level, heun); }

  StepOutcome single(const Field& u, int level, std::uint64_t index) {
    if (u.grid != grid_)
      throw std::invalid_argument("step: field grid does not match config");
    const double dt = dt0_ / static_cast<double>(1ull << level);
    StepOutcome out;
    out.dt_used = dt;
    Field v = propose(u, dt, increments(level, index), false);
    out.accepted = acceptable(v, u.values.minCoeff(), nullptr);
    out.rejections = out.accepted ? 0 : 1;
    out.u_next = out.accepted ? std::move(v) : u;
    return out;
  }

  double dt0() const { return dt0_; }

 private:
  void resolve_time_grid() {
    // explicit-term cap dt0 <= h^2 / (4 max |Phi_eff(u0)|)
    double cap = std::numeric_limits<double>::infinity();
    const auto tab = coefficient_table(u0_, cfg_);
    const double phimax = tab.phi_eff.abs().maxCoeff();
    const double h = grid_.h();
    if (phimax > 0) cap = h * h / (4.0 * phimax);
    double dt = std::min(cfg_.dt0, cap);
    if (cfg_.T <= 0) {
      base_steps_ = 0;
      dt0_ = dt;
      return;
    }
    base_steps_ = static_cast<std::uint64_t>(std::ceil(cfg_.T / dt - 1e-9));
    base_steps_ = std::max<std::uint64_t>(base_steps_, 1);
    dt0_ = cfg_.T / static_cast<double>(base_steps_);
  }

  std::vector<double> increments(int level, std::uint64_t index) const {
    std::vector<double> dW(trees_.size());
    for (std::size_t m = 0; m < trees_.size(); ++m)
      dW[m] = trees_[m].increment(level, index);
    return dW;
  }

  Field propose(const Field& u, double dt, const std::vector<double>& dW,
                bool heun) {
    const CoefficientTable tab = coefficient_table(u, cfg_);
    const DriftSplit ds = drift_from_table(u, tab);
    lu_.compute(assemble_resolvent(ds.a_faces, dt, u.n(), u.h()));
    auto assemble_rhs = [&](const ArrayXr& g_at) {
      ArrayXr rhs = u.values + dt * ds.explicit_rhs.values;
      if (!cfg_.noise.empty())
        rhs += increment_field(cfg_.noise, psi_, g_at, grid_, dW).values;
      return rhs;
    };
    Field v(grid_, solve_mean_projected(lu_, assemble_rhs(tab.g)));
    if (heun && !cfg_.noise.empty()) {
      Field mid(grid_, 0.5 * (u.values + v.values));
      if (!cfg_.cutoff && !(mid.values.minCoeff() > 0)) return v;  // let checks reject
      v = Field(grid_,
                solve_mean_projected(lu_, assemble_rhs(coefficient_table(mid, cfg_).g)));
    }
    return v;
  }

  bool acceptable(const Field& v, double min_prev, double* h1_out) const {
    if (!v.values.allFinite()) return false;
    const double mn = v.values.minCoeff();
    if (!(mn > cfg_.pos_floor)) return false;
    if (!(mn >= cfg_.drop_ratio * min_prev)) return false;
    const double h1 = sobolev_norm(v, 1.0);
    if (h1_out) *h1_out = h1;
    return h1 <= cfg_.h1_max;
  }

  DiagnosticsRow diag(const Field& u, double t, double dt) const {
    DiagnosticsRow r;
    r.t = t;
    r.mass = mass(u);
    r.min_u = u.values.minCoeff();
    r.max_u = u.values.maxCoeff();
    r.energy = energy(u, cfg_.potential_ptr());
    r.H_beta = alpha_entropy(u, entropy_);
    const auto d = dissipations(u, cfg_.mobility, cfg_.potential_ptr(),
                                cfg_.beta_diag, cfg_.diag_gamma());
    r.D_energy = d.energy;
    r.D1 = d.d1;
    r.D2 = d.d2;
    r.D3 = d.d3;
    r.h1_norm = sobolev_norm(u, 1.0);
    r.dt_used = dt;
    return r;
  }

  RunResult loop(int fixed_level, bool heun) {
    const auto t_start = std::chrono::steady_clock::now();
    RunResult res;
    Field u = u0_;
    int level = fixed_level < 0 ? 0 : fixed_level;
    std::uint64_t index = 0;
    std::uint64_t total = base_steps_ << level;
    std::uint64_t streak = 0;
    double dt = dt0_ / static_cast<double>(1ull << level);

    res.diagnostics.push_back(diag(u, 0.0, dt));
    while (index < total) {
      const double t_now = static_cast<double>(index) * dt;
      const auto dW = increments(level, index);
      Field v = propose(u, dt, dW, heun);
      double h1 = 0;
      if (acceptable(v, u.values.minCoeff(), &h1)) {
        u = std::move(v);
        ++index;
        ++res.steps_accepted;
        ++streak;
        if (fixed_level < 0 && streak >= 10 && level > 0 && index % 2 == 0) {
          --level;
          index >>= 1;
          total = base_steps_ << level;
          dt *= 2.0;
          streak = 0;
        }
        if (res.steps_accepted % static_cast<std::uint64_t>(
                                     cfg_.output_stride) == 0 &&
            index < total)
          res.diagnostics.push_back(
              diag(u, static_cast<double>(index) * dt, dt));
      } else {
        ++res.steps_rejected;
        streak = 0;
        const bool can_halve = fixed_level < 0 && 0.5 * dt >= cfg_.dt_min;
        if (!can_halve) {
          res.status = RunResult::Status::BlowUp;
          res.blow_up = BlowUpInfo{t_now, u.values.minCoeff(),
                                   sobolev_norm(u, 1.0),
                                   fixed_level < 0
                                       ? "dt underflow under positivity/H1 monitor"
                                       : "step rejected in fixed-step run"};
          break;
        }
        ++level;
        index <<= 1;
        total = base_steps_ << level;
        dt *= 0.5;
      }
    }
    if (res.status == RunResult::Status::Completed) {
      const double t_end = static_cast<double>(index) * dt;
      if (res.diagnostics.empty() || res.diagnostics.back().t != t_end)
        res.diagnostics.push_back(diag(u, t_end, dt));
    }
    res.final_field = std::move(u);
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      t_start)
            .count();
    return res;
  }

  SimConfig cfg_;
  TorusGrid grid_;
  std::uint32_t path_;
  EntropyDensity entropy_;
  Field u0_;
  double dt0_ = 0;
  std::uint64_t base_steps_ = 0;
  Eigen::MatrixXd psi_;
  std::vector<BrownianTree> trees_;
  CyclicPentaLU lu_;
};

double l2_distance(const Field& a, const Field& b) {
  return lq_norm(Field(a.grid, a.values - b.values), 2.0);
}

double fit_order(const std::vector<double>& gaps) {
  // least-squares slope of log2(gap) against the level index; order = -slope
  const int m = static_cast<int>(gaps.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  for (int i = 0; i < m; ++i) {
    if (!(gaps[i] > 0)) continue;
    const double x = i, y = std::log2(gaps[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++used;
  }
  if (used < 2) return std::numeric_limits<double>::infinity();
  return -(used * sxy - sx * sy) / (used * sxx - sx * sx);
}

template <class Fn>
void parallel_for(int count, int threads, Fn&& body) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

StepOutcome step_once(const Field& u, const SimConfig& cfg,
                      std::uint32_t path_index, int level,
                      std::uint64_t index) {
  const std::string err = cfg.validate();
  if (!err.empty()) throw std::invalid_argument("config: " + err);
  return Engine(cfg, path_index).single(u, level, index);
}

RunResult run(const SimConfig& cfg, std::uint32_t path_index) {
  const std::string err = cfg.validate();
  if (!err.empty()) throw std::invalid_argument("config: " + err);
  return Engine(cfg, path_index).adaptive();
}

RunResult run_fixed_step(const SimConfig& cfg, std::uint32_t path_index,
                         int halvings, bool heun_noise) {
  const std::string err = cfg.validate();
  if (!err.empty()) throw std::invalid_argument("config: " + err);
  return Engine(cfg, path_index).fixed(halvings, heun_noise);
}

std::vector<RunResult> run_ensemble(const SimConfig& cfg, int threads) {
  std::vector<RunResult> out(cfg.paths);
  parallel_for(cfg.paths, threads, [&](int p) {
    out[p] = run(cfg, static_cast<std::uint32_t>(p));
  });
  return out;
}

ConvergenceReport coupled_pair_run(const SimConfig& cfg, int levels) {
  if (levels < 1) throw std::invalid_argument("coupled_pair_run: levels >= 1");
  ConvergenceReport rep;
  rep.mean_l2_gap.assign(levels, 0.0);
  std::vector<std::vector<double>> per_path(cfg.paths);
  std::vector<char> ok(cfg.paths, 0);
  const int threads = static_cast<int>(std::thread::hardware_concurrency());
  parallel_for(cfg.paths, threads, [&](int p) {
    std::vector<Field> finals;
    finals.reserve(levels + 1);
    for (int l = 0; l <= levels; ++l) {
      RunResult r = run_fixed_step(cfg, p, l, false);
      if (r.status != RunResult::Status::Completed) return;  // excluded
      finals.push_back(std::move(r.final_field));
    }
    auto& gaps = per_path[p];
    for (int l = 0; l < levels; ++l)
      gaps.push_back(l2_distance(finals[l], finals[l + 1]));
    ok[p] = 1;
  });
  for (int p = 0; p < cfg.paths; ++p) {
    if (!ok[p]) {
      ++rep.paths_excluded;
      continue;
    }
    ++rep.paths_used;
    for (int l = 0; l < levels; ++l) rep.mean_l2_gap[l] += per_path[p][l];
  }
  if (rep.paths_used > 0)
    for (auto& g : rep.mean_l2_gap) g /= rep.paths_used;
  Engine probe(cfg, 0);
  for (int l = 0; l < levels; ++l)
    rep.level_dt.push_back(probe.dt0() / static_cast<double>(1 << l));
  rep.fitted_order = fit_order(rep.mean_l2_gap);
  return rep;
}

SpatialConvergenceReport spatial_convergence(const SimConfig& cfg, int levels) {
  if (levels < 1) throw std::invalid_argument("spatial_convergence: levels >= 1");
  if (!cfg.noise.empty())
    throw std::invalid_argument("spatial_convergence: deterministic runs only");
  // one shared dt, resolved on the finest grid so the cap binds everywhere
  SimConfig fine = cfg;
  fine.n = cfg.n << levels;
  const double dt_shared = Engine(fine, 0).dt0();
  SpatialConvergenceReport rep;
  std::vector<Field> finals;
  for (int l = 0; l <= levels; ++l) {
    SimConfig c = cfg;
    c.n = cfg.n << l;
    c.dt0 = dt_shared;
    rep.level_n.push_back(c.n);
    RunResult r = run_fixed_step(c, 0, 0, false);
    if (r.status != RunResult::Status::Completed)
      throw std::runtime_error("spatial_convergence: run blew up");
    finals.push_back(std::move(r.final_field));
  }
  for (int l = 0; l < levels; ++l) {
    const Field up = spectral_upsample(finals[l], rep.level_n[l + 1]);
    rep.l2_gap.push_back(l2_distance(up, finals[l + 1]));
  }
  rep.fitted_order = fit_order(rep.l2_gap);
  return rep;
}

SchemeComparison compare_schemes(const SimConfig& cfg, int levels, int threads) {
  SchemeComparison rep;
  const double C = cfg.effective_intensity();

  SimConfig strat = cfg;
  strat.scheme = Scheme::Stratonovich;
  strat.strat_correction_c.reset();

  SimConfig ito_mod = cfg;
  ito_mod.scheme = Scheme::Ito;
  ito_mod.strat_correction_c = C;

  // Identical Brownian keys, identical coefficient arithmetic: bitwise.
  const RunResult ra = run(strat, 0);
  const RunResult rb = run(ito_mod, 0);
  rep.bit_equal =
      ra.status == rb.status &&
      ra.final_field.values.size() == rb.final_field.values.size() &&
      (ra.final_field.values == rb.final_field.values).all();

  SimConfig heun = cfg;
  heun.scheme = Scheme::Ito;
  heun.strat_correction_c.reset();

  rep.heun_gap.assign(levels, 0.0);
  std::vector<std::vector<double>> per_path(cfg.paths);
  std::vector<char> ok(cfg.paths, 0);
  parallel_for(cfg.paths, threads, [&](int p) {
    std::vector<double> gaps;
    for (int l = 0; l < levels; ++l) {
      RunResult re = run_fixed_step(strat, p, l, false);
      RunResult rh = run_fixed_step(heun, p, l, true);
      if (re.status != RunResult::Status::Completed ||
          rh.status != RunResult::Status::Completed)
        return;
      gaps.push_back(l2_distance(re.final_field, rh.final_field));
    }
    per_path[p] = std::move(gaps);
    ok[p] = 1;
  });
  for (int p = 0; p < cfg.paths; ++p) {
    if (!ok[p]) {
      ++rep.paths_excluded;
      continue;
    }
    ++rep.paths_used;
    for (int l = 0; l < levels; ++l) rep.heun_gap[l] += per_path[p][l];
  }
  if (rep.paths_used > 0)
    for (auto& g : rep.heun_gap) g /= rep.paths_used;
  Engine probe(strat, 0);
  for (int l = 0; l < levels; ++l)
    rep.level_dt.push_back(probe.dt0() / static_cast<double>(1 << l));
  rep.fitted_order = fit_order(rep.heun_gap);
  return rep;
}

}  // namespace stfe
