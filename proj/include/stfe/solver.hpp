#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stfe/banded.hpp"
#include "stfe/coefficients.hpp"
#include "stfe/functionals.hpp"
#include "stfe/grid.hpp"
#include "stfe/noise.hpp"

namespace stfe {

enum class Scheme { Ito, Stratonovich };

// Full description of one experiment. Trajectories are a pure function of
// (config, seed, path index).
struct SimConfig {
  int n = 128;
  double dt0 = 1e-6;
  double dt_min = 1e-13;
  double T = 0.05;
  Scheme scheme = Scheme::Ito;

  MobilitySpec mobility = MobilitySpec::power_law(2.0);
  std::optional<PotentialSpec> potential = PotentialSpec::lennard_jones(8.0, 1.0);
  NoiseBasis noise;  // empty = deterministic run
  std::optional<CutoffSpec> cutoff;
  // Ito drift augmented by (c/8)(m')^2/m through the same code path as the
  // Stratonovich scheme, for exact cross-checks.
  std::optional<double> strat_correction_c;

  double pos_floor = 1e-7;
  double drop_ratio = 0.5;
  double h1_max = 1e6;

  int output_stride = 512;
  std::uint64_t seed = 0;
  int paths = 1;

  double beta_diag = 0.0;
  std::optional<double> gamma_diag;  // default: midpoint of gamma_range

  // initial data: mean + amp sin(2 pi freq x), or a field snapshot file
  double init_mean = 1.0;
  double init_amp = 0.0;
  int init_freq = 1;
  std::optional<std::string> init_file;

  Field initial_field() const;
  double diag_gamma() const;
  const PotentialSpec* potential_ptr() const {
    return potential ? &*potential : nullptr;
  }
  // Stratonovich-effective intensity C (exact for parity-complete bases).
  double effective_intensity() const;
  // hard preconditions; returns an error message or empty
  std::string validate() const;
};

struct StepOutcome {
  bool accepted = false;
  Field u_next;
  double dt_used = 0;
  int rejections = 0;
};

struct BlowUpInfo {
  double t = 0;
  double min_u = 0;
  double h1_norm = 0;
  std::string reason;
};

struct RunResult {
  enum class Status { Completed, BlowUp };
  Status status = Status::Completed;
  std::optional<BlowUpInfo> blow_up;
  std::vector<DiagnosticsRow> diagnostics;
  Field final_field;
  std::uint64_t steps_accepted = 0;
  std::uint64_t steps_rejected = 0;
  double wall_seconds = 0;  // never serialized: outputs stay reproducible
};

// Frozen-coefficient split of the drift: face mobilities for the implicit
// fourth-order operator div(a grad lap u) and the explicit flux divergence
// of Phi_eff(u) u_x. Phi_eff is Phi for Ito and the Stratonovich-effective
// coefficient otherwise.
struct DriftSplit {
  ArrayXr a_faces;
  Field explicit_rhs;
};
DriftSplit drift_split(const Field& u, const SimConfig& cfg);

// Backward-Euler resolvent (I + dt L_a)^-1 rhs with
// L_a v = div(a grad lap v) in flux form; the cyclic pentadiagonal system
// has unit column sums, so the solve conserves mass exactly.
Field implicit_solve(const ArrayXr& a_faces, const Field& rhs, double dt);

// One step proposal over the dyadic interval (level, index) of the
// Brownian tree: semi-implicit update, then the positivity / drop-ratio /
// H^1 acceptance checks. The trajectory loop drives this with halving on
// rejection (same Brownian path through the bridge) and dt recovery after
// ten consecutive acceptances.
StepOutcome step_once(const Field& u, const SimConfig& cfg,
                      std::uint32_t path_index, int level, std::uint64_t index);

RunResult run(const SimConfig& cfg, std::uint32_t path_index);

// Runs `paths` trajectories (worker pool) and returns them in path order.
std::vector<RunResult> run_ensemble(const SimConfig& cfg, int threads);

// Strong self-convergence on a single Brownian path per level set:
// fixed-step runs at dt0, dt0/2, ..., dt0/2^levels coupled through the
// bridge. Reports mean L2 differences between consecutive levels and the
// least-squares order.
struct ConvergenceReport {
  std::vector<double> level_dt;
  std::vector<double> mean_l2_gap;  // size levels
  double fitted_order = 0;
  int paths_used = 0;
  int paths_excluded = 0;  // blow-ups at any level
};
ConvergenceReport coupled_pair_run(const SimConfig& cfg, int levels);

// Spatial refinement study (deterministic): n, 2n, 4n, ... with spectral
// upsampling between grids.
struct SpatialConvergenceReport {
  std::vector<int> level_n;
  std::vector<double> l2_gap;
  double fitted_order = 0;
};
SpatialConvergenceReport spatial_convergence(const SimConfig& cfg, int levels);

// Scheme comparison: the Stratonovich code path must be bit-identical to
// Ito-with-modified-Phi on the same Brownian keys; a Heun (midpoint in the
// noise) reference quantifies the strong gap under dt refinement.
struct SchemeComparison {
  bool bit_equal = false;
  std::vector<double> level_dt;
  std::vector<double> heun_gap;  // E ||u_strat - u_heun||_L2 per level
  double fitted_order = 0;
  int paths_used = 0;
  int paths_excluded = 0;
};
SchemeComparison compare_schemes(const SimConfig& cfg, int levels, int threads);

// Fixed-step runs used by the studies above (no halving; a rejected step
// aborts the path).
RunResult run_fixed_step(const SimConfig& cfg, std::uint32_t path_index,
                         int halvings, bool heun_noise);

}  // namespace stfe
