#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "stfe/grid.hpp"
#include "stfe/rng.hpp"

namespace stfe {

// One trigonometric noise mode c sigma_k sqrt(2) {cos|sin}(2 pi k x).
struct NoiseMode {
  int frequency = 1;
  double sigma = 1.0;
  bool is_sine = false;

  double eval(double x) const;
};

// Truncated conservative noise basis. Frequencies come in cos/sin pairs of
// equal amplitude, which is what makes the pointwise intensity sum
// constant in x.
struct NoiseBasis {
  std::vector<NoiseMode> modes;
  double amplitude_scale = 1.0;  // c
  int truncation = 0;            // K, number of frequency levels
  double decay = 3.0;

  int mode_count() const { return static_cast<int>(modes.size()); }
  bool empty() const { return modes.empty(); }

  // Exact pointwise intensity sum_k psi_k^2 = 2 c^2 sum sigma_k^2 when the
  // basis is parity-complete.
  double intensity_constant() const;

  // psi values tabulated on a grid, one row per mode.
  Eigen::MatrixXd tabulate(const TorusGrid& g) const;
};

// sigma_k = k^-decay, k = 1..K; requires decay > 5/2 so that the W^{2,inf}
// regularity sum stays finite as K grows.
NoiseBasis build_trig_basis(int K, double decay, double c);

struct IntensityProfile {
  double constant = 0;       // grid mean of sum_k psi_k^2
  double max_deviation = 0;  // max pointwise |sum - constant|
};
IntensityProfile intensity_profile(const NoiseBasis& basis, const TorusGrid& g);

struct RegularitySums {
  double w2inf = 0;  // per-frequency sum with the W^{2,inf} weight
  double h2 = 0;     // exact H^2 mode norms (s_psi = 1, q_psi = 2)
};
RegularitySums regularity_sums(const NoiseBasis& basis);

struct NoiseIncrement {
  std::vector<double> xi;  // standard normal draws, one per mode
  double dt = 0;
  Field field;
};

// Conservative Euler-Maruyama increment sum_k dW_k div(g(u) psi_k) in flux
// form: products g(u) psi_k are face-averaged arithmetically and the flux
// divergence telescopes, so every draw integrates to zero exactly.
Field increment_field(const NoiseBasis& basis, const Eigen::MatrixXd& psi_table,
                      const ArrayXr& g_values, const TorusGrid& g,
                      const std::vector<double>& dW);

// Convenience sampler with i.i.d. N(0,1) draws keyed by (seed, path, step).
NoiseIncrement sample_increment(const NoiseBasis& basis, const Field& u,
                                const std::function<double(double)>& g_eval,
                                double dt, std::uint64_t seed,
                                std::uint32_t path, std::uint64_t step);

}  // namespace stfe
