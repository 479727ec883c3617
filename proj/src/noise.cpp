#include "stfe/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stfe {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double NoiseMode::eval(double x) const {
  const double arg = kTwoPi * frequency * x;
  return is_sine ? std::sin(arg) : std::cos(arg);
}

double NoiseBasis::intensity_constant() const {
  double s = 0;
  for (std::size_t i = 0; i + 1 < modes.size(); i += 2)
    s += 2.0 * modes[i].sigma * modes[i].sigma;
  return amplitude_scale * amplitude_scale * s;
}

Eigen::MatrixXd NoiseBasis::tabulate(const TorusGrid& g) const {
  Eigen::MatrixXd psi(mode_count(), g.n);
  const double a = amplitude_scale * std::sqrt(2.0);
  for (int m = 0; m < mode_count(); ++m)
    for (int i = 0; i < g.n; ++i)
      psi(m, i) = a * modes[m].sigma * modes[m].eval(g.x(i));
  return psi;
}

NoiseBasis build_trig_basis(int K, double decay, double c) {
  if (K < 1) throw std::invalid_argument("build_trig_basis: K must be >= 1");
  if (!(c > 0)) throw std::invalid_argument("build_trig_basis: c must be > 0");
  if (!(decay > 2.5))
    throw std::invalid_argument(
        "build_trig_basis: decay must exceed 5/2 so that the W^{2,inf} "
        "regularity sum stays finite as K -> infinity");
  NoiseBasis b;
  b.amplitude_scale = c;
  b.truncation = K;
  b.decay = decay;
  b.modes.reserve(2 * K);
  for (int k = 1; k <= K; ++k) {
    const double sigma = std::pow(static_cast<double>(k), -decay);
    b.modes.push_back({k, sigma, false});
    b.modes.push_back({k, sigma, true});
  }
  return b;
}

IntensityProfile intensity_profile(const NoiseBasis& basis, const TorusGrid& g) {
  if (basis.empty()) return {0.0, 0.0};
  const Eigen::MatrixXd psi = basis.tabulate(g);
  ArrayXr sum = ArrayXr::Zero(g.n);
  for (int m = 0; m < basis.mode_count(); ++m)
    sum += psi.row(m).array().square().transpose();
  const double c = sum.mean();
  return {c, (sum - c).abs().maxCoeff()};
}

RegularitySums regularity_sums(const NoiseBasis& basis) {
  RegularitySums s;
  const double c = basis.amplitude_scale;
  for (std::size_t i = 0; i + 1 < basis.modes.size(); i += 2) {
    const int k = basis.modes[i].frequency;
    const double amp2 = 2.0 * c * c * basis.modes[i].sigma * basis.modes[i].sigma;
    const double wk = kTwoPi * k;
    const double w2 = 1.0 + wk + wk * wk;        // sup|f| + sup|f'| + sup|f''|
    const double h2w = (1.0 + wk * wk);          // H^2 weight per mode
    s.w2inf += amp2 * w2 * w2;
    s.h2 += amp2 * h2w * h2w;  // (1/2) mode norm, summed over both parities
  }
  return s;
}

Field increment_field(const NoiseBasis& basis, const Eigen::MatrixXd& psi_table,
                      const ArrayXr& g_values, const TorusGrid& g,
                      const std::vector<double>& dW) {
  const int n = g.n;
  if (static_cast<int>(dW.size()) != basis.mode_count())
    throw std::invalid_argument("increment_field: draw count mismatch");
  ArrayXr face_flux = ArrayXr::Zero(n);
  for (int m = 0; m < basis.mode_count(); ++m) {
    if (dW[m] == 0.0) continue;
    for (int i = 0; i < n; ++i) {
      const int ip = (i + 1) % n;
      const double w_left = g_values[i] * psi_table(m, i);
      const double w_right = g_values[ip] * psi_table(m, ip);
      face_flux[i] += dW[m] * 0.5 * (w_left + w_right);
    }
  }
  return flux_divergence(g, face_flux);
}

NoiseIncrement sample_increment(const NoiseBasis& basis, const Field& u,
                                const std::function<double(double)>& g_eval,
                                double dt, std::uint64_t seed,
                                std::uint32_t path, std::uint64_t step) {
  if (dt < 0) throw std::invalid_argument("sample_increment: dt must be >= 0");
  const int n = u.n();
  NoiseIncrement inc;
  inc.dt = dt;
  inc.xi.resize(basis.mode_count());
  for (int m = 0; m < basis.mode_count(); ++m) {
    rng::Key key{seed, rng::Stream::NoiseAdhoc, path,
                 static_cast<std::uint64_t>(m), 0, step};
    inc.xi[m] = rng::normal(key);
  }
  ArrayXr gv(n);
  for (int i = 0; i < n; ++i) gv[i] = g_eval(u.values[i]);
  std::vector<double> dW(basis.mode_count());
  const double sdt = std::sqrt(dt);
  for (int m = 0; m < basis.mode_count(); ++m) dW[m] = sdt * inc.xi[m];
  if (basis.empty()) {
    inc.field = Field(u.grid, ArrayXr::Zero(n));
    return inc;
  }
  inc.field = increment_field(basis, basis.tabulate(u.grid), gv, u.grid, dW);
  return inc;
}

}  // namespace stfe
