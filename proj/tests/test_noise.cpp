#include "doctest.h"

#include <cmath>
#include <numbers>

#include "stfe/noise.hpp"

using namespace stfe;
namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("trig basis construction") {
  const NoiseBasis b = build_trig_basis(1, 3.0, 1.0);
  REQUIRE(b.mode_count() == 2);
  CHECK(b.modes[0].sigma == 1.0);
  CHECK(b.intensity_constant() == doctest::Approx(2.0).epsilon(1e-15));

  const NoiseBasis b2 = build_trig_basis(2, 3.0, 1.0);
  CHECK(b2.intensity_constant() == doctest::Approx(2.03125).epsilon(1e-15));

  CHECK_THROWS(build_trig_basis(1, 2.0, 1.0));
  CHECK_THROWS(build_trig_basis(1, 2.5, 1.0));
  CHECK_THROWS(build_trig_basis(0, 3.0, 1.0));
}

TEST_CASE("intensity profile is constant for parity-complete bases") {
  const TorusGrid g(128);
  for (int K : {1, 2, 4, 8}) {
    const NoiseBasis b = build_trig_basis(K, 3.0, 0.7);
    const auto prof = intensity_profile(b, g);
    CHECK(prof.constant == doctest::Approx(b.intensity_constant()).epsilon(1e-13));
    CHECK(prof.max_deviation <= 1e-12);
  }

  // dropping one parity leaves a cos^2 profile
  NoiseBasis lop = build_trig_basis(1, 3.0, 1.0);
  lop.modes.pop_back();
  const auto prof = intensity_profile(lop, g);
  CHECK(prof.max_deviation > 0.5);

  const auto empty = intensity_profile(NoiseBasis{}, g);
  CHECK(empty.constant == 0.0);
  CHECK(empty.max_deviation == 0.0);
}

TEST_CASE("closed-form regularity sums") {
  const NoiseBasis b = build_trig_basis(1, 3.0, 1.0);
  const auto s = regularity_sums(b);
  const double w = 2 * kPi;
  CHECK(s.w2inf ==
        doctest::Approx(2.0 * std::pow(1.0 + w + w * w, 2)).epsilon(1e-14));
  CHECK(s.h2 == doctest::Approx(2.0 * std::pow(1.0 + w * w, 2)).epsilon(1e-14));

  const NoiseBasis bc = build_trig_basis(3, 3.0, 2.0);
  const NoiseBasis b1 = build_trig_basis(3, 3.0, 1.0);
  CHECK(regularity_sums(bc).w2inf ==
        doctest::Approx(4.0 * regularity_sums(b1).w2inf).epsilon(1e-14));
  CHECK(regularity_sums(bc).h2 ==
        doctest::Approx(4.0 * regularity_sums(b1).h2).epsilon(1e-14));

  // adding a frequency level adds exactly its closed-form term
  const auto s3 = regularity_sums(build_trig_basis(3, 3.0, 1.0));
  const auto s4 = regularity_sums(build_trig_basis(4, 3.0, 1.0));
  const double sigma4 = std::pow(4.0, -3.0);
  const double w4 = 2 * kPi * 4;
  CHECK(s4.w2inf - s3.w2inf ==
        doctest::Approx(2.0 * sigma4 * sigma4 * std::pow(1 + w4 + w4 * w4, 2))
            .epsilon(1e-12));
}

TEST_CASE("sampled increments are mass-neutral") {
  const TorusGrid g(128);
  const NoiseBasis b = build_trig_basis(4, 3.0, 0.5);
  const Field u = Field::sample(g, [](double x) {
    return 1.0 + 0.3 * std::sin(2 * kPi * x);
  });
  auto sqrt_m = [](double r) { return r; };  // g for m = u^2
  for (std::uint64_t step = 0; step < 20; ++step) {
    const auto inc = sample_increment(b, u, sqrt_m, 1e-4, 11, 0, step);
    CHECK(static_cast<int>(inc.xi.size()) == b.mode_count());
    CHECK(std::abs(integrate(inc.field)) <= 128 * 1e-16 * 10);
  }
}

TEST_CASE("degenerate increments") {
  const TorusGrid g(64);
  const Field u = Field::constant(g, 1.0);
  auto one = [](double) { return 1.0; };
  const NoiseBasis b = build_trig_basis(2, 3.0, 1.0);
  CHECK(sample_increment(b, u, one, 0.0, 1, 0, 0).field.values.abs().maxCoeff() ==
        0.0);
  CHECK(sample_increment(NoiseBasis{}, u, one, 1e-3, 1, 0, 0)
            .field.values.abs()
            .maxCoeff() == 0.0);
}

TEST_CASE("increment variance matches the discrete derivative profile") {
  // u = 1, g = 1, single cos mode: increment = sqrt(dt) xi D_flux(psi_bar)
  const TorusGrid g(64);
  NoiseBasis b;
  b.amplitude_scale = 1.0;
  b.truncation = 1;
  b.modes.push_back({1, 1.0, false});
  const Field u = Field::constant(g, 1.0);
  auto one = [](double) { return 1.0; };
  const double dt = 1e-3;

  const Field psi_bar_div = [&] {
    const Field psi = Field::sample(g, [&](double x) {
      return std::sqrt(2.0) * std::cos(2 * kPi * x);
    });
    return flux_divergence(g, face_average(psi));
  }();

  const int draws = 10000;
  ArrayXr second_moment = ArrayXr::Zero(g.n);
  for (int d = 0; d < draws; ++d) {
    const auto inc = sample_increment(b, u, one, dt, 123, 0, d);
    second_moment += inc.field.values.square();
  }
  second_moment /= draws;
  for (int i = 0; i < g.n; ++i) {
    const double expect = dt * psi_bar_div.values[i] * psi_bar_div.values[i];
    if (expect > 1e-6)
      CHECK(second_moment[i] == doctest::Approx(expect).epsilon(0.05));
  }
}

TEST_CASE("Brownian tree: bridge halves sum to the parent") {
  const BrownianTree tree(42, 3, 1, 0.125);
  for (int level = 0; level < 6; ++level)
    for (std::uint64_t j = 0; j < 8; ++j) {
      const double parent = tree.increment(level, j);
      const double left = tree.increment(level + 1, 2 * j);
      const double right = tree.increment(level + 1, 2 * j + 1);
      // right is defined as parent - left: one rounding error at most
      CHECK(std::abs(left + right - parent) <=
            4e-16 * (std::abs(parent) + std::abs(left)));
    }
}

TEST_CASE("Brownian tree: reproducible and distribution sane") {
  const BrownianTree a(7, 0, 0, 0.25);
  const BrownianTree b(7, 0, 0, 0.25);
  CHECK(a.increment(3, 5) == b.increment(3, 5));
  CHECK(a.increment(0, 0) != a.increment(0, 1));

  // variance of level-0 increments is dt0
  double s2 = 0;
  const int count = 20000;
  for (int i = 0; i < count; ++i) {
    const double x = a.increment(0, i);
    s2 += x * x;
  }
  CHECK(s2 / count == doctest::Approx(0.25).epsilon(0.05));
}
