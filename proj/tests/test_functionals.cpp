#include "doctest.h"

#include <cmath>
#include <numbers>

#include "stfe/functionals.hpp"

using namespace stfe;
namespace {
constexpr double kPi = std::numbers::pi;

// test-side spectral evaluation of the alpha-entropy identity pieces
struct BernisTerms {
  double lhs;   // -int u^beta u_x u_xxx
  double main;  // (1/gamma^2) int u^{beta+2-2gamma} (u^gamma)_xx^2
  double d3;    // int u^{beta-2} u_x^4
};

BernisTerms bernis_terms(const Field& u, double beta, double gamma) {
  const Field ux = spectral_diff(u, 1);
  const Field uxxx = spectral_diff(u, 3);
  ArrayXr ugam(u.n());
  for (int i = 0; i < u.n(); ++i) ugam[i] = std::pow(u.values[i], gamma);
  const Field ugxx = spectral_diff(Field(u.grid, std::move(ugam)), 2);

  ArrayXr a(u.n()), b(u.n()), c(u.n());
  for (int i = 0; i < u.n(); ++i) {
    const double ui = u.values[i];
    a[i] = std::pow(ui, beta) * ux.values[i] * uxxx.values[i];
    b[i] = std::pow(ui, beta + 2.0 - 2.0 * gamma) * ugxx.values[i] * ugxx.values[i];
    const double g2 = ux.values[i] * ux.values[i];
    c[i] = std::pow(ui, beta - 2.0) * g2 * g2;
  }
  return {-integrate(Field(u.grid, std::move(a))),
          integrate(Field(u.grid, std::move(b))) / (gamma * gamma),
          integrate(Field(u.grid, std::move(c)))};
}

Field smooth_profile(const TorusGrid& g, int which) {
  return Field::sample(g, [which](double x) {
    switch (which % 5) {
      case 0: return 1.0 + 0.3 * std::sin(2 * kPi * x);
      case 1: return 1.2 + 0.4 * std::cos(2 * kPi * x) + 0.1 * std::sin(4 * kPi * x);
      case 2: return std::exp(0.5 * std::sin(2 * kPi * x));
      case 3: return 2.0 + std::sin(2 * kPi * x) * std::cos(2 * kPi * x);
      default: return 0.8 + 0.25 * std::cos(6 * kPi * x);
    }
  });
}
}  // namespace

TEST_CASE("mass") {
  const TorusGrid g(128);
  CHECK(mass(Field::constant(g, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  const Field f = Field::sample(g, [](double x) {
    return 1.0 + 0.5 * std::sin(2 * kPi * x);
  });
  CHECK(std::abs(mass(f) - 1.0) < 1e-14);
}

TEST_CASE("energy of flat and wavy profiles") {
  const TorusGrid g(2048);
  const auto lj = PotentialSpec::lennard_jones(8.0, 1.0);
  CHECK(energy(Field::constant(g, 1.0), &lj) == doctest::Approx(1.0).epsilon(1e-13));

  // pure gradient part of 1 + 0.1 sin(2 pi x): (1/4) a^2 (2 pi)^2
  const Field wav = Field::sample(g, [](double x) {
    return 1.0 + 0.1 * std::sin(2 * kPi * x);
  });
  CHECK(energy(wav, nullptr) ==
        doctest::Approx(0.25 * 0.01 * 4 * kPi * kPi).epsilon(1e-5));
  CHECK_THROWS(energy(Field::constant(g, -1.0), &lj));
}

TEST_CASE("entropy density closed forms") {
  const EntropyDensity e2(MobilitySpec::power_law(2.0), 0.0);  // beta - n = -2
  CHECK(e2(2.0) == doctest::Approx(2.0 - 1.0 - std::log(2.0)).epsilon(1e-14));
  CHECK(e2(1.0) == 0.0);

  const EntropyDensity e1(MobilitySpec::power_law(1.0), 0.0);  // beta - n = -1
  const double eu = std::exp(1.0);
  CHECK(e1(eu) == doctest::Approx(1.0).epsilon(1e-14));

  const EntropyDensity e0(MobilitySpec::power_law(0.0), 0.0);  // h = (r-1)^2/2
  CHECK(e0(3.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS(e0(-1.0));
  CHECK_THROWS(EntropyDensity(MobilitySpec::power_law(1.0), 1.0));
}

TEST_CASE("quadrature agrees with closed forms across the probe range") {
  for (double n : {0.0, 1.0, 2.0, 3.0, 4.0})
    for (double beta : {-0.4, 0.0, 0.5, 0.9}) {
      const EntropyDensity ed(MobilitySpec::power_law(n), beta);
      REQUIRE(ed.has_closed_form());
      for (int i = 0; i < 40; ++i) {
        const double r = std::pow(10.0, -3.0 + 6.0 * i / 39.0);
        const double cf = ed(r);
        const double q = ed.quadrature(r);
        if (std::abs(cf) > 1e-300)
          CHECK(q == doctest::Approx(cf).epsilon(1e-10));
        else
          CHECK(std::abs(q) <= 1e-14);
      }
    }
}

TEST_CASE("cache path stays within 1e-9 of direct quadrature") {
  const auto mixed = MobilitySpec::mixed_powers({{1.0, 3.0}, {1.0, 2.0}});
  const EntropyDensity ed(mixed, 0.25);
  CHECK_FALSE(ed.has_closed_form());
  for (int i = 0; i < 60; ++i) {
    const double r = std::pow(10.0, -3.0 + 6.0 * i / 59.0);
    const double direct = ed.quadrature(r);
    const double via = ed(r);
    if (std::abs(direct) > 1e-12)
      CHECK(via == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("alpha entropy on flat profiles") {
  const TorusGrid g(128);
  const EntropyDensity ed(MobilitySpec::power_law(2.0), 0.0);
  CHECK(alpha_entropy(Field::constant(g, 1.0), ed) == 0.0);
  CHECK(alpha_entropy(Field::constant(g, 2.0), ed) ==
        doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-13));
  CHECK_THROWS(alpha_entropy(Field::constant(g, -1.0), ed));
}

TEST_CASE("entropy density is convex") {
  for (const auto& m : {MobilitySpec::power_law(2.0),
                        MobilitySpec::mixed_powers({{1.0, 3.0}, {1.0, 1.0}})})
    for (double beta : {-0.4, 0.0, 0.5}) {
      const EntropyDensity ed(m, beta);
      for (int i = 1; i < 50; ++i) {
        const double r = 0.05 + 0.2 * i;
        const double dr = 1e-3 * r;
        const double second = ed(r + dr) - 2 * ed(r) + ed(r - dr);
        CHECK(second >= -1e-12);
      }
    }
}

TEST_CASE("gamma interval endpoints and collapse") {
  // (beta + 2 -+ sqrt((1-beta)(1+2 beta)))/3 at beta = 0: the square root is
  // sqrt(1) = 1, so the interval is [1/3, 1]
  const auto r0 = gamma_range(0.0);
  CHECK(std::abs(r0.lo - 1.0 / 3.0) < 1e-15);
  CHECK(std::abs(r0.hi - 1.0) < 1e-15);

  // width maximizes at beta = 1/4 and collapses monotonically toward both
  // ends of (-1/2, 1)
  double prev = gamma_range(1.0 - 0.5).hi - gamma_range(1.0 - 0.5).lo;
  for (int i = 2; i <= 11; ++i) {
    const auto r = gamma_range(1.0 - std::pow(2.0, -i));
    const double width = r.hi - r.lo;
    CHECK(width < prev);
    prev = width;
  }
  CHECK(prev < 1e-1);
  prev = gamma_range(-0.5 + 0.25).hi - gamma_range(-0.5 + 0.25).lo;
  for (int i = 3; i <= 12; ++i) {
    const auto r = gamma_range(-0.5 + std::pow(2.0, -i));
    const double width = r.hi - r.lo;
    CHECK(width < prev);
    prev = width;
  }
  CHECK(gamma_range(-0.5 + 1e-12).lo == doctest::Approx(0.5).epsilon(1e-6));
  CHECK_THROWS(gamma_range(1.0));
  CHECK_THROWS(gamma_range(-0.5));
}

TEST_CASE("dissipations vanish on constants and scale correctly") {
  const TorusGrid g(128);
  const auto m = MobilitySpec::power_law(2.0);
  const auto lj = PotentialSpec::lennard_jones(8.0, 1.0);
  const auto flat = dissipations(Field::constant(g, 1.5), m, &lj, 0.0, 1.0);
  CHECK(flat.energy == 0.0);
  CHECK(flat.d1 == 0.0);
  CHECK(flat.d2 == doctest::Approx(0.0));
  CHECK(flat.d3 == 0.0);

  const Field u = smooth_profile(g, 0);
  const double beta = 0.0;
  const auto d = dissipations(u, m, &lj, beta, 1.0);
  const auto d2 = dissipations(Field(g, 2.0 * u.values), m, &lj, beta, 1.0);
  CHECK(d2.d3 == doctest::Approx(std::pow(2.0, beta + 2.0) * d.d3).epsilon(1e-12));
  CHECK_THROWS(dissipations(u, m, &lj, 0.0, 5.0));  // gamma out of range
}

TEST_CASE("D3 via fd converges to the spectral evaluation at order ~2") {
  const auto m = MobilitySpec::power_law(2.0);
  const auto lj = PotentialSpec::lennard_jones(8.0, 1.0);
  auto gap = [&](int n) {
    const TorusGrid g(n);
    const Field u = Field::sample(g, [](double x) {
      return 1.0 + 0.25 * std::sin(2 * kPi * x);
    });
    const double fd = dissipations(u, m, &lj, 0.0, 1.0).d3;
    const Field ux = spectral_diff(u, 1);
    ArrayXr v(n);
    for (int i = 0; i < n; ++i) {
      const double g2 = ux.values[i] * ux.values[i];
      v[i] = std::pow(u.values[i], -2.0) * g2 * g2;
    }
    return std::abs(fd - integrate(Field(g, std::move(v))));
  };
  const double e1 = gap(64), e2 = gap(128), e3 = gap(256);
  CHECK(std::log2(e1 / e2) >= 1.8);
  CHECK(std::log2(e2 / e3) >= 1.8);
}

TEST_CASE("explicit sup bound: constants and corpora") {
  const TorusGrid g(256);
  const auto flat = check_sup_bound_explicit(Field::constant(g, 2.0), 0.0, 8.0);
  CHECK(flat.lhs == doctest::Approx(std::pow(2.0, -8.0)).epsilon(1e-13));
  CHECK(flat.rhs == doctest::Approx(2.0 * std::pow(2.0, -8.0)).epsilon(1e-13));
  CHECK(flat.pass);

  for (std::uint64_t i = 0; i < 200; ++i) {
    const Field f = corpus_field(g, g.n / 8, 0.4, 5, i);
    CHECK(check_sup_bound_explicit(f, 0.0, 8.0).pass);
  }

  const Field steep = Field::sample(g, [](double x) {
    return 1.0 + 0.9 * std::sin(2 * kPi * x);
  });
  CHECK(check_sup_bound_explicit(steep, 0.0, 3.0).pass);
}

TEST_CASE("ratio diagnostics") {
  const TorusGrid g(128);
  const auto lj = PotentialSpec::lennard_jones(8.0, 1.0);
  const auto one = sup_bound_ratios(Field::constant(g, 1.0), 0.0, lj);
  CHECK(one.r_313 == doctest::Approx(1.0).epsilon(1e-13));

  // R_313 is exactly scale-invariant
  const Field f = smooth_profile(g, 2);
  const auto a = sup_bound_ratios(f, 0.0, lj);
  const auto b = sup_bound_ratios(Field(g, 1000.0 * f.values), 0.0, lj);
  CHECK(a.r_313 == doctest::Approx(b.r_313).epsilon(1e-11));
}

TEST_CASE("admissible parameter checks") {
  const auto a = check_admissible(2, 0, 1, 2, 1);
  CHECK(a.admissible());
  CHECK(a.trace_smoothness == doctest::Approx(1.0));

  const auto b = check_admissible(2, 0, 0.4, 2, 1);
  CHECK_FALSE(b.admissible());
  CHECK_FALSE(b.multiplier_ok);

  const auto c = check_admissible(4, 0, 1, 2, 2);
  CHECK(c.admissible());
  CHECK(c.trace_smoothness == doctest::Approx(2.0));

  CHECK_FALSE(check_admissible(2, 0.5, 1, 2, 1).integrability_ok);
}

TEST_CASE("gamma endpoints are Bernis-admissible") {
  const TorusGrid g(1024);
  for (double beta : {-0.4, 0.0, 0.5}) {
    const auto range = gamma_range(beta);
    for (double gamma : {range.lo, range.hi}) {
      double min_residual = 1e300;
      for (int w = 0; w < 5; ++w) {
        const Field u = smooth_profile(g, w);
        const auto t = bernis_terms(u, beta, gamma);
        // c(beta, gamma) = 0 at the endpoints: lhs == main up to quadrature
        min_residual = std::min(min_residual, t.lhs - t.main);
      }
      CHECK(min_residual >= -1e-8);
    }
    // interior gamma: the d3 coefficient matches the closed form
    const double gamma = 0.5 * (range.lo + range.hi);
    const double c_formula = -beta * (beta - 1.0) / 3.0 +
                             2.0 * (gamma - 1.0) * (beta - 1.0) / 3.0 -
                             (gamma - 1.0) * (gamma - 1.0);
    CHECK(c_formula > 0);
    for (int w = 0; w < 3; ++w) {
      const Field u = smooth_profile(g, w);
      const auto t = bernis_terms(u, beta, gamma);
      CHECK(t.lhs - t.main == doctest::Approx(c_formula * t.d3).epsilon(1e-8));
    }
  }
}

TEST_CASE("diagnostics row formatting") {
  DiagnosticsRow r;
  r.t = 0.5;
  r.mass = 1.0;
  const std::string s = format_diagnostics_row(r);
  CHECK(s.substr(0, 8) == "0.5,1,0,");
  CHECK(std::string(kDiagnosticsHeader) ==
        "t,mass,min_u,max_u,energy,H_beta,D_energy,D1,D2,D3,h1_norm,dt");
}
