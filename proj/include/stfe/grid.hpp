#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>

namespace stfe {

using Real = double;
using ArrayXr = Eigen::ArrayXd;

// Uniform periodic grid on the torus of length 1. The spacing is always
// 1/n; only n is stored.
struct TorusGrid {
  int n = 0;

  explicit TorusGrid(int n_points);

  Real h() const { return 1.0 / n; }
  Real x(int i) const { return static_cast<Real>(i) / n; }
  ArrayXr points() const;

  friend bool operator==(const TorusGrid&, const TorusGrid&) = default;
};

// Point samples of a real periodic function on a TorusGrid.
struct Field {
  TorusGrid grid{8};
  ArrayXr values;

  Field() = default;
  Field(TorusGrid g, ArrayXr v);

  int n() const { return grid.n; }
  Real h() const { return grid.h(); }

  template <class Fn>
  static Field sample(TorusGrid g, Fn&& f) {
    ArrayXr v(g.n);
    for (int i = 0; i < g.n; ++i) v[i] = f(g.x(i));
    return Field(g, std::move(v));
  }

  static Field constant(TorusGrid g, Real c) {
    return Field(g, ArrayXr::Constant(g.n, c));
  }
};

// Centered periodic differences. order 1: (f_{i+1}-f_{i-1})/2h,
// order 2: 3-point second difference, order 4: the second difference
// applied twice.
Field fd_diff(const Field& f, int order);

// Exact differentiation in Fourier space: mode k is multiplied by
// (i 2 pi k)^order; the Nyquist mode is zeroed for odd orders so that
// derivatives of real fields stay real.
Field spectral_diff(const Field& f, int order);

// h * sum(f); the periodic trapezoid rule, exact for resolved harmonics.
Real integrate(const Field& f);

// H^s norm from unitary Fourier coefficients: forward FFT divided by n, so
// sobolev_norm(f, 0) equals the L^2 norm. Requires s in [-4, 4].
Real sobolev_norm(const Field& f, Real s);

// (h * sum |f|^q)^(1/q); q may be any real >= 1 or infinity.
Real lq_norm(const Field& f, Real q);

// Face-indexed helpers used by the conservative (flux-form) operators.
// Face i sits between points i and i+1 (mod n).
ArrayXr face_average(const Field& f);            // (f_i + f_{i+1})/2
ArrayXr face_gradient(const Field& f);           // (f_{i+1} - f_i)/h
Field flux_divergence(const TorusGrid& g, const ArrayXr& face_flux);
                                                 // (F_i - F_{i-1})/h

// Unitary spectrum helpers (coefficients of e^{+i 2 pi k x}).
Eigen::VectorXcd spectrum(const Field& f);
Field field_from_spectrum(const TorusGrid& g, const Eigen::VectorXcd& coeff);

// Zero-pad the spectrum onto a finer grid (factor must multiply n exactly).
Field spectral_upsample(const Field& f, int n_fine);

// Snapshot format: "# n=<n> h=<h>" then one value per line, 17 significant
// digits.
void write_field_csv(std::ostream& os, const Field& f);
Field read_field_csv(std::istream& is);
void write_field_csv(const std::string& path, const Field& f);
Field read_field_csv(const std::string& path);

}  // namespace stfe
