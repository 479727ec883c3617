#include "stfe/banded.hpp"

#include <cmath>
#include <stdexcept>

namespace stfe {

void CyclicPentaLU::compute(Diagonals diags) {
  n_ = static_cast<int>(diags[2].size());
  if (n_ < 8) throw std::invalid_argument("CyclicPentaLU: n must be >= 8");
  for (const auto& d : diags)
    if (d.size() != n_)
      throw std::invalid_argument("CyclicPentaLU: diagonal size mismatch");
  d_ = std::move(diags);
  dense_.reset();
  wrap_rows_ = {0, 1, n_ - 2, n_ - 1};

  // acyclic band B: drop the wrap entries
  auto band_entry = [&](int i, int k) -> double {
    const int j = i + k;
    return (j >= 0 && j < n_) ? d_[k + 2][i] : 0.0;
  };

  double scale = 0;
  for (const auto& d : d_) scale = std::max(scale, d.abs().maxCoeff());
  norm_inf_ = 0;
  for (int i = 0; i < n_; ++i) {
    double row = 0;
    for (const auto& d : d_) row += std::abs(d[i]);
    norm_inf_ = std::max(norm_inf_, row);
  }

  l1_.resize(n_); l2_.resize(n_);
  u0_.resize(n_); u1_.resize(n_); u2_.resize(n_);
  band_ok_ = true;
  for (int i = 0; i < n_ && band_ok_; ++i) {
    l2_[i] = (i >= 2) ? band_entry(i, -2) / u0_[i - 2] : 0.0;
    l1_[i] = (i >= 1)
                 ? (band_entry(i, -1) - (i >= 2 ? l2_[i] * u1_[i - 2] : 0.0)) /
                       u0_[i - 1]
                 : 0.0;
    u0_[i] = band_entry(i, 0) - (i >= 2 ? l2_[i] * u2_[i - 2] : 0.0) -
             (i >= 1 ? l1_[i] * u1_[i - 1] : 0.0);
    u1_[i] = band_entry(i, 1) - (i >= 1 ? l1_[i] * u2_[i - 1] : 0.0);
    u2_[i] = band_entry(i, 2);
    if (!(std::abs(u0_[i]) > 1e-13 * scale)) band_ok_ = false;
  }
  if (!band_ok_) return;

  // Woodbury data for the wrap: M = B + sum_r e_r w_r^T. The four
  // B^-1 e_r columns are eliminated in one fused sweep.
  z_.resize(n_, 4);
  z_.setZero();
  for (int c = 0; c < 4; ++c) z_(wrap_rows_[c], c) = 1.0;
  for (int i = 0; i < n_; ++i) {
    if (i >= 1) z_.row(i) -= l1_[i] * z_.row(i - 1);
    if (i >= 2) z_.row(i) -= l2_[i] * z_.row(i - 2);
  }
  for (int i = n_ - 1; i >= 0; --i) {
    if (i + 1 < n_) z_.row(i) -= u1_[i] * z_.row(i + 1);
    if (i + 2 < n_) z_.row(i) -= u2_[i] * z_.row(i + 2);
    z_.row(i) /= u0_[i];
  }
  Eigen::Matrix4d s = Eigen::Matrix4d::Identity();
  // V^T z for each z column; V columns hold the wrap row entries
  for (int c = 0; c < 4; ++c) {
    const auto zc = z_.col(c);
    s(0, c) += d_[0][0] * zc[n_ - 2] + d_[1][0] * zc[n_ - 1];
    s(1, c) += d_[0][1] * zc[n_ - 1];
    s(2, c) += d_[4][n_ - 2] * zc[0];
    s(3, c) += d_[3][n_ - 1] * zc[0] + d_[4][n_ - 1] * zc[1];
  }
  Eigen::FullPivLU<Eigen::Matrix4d> lu(s);
  if (!lu.isInvertible()) {
    band_ok_ = false;
    return;
  }
  s_inv_ = lu.inverse();
}

CyclicPentaLU::Array CyclicPentaLU::band_solve(const Array& b) const {
  work_.resize(n_);
  Array& y = work_;
  y[0] = b[0];
  y[1] = b[1] - l1_[1] * y[0];
  for (int i = 2; i < n_; ++i)
    y[i] = b[i] - l1_[i] * y[i - 1] - l2_[i] * y[i - 2];
  Array x(n_);
  x[n_ - 1] = y[n_ - 1] / u0_[n_ - 1];
  x[n_ - 2] = (y[n_ - 2] - u1_[n_ - 2] * x[n_ - 1]) / u0_[n_ - 2];
  for (int i = n_ - 3; i >= 0; --i)
    x[i] = (y[i] - u1_[i] * x[i + 1] - u2_[i] * x[i + 2]) / u0_[i];
  return x;
}

CyclicPentaLU::Array CyclicPentaLU::multiply(const Array& x) const {
  Array out(n_);
  for (int i = 2; i < n_ - 2; ++i)
    out[i] = d_[0][i] * x[i - 2] + d_[1][i] * x[i - 1] + d_[2][i] * x[i] +
             d_[3][i] * x[i + 1] + d_[4][i] * x[i + 2];
  for (int i : {0, 1, n_ - 2, n_ - 1}) {
    double acc = 0;
    for (int k = -2; k <= 2; ++k)
      acc += d_[k + 2][i] * x[(i + k + n_) % n_];
    out[i] = acc;
  }
  return out;
}

double CyclicPentaLU::residual_inf(const Array& x, const Array& b) const {
  return (multiply(x) - b).abs().maxCoeff();
}

void CyclicPentaLU::ensure_dense() const {
  if (dense_) return;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int k = -2; k <= 2; ++k) m(i, (i + k + n_) % n_) += d_[k + 2][i];
  dense_ = std::make_shared<Eigen::PartialPivLU<Eigen::MatrixXd>>(m);
}

CyclicPentaLU::Array CyclicPentaLU::solve(const Array& b) const {
  // target: 1e-10 ||b||, with the backward-stable floor eps ||M|| ||x||
  // below which a computed residual cannot be driven in double precision
  // internal target sits well under the contract so that callers measuring
  // the residual through a differently associated operator product (and the
  // mean projection in the time stepper) still land below 1e-10 ||b||
  const double bnorm = std::max(b.abs().maxCoeff(), 1e-300);
  auto tol_for = [&](const Array& x) {
    return 2e-11 * bnorm + 16 * 1e-16 * norm_inf_ * x.abs().maxCoeff();
  };
  if (band_ok_) {
    auto woodbury = [&](const Array& rhs) {
      Array y = band_solve(rhs);
      Eigen::Vector4d w;
      w[0] = d_[0][0] * y[n_ - 2] + d_[1][0] * y[n_ - 1];
      w[1] = d_[0][1] * y[n_ - 1];
      w[2] = d_[4][n_ - 2] * y[0];
      w[3] = d_[3][n_ - 1] * y[0] + d_[4][n_ - 1] * y[1];
      const Eigen::Vector4d alpha = s_inv_ * w;
      return Array(y - (z_ * alpha).array());
    };
    // iterative refinement recovers the residual bound on ill-conditioned
    // systems (dt/h^4 times a high-contrast coefficient)
    Array x = woodbury(b);
    for (int iter = 0; iter < 6; ++iter) {
      const Array r = b - multiply(x);
      if (r.abs().maxCoeff() <= tol_for(x)) return x;
      x += woodbury(r);
    }
    if (residual_inf(x, b) <= tol_for(x)) return x;
  }
  ensure_dense();
  Array x = dense_->solve(b.matrix()).array();
  for (int iter = 0; iter < 4; ++iter) {
    const Array r = b - multiply(x);
    if (r.abs().maxCoeff() <= tol_for(x)) break;
    x += dense_->solve(r.matrix()).array();
  }
  if (residual_inf(x, b) >
      1e-10 * bnorm + 64 * 1e-16 * norm_inf_ * x.abs().maxCoeff())
    throw std::runtime_error("CyclicPentaLU: could not meet residual bound");
  return x;
}

}  // namespace stfe
