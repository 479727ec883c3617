#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include <array>
#include <memory>

namespace stfe {

// LU solver for cyclic pentadiagonal systems M x = b, where
// M(i, (i+k) mod n) = diag[k+2][i] for k = -2..2. The acyclic band is
// factored without pivoting and the periodic wrap entries (two triangular
// 2x2 corner blocks, rank 4 total) are folded back in with a Woodbury
// update. Every solve is residual-checked against the assembled operator;
// if the unpivoted factorization loses accuracy the solve falls back to a
// dense partial-pivot LU.
class CyclicPentaLU {
 public:
  using Array = Eigen::ArrayXd;
  using Diagonals = std::array<Array, 5>;

  void compute(Diagonals diags);

  // Solves M x = b with ||M x - b||_inf <= 1e-10 ||b||_inf plus the
  // backward-stable floor eps ||M||_inf ||x||_inf (which is negligible for
  // the time-step systems this solver exists for). One instance is not
  // safe for concurrent solves (workspace reuse).
  Array solve(const Array& b) const;

  Array multiply(const Array& x) const;
  double residual_inf(const Array& x, const Array& b) const;

 private:
  Array band_solve(const Array& b) const;
  void ensure_dense() const;

  int n_ = 0;
  double norm_inf_ = 0;
  Diagonals d_;
  // banded factors: unit lower (l1, l2), upper (u0, u1, u2)
  Array l1_, l2_, u0_, u1_, u2_;
  bool band_ok_ = false;
  // Woodbury data: Z = B^-1 U for the four wrap rows, S = I + V^T Z
  Eigen::Matrix<double, Eigen::Dynamic, 4> z_;
  Eigen::Matrix4d s_inv_;
  std::array<int, 4> wrap_rows_{};
  mutable Array work_;  // band_solve forward-sweep workspace
  mutable std::shared_ptr<Eigen::PartialPivLU<Eigen::MatrixXd>> dense_;
};

}  // namespace stfe
