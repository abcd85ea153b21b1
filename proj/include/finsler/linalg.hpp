#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "finsler/tensor.hpp"

namespace finsler {

struct SingularMetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Gauss-Jordan inverse with partial pivoting, generic over the scalar ring;
/// jets pivot on their value part.
template <class S>
Tensor<S> invert_matrix(const Tensor<S>& a) {
  int n = a.dim(0);
  Tensor<S> work = a;
  Tensor<S> inv = Tensor<S>::square(2, n);
  for (int i = 0; i < n; ++i) inv(i, i) = S(1.0);

  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(value_part(a(i, j))));

  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::abs(value_part(work(col, col)));
    for (int r = col + 1; r < n; ++r) {
      double cand = std::abs(value_part(work(r, col)));
      if (cand > best) {
        best = cand;
        pivot = r;
      }
    }
    if (best <= 1e-12 * scale || best == 0.0)
      throw SingularMetricError("degenerate metric at point");
    if (pivot != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(work(pivot, j), work(col, j));
        std::swap(inv(pivot, j), inv(col, j));
      }
    }
    S d = work(col, col);
    for (int j = 0; j < n; ++j) {
      work(col, j) = work(col, j) / d;
      inv(col, j) = inv(col, j) / d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      S f = work(r, col);
      if (value_part(f) == 0.0) {
        bool zero = true;
        // jets may carry nilpotent parts even with zero value
        if constexpr (!std::is_same_v<S, double>) {
          for (unsigned m = 0; m < S::kSize; ++m)
            if (f.coeff(m) != 0.0) {
              zero = false;
              break;
            }
        }
        if (zero) continue;
      }
      for (int j = 0; j < n; ++j) {
        work(r, j) = work(r, j) - f * work(col, j);
        inv(r, j) = inv(r, j) - f * inv(col, j);
      }
    }
  }
  return inv;
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> symmetric_eigenvalues(const TensorD& a) {
  int n = a.dim(0);
  TensorD m = a;
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(m(p, q)) < 1e-300) continue;
        double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double mkp = m(k, p), mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          double mpk = m(p, k), mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = m(i, i);
  return eig;
}

namespace detail {

/// Determinant of the principal block selected by `sel`, by cofactor
/// expansion; exact arithmetic on doubles, k <= 4 here.
inline double det_small(const TensorD& a, const std::vector<int>& sel) {
  int k = static_cast<int>(sel.size());
  if (k == 1) return a(sel[0], sel[0]);
  if (k == 2)
    return a(sel[0], sel[0]) * a(sel[1], sel[1]) - a(sel[0], sel[1]) * a(sel[1], sel[0]);
  double det = 0.0;
  double sign = 1.0;
  for (int c = 0; c < k; ++c) {
    std::vector<int> rows(sel.begin() + 1, sel.end());
    std::vector<int> cols;
    for (int j = 0; j < k; ++j)
      if (j != c) cols.push_back(sel[j]);
    // generic rectangular cofactor
    TensorD block = TensorD::square(2, k - 1);
    for (int i = 0; i < k - 1; ++i)
      for (int j = 0; j < k - 1; ++j) block(i, j) = a(rows[i], cols[j]);
    std::vector<int> all(k - 1);
    for (int i = 0; i < k - 1; ++i) all[i] = i;
    det += sign * a(sel[0], sel[c]) * det_small(block, all);
    sign = -sign;
  }
  return det;
}

}  // namespace detail

/// Positive definiteness of a symmetric matrix via characteristic-polynomial
/// coefficient signs: for real-rooted polynomials, all roots are positive iff
/// every elementary symmetric function (sum of principal minors) is positive.
/// Exact coefficient arithmetic for n <= 4; Gershgorin bound otherwise.
inline bool positive_definite(const TensorD& a) {
  int n = a.dim(0);
  if (n > 4) {
    for (int i = 0; i < n; ++i) {
      double off = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) off += std::abs(a(i, j));
      if (a(i, i) <= off) return false;
    }
    return true;
  }
  std::vector<int> sel;
  std::function<bool(int, int)> choose = [&](int start, int need) -> bool {
    if (need == 0) return detail::det_small(a, sel) > 0.0;
    for (int i = start; i <= n - need; ++i) {
      sel.push_back(i);
      bool ok = choose(i + 1, need - 1);
      sel.pop_back();
      if (!ok) return false;
    }
    return true;
  };
  for (int k = 1; k <= n; ++k)
    if (!choose(0, k)) return false;
  return true;
}

}  // namespace finsler
