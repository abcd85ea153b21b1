#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "finsler/expr.hpp"

namespace finsler {

/// Truncated Taylor element with M nilpotent generators e_1..e_M, each
/// squaring to zero. Coefficients are indexed by generator subsets (bitmask);
/// the coefficient of the full product e_1...e_M is the exact mixed partial
/// derivative along the seeded directions.
template <unsigned M>
class Jet {
  static_assert(M <= 6, "generator cap is 6");

 public:
  static constexpr unsigned kOrder = M;
  static constexpr unsigned kSize = 1u << M;

  constexpr Jet() = default;
  constexpr Jet(double v) { c_[0] = v; }

  /// Seeded coordinate: value plus one unit generator slot.
  static Jet variable(double v, unsigned gen) {
    assert(gen < M);
    Jet j(v);
    j.c_[1u << gen] += 1.0;
    return j;
  }

  double value() const { return c_[0]; }
  double coeff(unsigned mask) const {
    assert(mask < kSize);
    return c_[mask];
  }
  double& coeff(unsigned mask) {
    assert(mask < kSize);
    return c_[mask];
  }

  friend Jet operator+(const Jet& a, const Jet& b) {
    Jet r;
    for (unsigned s = 0; s < kSize; ++s) r.c_[s] = a.c_[s] + b.c_[s];
    return r;
  }
  friend Jet operator-(const Jet& a, const Jet& b) {
    Jet r;
    for (unsigned s = 0; s < kSize; ++s) r.c_[s] = a.c_[s] - b.c_[s];
    return r;
  }
  friend Jet operator-(const Jet& a) {
    Jet r;
    for (unsigned s = 0; s < kSize; ++s) r.c_[s] = -a.c_[s];
    return r;
  }
  Jet& operator+=(const Jet& b) { return *this = *this + b; }
  Jet& operator-=(const Jet& b) { return *this = *this - b; }

  /// Subset-convolution product: (ab)[S] = sum over T subset S of a[T]b[S\T].
  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (unsigned s = 0; s < kSize; ++s) {
      double acc = a.c_[s] * b.c_[0];
      for (unsigned t = (s - 1) & s; t != s; t = (t - 1) & s) {
        acc += a.c_[t] * b.c_[s ^ t];
        if (t == 0) break;
      }
      r.c_[s] = acc;
    }
    return r;
  }
  Jet& operator*=(const Jet& b) { return *this = *this * b; }

  friend Jet operator*(const Jet& a, double k) {
    Jet r;
    for (unsigned s = 0; s < kSize; ++s) r.c_[s] = a.c_[s] * k;
    return r;
  }
  friend Jet operator*(double k, const Jet& a) { return a * k; }
  friend Jet operator+(const Jet& a, double k) {
    Jet r = a;
    r.c_[0] += k;
    return r;
  }
  friend Jet operator+(double k, const Jet& a) { return a + k; }
  friend Jet operator-(const Jet& a, double k) { return a + (-k); }
  friend Jet operator-(double k, const Jet& a) { return (-a) + k; }
  friend Jet operator/(const Jet& a, double k) { return a * (1.0 / k); }

  friend Jet operator/(const Jet& a, const Jet& b) {
    assert(b.c_[0] != 0.0);
    // 1/b via the Taylor series of 1/x around the value part
    std::array<double, M + 1> cs;
    double inv = 1.0 / b.c_[0];
    double p = inv;
    for (unsigned k = 0; k <= M; ++k) {
      cs[k] = p;
      p *= -inv;
    }
    Jet r = a * recompose(cs, b);
    r.c_[0] = a.c_[0] / b.c_[0];  // keep the value part bit-identical to real division
    return r;
  }
  friend Jet operator/(double k, const Jet& b) { return Jet(k) / b; }
  Jet& operator/=(const Jet& b) { return *this = *this / b; }

  friend Jet sqrt(const Jet& x) {
    assert(x.c_[0] > 0.0);
    std::array<double, M + 1> cs;
    cs[0] = std::sqrt(x.c_[0]);
    double inv = 1.0 / x.c_[0];
    for (unsigned k = 1; k <= M; ++k) cs[k] = cs[k - 1] * (1.5 / k - 1.0) * inv;
    return recompose(cs, x);
  }

  friend Jet exp(const Jet& x) {
    std::array<double, M + 1> cs;
    cs[0] = std::exp(x.c_[0]);
    for (unsigned k = 1; k <= M; ++k) cs[k] = cs[k - 1] / k;
    return recompose(cs, x);
  }

  friend Jet log(const Jet& x) {
    assert(x.c_[0] > 0.0);
    std::array<double, M + 1> cs;
    cs[0] = std::log(x.c_[0]);
    double inv = 1.0 / x.c_[0];
    if constexpr (M >= 1) cs[1] = inv;
    for (unsigned k = 2; k <= M; ++k) cs[k] = -cs[k - 1] * (double(k - 1) / k) * inv;
    return recompose(cs, x);
  }

  friend Jet sin(const Jet& x) {
    return recompose(trig_series(x.c_[0], /*sine=*/true), x);
  }
  friend Jet cos(const Jet& x) {
    return recompose(trig_series(x.c_[0], /*sine=*/false), x);
  }

  friend Jet atan(const Jet& x) {
    // f'(u) = 1/(1+u^2); series of the derivative by polynomial inversion.
    std::array<double, M + 1> cs;
    double v = x.c_[0];
    double w = 1.0 + v * v;
    cs[0] = std::atan(v);
    std::array<double, M> q{};
    if constexpr (M >= 1) {
      q[0] = 1.0 / w;
      for (unsigned k = 1; k < M; ++k)
        q[k] = -(2.0 * v * q[k - 1] + (k >= 2 ? q[k - 2] : 0.0)) / w;
      for (unsigned k = 1; k <= M; ++k) cs[k] = q[k - 1] / k;
    }
    return recompose(cs, x);
  }

  friend Jet pow(const Jet& x, double e) { return pow_scalar(x, e); }

 private:
  std::array<double, kSize> c_{};

  /// Horner evaluation of sum cs[k] * (x - value)^k; exact for nilpotent parts.
  static Jet recompose(const std::array<double, M + 1>& cs, const Jet& x) {
    Jet delta = x;
    delta.c_[0] = 0.0;
    Jet r(cs[M]);
    for (int k = static_cast<int>(M) - 1; k >= 0; --k) {
      r = r * delta;
      r.c_[0] += cs[k];
    }
    return r;
  }

  static std::array<double, M + 1> trig_series(double v, bool sine) {
    double s = std::sin(v), c = std::cos(v);
    std::array<double, M + 1> cs;
    double fact = 1.0;
    for (unsigned k = 0; k <= M; ++k) {
      if (k > 0) fact *= k;
      double base[4] = {s, c, -s, -c};
      cs[k] = (sine ? base[k % 4] : base[(k + 1) % 4]) / fact;
    }
    return cs;
  }
};

template <unsigned M>
inline double value_part(const Jet<M>& j) {
  return j.value();
}

/// Drop generators of a higher-order jet, fixing `fixedMask` (a subset of the
/// high generators) as already-applied derivatives. The result keeps the low
/// MOut generators: out[T] = in[T | fixedMask].
template <unsigned MOut, unsigned MIn>
Jet<MOut> subjet(const Jet<MIn>& j, unsigned fixedMask) {
  static_assert(MOut <= MIn);
  assert((fixedMask & ((1u << MOut) - 1)) == 0);
  Jet<MOut> r;
  for (unsigned t = 0; t < (1u << MOut); ++t) r.coeff(t) = j.coeff(t | fixedMask);
  return r;
}

// ---------------------------------------------------------------------------
// Seeding coordinates with tagged directions
// ---------------------------------------------------------------------------

struct Point {
  std::vector<double> x, y;
  int dim() const { return static_cast<int>(x.size()); }
};

/// A differentiation direction: one generator aimed at coordinate x_i or y_i
/// (0-based index). Repeating a direction across generators yields repeated
/// differentiation.
struct Direction {
  Axis axis;
  int index;
};

template <unsigned M>
struct SeededPoint {
  std::vector<Jet<M>> x, y;
};

template <unsigned M>
SeededPoint<M> seed_point(const Point& p, std::span<const Direction> dirs) {
  assert(dirs.size() == M);
  int n = p.dim();
  SeededPoint<M> s;
  s.x.assign(n, Jet<M>());
  s.y.assign(n, Jet<M>());
  for (int i = 0; i < n; ++i) {
    s.x[i] = Jet<M>(p.x[i]);
    s.y[i] = Jet<M>(p.y[i]);
  }
  for (unsigned g = 0; g < M; ++g) {
    const Direction& d = dirs[g];
    assert(d.index >= 0 && d.index < n);
    Jet<M>& target = (d.axis == Axis::X ? s.x : s.y)[d.index];
    target.coeff(1u << g) += 1.0;
  }
  return s;
}

/// Evaluate an expression at a point with M seeded directions.
template <unsigned M>
Jet<M> eval_jet(const Expr& e, const Point& p, std::span<const Direction> dirs) {
  SeededPoint<M> s = seed_point<M>(p, dirs);
  return e.eval(std::span<const Jet<M>>(s.x), std::span<const Jet<M>>(s.y));
}

}  // namespace finsler
