#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "finsler/expr.hpp"
#include "finsler/jet.hpp"

namespace finsler {

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A Finsler space (M, F) together with the sampling region the engine may
/// probe: per-coordinate ranges plus strict inequality constraints, each of
/// which must exceed the margin at admissible points. The margin keeps
/// samples off singular loci of y-local metrics.
struct MetricSpace {
  int n = 0;
  Expr F;
  std::vector<Expr> constraints;
  std::vector<std::array<double, 2>> xRange, yRange;
  double margin = 1e-3;
};

inline bool admissible(const MetricSpace& sp, const Point& p) {
  for (const Expr& c : sp.constraints) {
    try {
      if (!(c.eval<double>(p.x, p.y) > sp.margin)) return false;
    } catch (const EvalError&) {
      return false;
    }
  }
  try {
    return sp.F.eval<double>(p.x, p.y) > 0.0;
  } catch (const EvalError&) {
    return false;
  }
}

/// Uniform double in [a, b) derived straight from the engine output, so the
/// stream is identical across platforms.
inline double uniform_in(std::mt19937_64& rng, double a, double b) {
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return a + (b - a) * u;
}

inline Point sample_point(const MetricSpace& sp, std::mt19937_64& rng) {
  Point p;
  p.x.resize(sp.n);
  p.y.resize(sp.n);
  for (int i = 0; i < sp.n; ++i) p.x[i] = uniform_in(rng, sp.xRange[i][0], sp.xRange[i][1]);
  for (int i = 0; i < sp.n; ++i) p.y[i] = uniform_in(rng, sp.yRange[i][0], sp.yRange[i][1]);
  return p;
}

/// Rejection-sample admissible points; deterministic for a given seed.
inline std::vector<Point> sample_admissible(const MetricSpace& sp, int count,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Point> pts;
  pts.reserve(count);
  long long attempts = 0;
  while (static_cast<int>(pts.size()) < count) {
    if (++attempts > 1000000)
      throw DomainError("no admissible sample found after 1000000 attempts");
    Point p = sample_point(sp, rng);
    if (admissible(sp, p)) pts.push_back(std::move(p));
  }
  return pts;
}

/// Degree-1 positive homogeneity probe: max relative deviation of
/// F(x, s*y) from s*F(x, y) over s in {1/2, 2, 3}.
inline double homogeneity_residual(const MetricSpace& sp, const Point& p) {
  double f = sp.F.eval<double>(p.x, p.y);
  double worst = 0.0;
  for (double s : {0.5, 2.0, 3.0}) {
    Point q = p;
    for (double& v : q.y) v *= s;
    double fs = sp.F.eval<double>(q.x, q.y);
    worst = std::max(worst, std::abs(fs - s * f) / std::max(1.0, std::abs(s * f)));
  }
  return worst;
}

}  // namespace finsler
