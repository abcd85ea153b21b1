#pragma once

// Finite-difference derivative oracle for the test suites. Product of
// 4th-order central-difference operators (handles mixed and repeated
// directions), extrapolated over a step-doubling Richardson tableau with the
// base step as the smallest entry; the returned value is the tableau entry
// with the smallest estimated error. Independent of the jet engine on
// purpose.

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "finsler/jet.hpp"

namespace finsler::testsupport {

using RealFn = std::function<double(const Point&)>;

namespace fd_detail {

// 4th-order first-derivative operator: offsets {-2h,-h,h,2h},
// weights {1,-8,8,-1}/12h.
inline constexpr double kOffsets[4] = {-2.0, -1.0, 1.0, 2.0};
inline constexpr double kWeights[4] = {1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0};

inline double apply(const RealFn& f, const Point& p, std::span<const Direction> dirs,
                    double h, std::size_t level) {
  if (level == dirs.size()) return f(p);
  const Direction& d = dirs[level];
  double acc = 0.0;
  for (int s = 0; s < 4; ++s) {
    Point q = p;
    (d.axis == Axis::X ? q.x : q.y)[d.index] += kOffsets[s] * h;
    acc += kWeights[s] * apply(f, q, dirs, h, level + 1);
  }
  return acc / h;
}

}  // namespace fd_detail

inline double fd_derivative(const RealFn& f, const Point& p,
                            std::span<const Direction> dirs, double baseStep = 1e-4,
                            int levels = 7) {
  if (dirs.empty()) return f(p);
  std::vector<std::vector<double>> tab(levels);
  for (int j = 0; j < levels; ++j)
    tab[j] = {fd_detail::apply(f, p, dirs, baseStep * std::pow(2.0, j), 0)};
  double best = tab[0][0];
  double bestErr = 1e300;
  for (int m = 1; m < levels; ++m) {
    double factor = std::pow(2.0, 2 * m + 2);  // error series starts at h^4
    for (int j = 0; j + m < levels; ++j) {
      double fine = tab[j][m - 1];  // smaller step
      double coarse = tab[j + 1][m - 1];
      double extrap = (factor * fine - coarse) / (factor - 1.0);
      tab[j].push_back(extrap);
      double err = std::max(std::abs(extrap - fine), std::abs(extrap - coarse));
      if (err < bestErr) {
        bestErr = err;
        best = extrap;
      }
    }
  }
  return best;
}

}  // namespace finsler::testsupport
