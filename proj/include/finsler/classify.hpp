#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "finsler/geometry.hpp"
#include "finsler/linalg.hpp"

namespace finsler {

// verdict tolerance tiers; fifth-order jets lose a few digits on
// ill-conditioned metrics, hence the spread
inline constexpr double kTolStrict = 1e-10;
inline constexpr double kTolDefault = 1e-8;
inline constexpr double kTolLoose = 1e-6;

struct ClassificationRecord {
  double riemannianResidual = 0.0;  // scale-free max |C_ijk|
  double berwaldResidual = 0.0;     // scale-free max |G^i_jkh|
  double landsbergResidual = 0.0;   // scale-free max |L_jkh|
  double minEigenvalue = 0.0;       // smallest eigenvalue of g
  bool riemannian = false;
  bool berwald = false;
  bool landsberg = false;
  bool positiveDefinite = false;
  double tolerance = kTolDefault;
};

inline ClassificationRecord classify_point(const MetricSpace& sp, const Point& p,
                                           double tol = kTolDefault) {
  ClassificationRecord rec;
  rec.tolerance = tol;
  MetricPack mp = metric_pack(sp, p);
  CartanPack cp = cartan_pack(sp, p, 3, mp);
  SprayPack spray = spray_pack(sp, p);
  BerwaldTensor bt = berwald_tensor(sp, p);
  LandsbergTensor lt = landsberg_tensor(mp, bt);

  rec.riemannianResidual = normalized(max_abs(cp.C3), max_abs(mp.g));
  rec.berwaldResidual = normalized(max_abs(bt.G4), max_abs(spray.GConn));
  rec.landsbergResidual = normalized(max_abs(lt.L), 0.5 * mp.F * max_abs(bt.G4));
  rec.riemannian = rec.riemannianResidual < tol;
  rec.berwald = rec.berwaldResidual < tol;
  rec.landsberg = rec.landsbergResidual < tol;

  auto eig = symmetric_eigenvalues(mp.g);
  rec.minEigenvalue = *std::min_element(eig.begin(), eig.end());
  rec.positiveDefinite = positive_definite(mp.g);
  return rec;
}

struct SpecialFormResiduals {
  double cReducible = 0.0;
  std::optional<double> c2Like;  // undefined when C^2 is numerically zero
  std::optional<double> s3Like;  // undefined for n = 2
};

/// Residuals of the special algebraic forms: C-reducible T-tensor shape,
/// C2-like Cartan shape, S3-like v-curvature shape.
inline SpecialFormResiduals special_form_residuals(const MetricSpace& sp,
                                                   const Point& p) {
  int n = sp.n;
  MetricPack mp = metric_pack(sp, p);
  CartanPack cp = cartan_pack(sp, p, 4, mp);
  TTensorPack tt = t_tensor_pack(sp, p, false, mp, cp);
  VCurvaturePack vc = v_curvature_pack(mp, cp);
  SpecialFormResiduals out;

  // T_hijk = T/(n^2-1) (h_hi h_jk + h_ij h_hk + h_jh h_ik)
  {
    double coef = tt.Tscalar / (n * n - 1);
    double worst = 0.0, ref = 0.0;
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            double form = coef * (mp.h(a, i) * mp.h(j, k) + mp.h(i, j) * mp.h(a, k) +
                                  mp.h(j, a) * mp.h(i, k));
            worst = std::max(worst, std::abs(tt.T4(a, i, j, k) - form));
            ref = std::max({ref, std::abs(tt.T4(a, i, j, k)), std::abs(form)});
          }
    out.cReducible = normalized(worst, ref);
  }

  // C_ijk = C_i C_j C_k / C^2; pure relative residual so the value is
  // conformally invariant (both sides scale by e^{2 sigma})
  if (cp.Csq >= 1e-14) {
    double worst = 0.0;
    double scale = std::max(max_abs(cp.C3), 1e-300);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          worst = std::max(worst, std::abs(cp.C3(i, j, k) -
                                           cp.C1[i] * cp.C1[j] * cp.C1[k] / cp.Csq));
    out.c2Like = worst / scale;
  }

  // S_ijkh = rho (h_ik h_jh - h_ih h_jk)
  if (n >= 3) {
    double rho = *vc.rho;
    double worst = 0.0, ref = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int h = 0; h < n; ++h) {
            double form = rho * (mp.h(i, k) * mp.h(j, h) - mp.h(i, h) * mp.h(j, k));
            worst = std::max(worst, std::abs(vc.S4(i, j, k, h) - form));
            ref = std::max({ref, std::abs(vc.S4(i, j, k, h)), std::abs(form)});
          }
    out.s3Like = normalized(worst, ref);
  }
  return out;
}

}  // namespace finsler
