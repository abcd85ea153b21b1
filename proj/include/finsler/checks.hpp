#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "finsler/classify.hpp"
#include "finsler/conformal.hpp"
#include "finsler/registry.hpp"

namespace finsler {

/// One named check evaluated over a sampled point set.
struct CheckOutcome {
  std::string name;
  double maxResidual = 0.0;
  double meanResidual = 0.0;
  bool verdict = true;
  Point worstPoint;
  std::vector<std::pair<std::string, double>> details;
  std::vector<std::string> notes;
};

inline const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> v = {
      "identities",      "classify",      "conformal-laws", "sigma-t",
      "necessary-condition", "special-forms", "b-hierarchy",    "closed-forms"};
  return v;
}

inline bool check_requires_sigma(const std::string& name) {
  return name == "conformal-laws" || name == "sigma-t" ||
         name == "necessary-condition" || name == "b-hierarchy";
}

namespace detail {

struct Accumulator {
  double worst = -1.0;
  double sum = 0.0;
  int count = 0;
  Point worstPoint;

  void add(double residual, const Point& p) {
    sum += residual;
    ++count;
    if (residual > worst) {
      worst = residual;
      worstPoint = p;
    }
  }
  void finish(CheckOutcome& out) const {
    out.maxResidual = worst < 0.0 ? 0.0 : worst;
    out.meanResidual = count ? sum / count : 0.0;
    out.worstPoint = worstPoint;
  }
};

inline double slice_max(const TensorD& t, int frontIndex) {
  int n = t.dim(0);
  int r = t.rank();
  std::vector<int> idx(r, 0);
  idx[0] = frontIndex;
  double m = 0.0;
  for (;;) {
    m = std::max(m, std::abs(t.at(idx)));
    int k = r - 1;
    while (k >= 1 && ++idx[k] == n) idx[k--] = 0;
    if (k < 1) break;
  }
  return m;
}

}  // namespace detail

/// Pointwise structural identities: Euler-chain contractions, tensor
/// symmetries, metric consistency, the v-curvature antisymmetries, the
/// C-S orthogonality and the Cartan-derivative identities.
inline CheckOutcome check_identities(const MetricSpace& sp, std::span<const Point> pts,
                                     double tol) {
  CheckOutcome out;
  out.name = "identities";
  detail::Accumulator acc;
  int n = sp.n;
  double worstDetail[12] = {};
  static const char* kNames[12] = {
      "l.y = F",        "g.y = F l",      "C.y = 0",        "GConn.y = GJac",
      "G4.y = 0",       "L.y = 0",        "T4.y = 0",       "T4 symmetry",
      "S antisymmetry", "C.S = 0",        "g gInv = id",    "cartan derivative"};

  for (const Point& p : pts) {
    MetricPack mp = metric_pack(sp, p);
    CartanPack cp = cartan_pack(sp, p, 4, mp);
    SprayPack spr = spray_pack(sp, p);
    BerwaldTensor bt = berwald_tensor(sp, p);
    LandsbergTensor lt = landsberg_tensor(mp, bt);
    TTensorPack tt = t_tensor_pack(sp, p, false, mp, cp);
    VCurvaturePack vc = v_curvature_pack(mp, cp);

    double res[12] = {};
    // Euler chain
    double ly = -mp.F;
    for (int i = 0; i < n; ++i) ly += mp.l[i] * p.y[i];
    res[0] = std::abs(ly) / (1.0 + mp.F);
    for (int i = 0; i < n; ++i) {
      double gy = -mp.F * mp.l[i];
      for (int j = 0; j < n; ++j) gy += mp.g(i, j) * p.y[j];
      res[1] = std::max(res[1], std::abs(gy));
    }
    res[1] = normalized(res[1], mp.F * max_abs(mp.g));
    double cy = 0.0, g4y = 0.0, lyy = 0.0, t4y = 0.0, conn = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double c = 0.0;
        for (int k = 0; k < n; ++k) c += cp.C3(i, j, k) * p.y[k];
        cy = std::max(cy, std::abs(c));
        double gc = -spr.GJac(i, j);
        for (int k = 0; k < n; ++k) gc += spr.GConn(i, j, k) * p.y[k];
        conn = std::max(conn, std::abs(gc));
        for (int k = 0; k < n; ++k) {
          double g4 = 0.0, t4 = 0.0, lc = 0.0;
          for (int h = 0; h < n; ++h) {
            g4 += bt.G4(i, j, k, h) * p.y[h];
            t4 += tt.T4(i, j, k, h) * p.y[h];
            lc += lt.L(i, j, h) * p.y[h];
          }
          g4y = std::max(g4y, std::abs(g4));
          t4y = std::max(t4y, std::abs(t4));
          lyy = std::max(lyy, std::abs(lc));
        }
      }
    res[2] = normalized(cy, max_abs(cp.C3) * mp.F);
    res[3] = normalized(conn, max_abs(spr.GJac));
    res[4] = normalized(g4y, mp.F * max_abs(bt.G4));
    res[5] = normalized(lyy, mp.F * max_abs(lt.L));
    res[6] = normalized(t4y, mp.F * max_abs(tt.T4));
    res[7] = normalized(symmetry_residual(tt.T4), max_abs(tt.T4));
    // v-curvature antisymmetries and C-S orthogonality
    double anti = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int h = 0; h < n; ++h)
            anti = std::max({anti,
                             std::abs(vc.S4(i, j, k, h) + vc.S4(j, i, k, h)),
                             std::abs(vc.S4(i, j, k, h) + vc.S4(i, j, h, k))});
    res[8] = normalized(anti, max_abs(vc.S4));
    TensorD cu3 = raise_front(cp.C3, mp.gInv, 3);
    double cs = 0.0;
    for (int h = 0; h < n; ++h)
      for (int k = 0; k < n; ++k)
        for (int le = 0; le < n; ++le) {
          double a = 0.0;
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a += cu3(h, i, j) * vc.S4(i, j, k, le);
          cs = std::max(cs, std::abs(a));
        }
    res[9] = normalized(cs, max_abs(cu3) * max_abs(vc.S4));
    double gid = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double a = i == j ? -1.0 : 0.0;
        for (int k = 0; k < n; ++k) a += mp.g(i, k) * mp.gInv(k, j);
        gid = std::max(gid, std::abs(a));
      }
    res[10] = gid;
    CIdentityResiduals ci = verify_c_identities(sp, p);
    res[11] = std::max({ci.mixed2, ci.mixed1, ci.mixed2d4, ci.mixed1d4, ci.tform});

    double pointWorst = 0.0;
    for (int m = 0; m < 12; ++m) {
      pointWorst = std::max(pointWorst, res[m]);
      worstDetail[m] = std::max(worstDetail[m], res[m]);
    }
    acc.add(pointWorst, p);
  }
  acc.finish(out);
  for (int m = 0; m < 12; ++m) out.details.emplace_back(kNames[m], worstDetail[m]);
  out.verdict = out.maxResidual < tol;
  return out;
}

/// Classification flags over the sample; informational (always passes), the
/// flags themselves live in the details.
inline CheckOutcome check_classify(const MetricSpace& sp,
                                   const std::optional<Expr>& sigma,
                                   std::span<const Point> pts, double tol) {
  CheckOutcome out;
  out.name = "classify";
  detail::Accumulator acc;
  double worstR = 0.0, worstB = 0.0, worstL = 0.0;
  double worstRBar = 0.0, worstBBar = 0.0, worstLBar = 0.0;
  double minEig = 1e300;
  bool pd = true, pdSeen = false;
  std::optional<MetricSpace> lifted;
  if (sigma) lifted = conformal_lift(sp, *sigma);
  for (const Point& p : pts) {
    ClassificationRecord rec = classify_point(sp, p, tol);
    worstR = std::max(worstR, rec.riemannianResidual);
    worstB = std::max(worstB, rec.berwaldResidual);
    worstL = std::max(worstL, rec.landsbergResidual);
    minEig = std::min(minEig, rec.minEigenvalue);
    pd = pd && rec.positiveDefinite;
    pdSeen = true;
    double pointWorst = 0.0;
    if (lifted) {
      ClassificationRecord bar = classify_point(*lifted, p, tol);
      worstRBar = std::max(worstRBar, bar.riemannianResidual);
      worstBBar = std::max(worstBBar, bar.berwaldResidual);
      worstLBar = std::max(worstLBar, bar.landsbergResidual);
    }
    acc.add(pointWorst, p);
  }
  acc.finish(out);
  out.details.emplace_back("riemannian", worstR);
  out.details.emplace_back("berwald", worstB);
  out.details.emplace_back("landsberg", worstL);
  out.details.emplace_back("min eigenvalue of g", pdSeen ? minEig : 0.0);
  out.details.emplace_back("positive definite", pd && pdSeen ? 1.0 : 0.0);
  if (lifted) {
    out.details.emplace_back("lifted riemannian", worstRBar);
    out.details.emplace_back("lifted berwald", worstBBar);
    out.details.emplace_back("lifted landsberg", worstLBar);
  }
  out.notes.push_back("informational: flags hold when the residual is below " +
                      std::to_string(tol));
  out.verdict = true;
  return out;
}

/// The conformal transformation laws: metric scaling, the low-order
/// difference hierarchy against its closed forms, and the Landsberg law.
inline CheckOutcome check_conformal_laws(const MetricSpace& sp, const Expr& sigma,
                                         std::span<const Point> pts, double tol) {
  CheckOutcome out;
  out.name = "conformal-laws";
  detail::Accumulator acc;
  MetricSpace lifted = conformal_lift(sp, sigma);
  double worstScaling = 0.0, worstB123 = 0.0, worstLaw = 0.0;
  int n = sp.n;
  for (const Point& p : pts) {
    MetricPack mp = metric_pack(sp, p);
    MetricPack mpBar = metric_pack(lifted, p);
    SigmaPack sig = sigma_pack(sigma, p, mp);
    double es = sig.eSigma;
    double scaling = 0.0;
    for (int i = 0; i < n; ++i) {
      scaling = std::max(scaling, normalized(std::abs(mpBar.l[i] - es * mp.l[i]),
                                             es * std::abs(mp.l[i])));
      for (int j = 0; j < n; ++j) {
        scaling = std::max(
            {scaling,
             normalized(std::abs(mpBar.g(i, j) - es * es * mp.g(i, j)),
                        es * es * max_abs(mp.g)),
             normalized(std::abs(mpBar.gInv(i, j) - mp.gInv(i, j) / (es * es)),
                        max_abs(mpBar.gInv))});
      }
    }
    ConformalDeltas d = b_hierarchy(sp, sigma, p);
    double b123 = 0.0;
    for (int i = 0; i < n; ++i)
      b123 = std::max(b123, std::abs(d.B1[i] - d.B1direct[i]) /
                                (1.0 + std::abs(d.B1direct[i])));
    b123 = std::max(b123, normalized(max_abs_diff(d.B2, d.B2direct),
                                     std::max(max_abs(d.B2), max_abs(d.B2direct))));
    b123 = std::max(b123, normalized(max_abs_diff(d.B3, d.B3direct),
                                     std::max(max_abs(d.B3), max_abs(d.B3direct))));
    double law = landsberg_law_residual(sp, sigma, p);
    worstScaling = std::max(worstScaling, scaling);
    worstB123 = std::max(worstB123, b123);
    worstLaw = std::max(worstLaw, law);
    acc.add(std::max({scaling, b123, law}), p);
  }
  acc.finish(out);
  out.details.emplace_back("metric scaling", worstScaling);
  out.details.emplace_back("B1/B2/B3 closed forms", worstB123);
  out.details.emplace_back("Landsberg law", worstLaw);
  out.verdict = out.maxResidual < tol;
  return out;
}

inline CheckOutcome check_sigma_t(const MetricSpace& sp, const Expr& sigma,
                                  std::span<const Point> pts, double tol) {
  CheckOutcome out;
  out.name = "sigma-t";
  detail::Accumulator acc;
  for (const Point& p : pts) {
    auto res = sigma_t_condition(sp, sigma, std::span<const Point>(&p, 1), tol);
    acc.add(res.maxResidual, p);
  }
  acc.finish(out);
  out.verdict = out.maxResidual < tol;
  return out;
}

inline CheckOutcome check_necessary_condition(const MetricSpace& sp, const Expr& sigma,
                                              std::span<const Point> pts, double tol) {
  CheckOutcome out;
  out.name = "necessary-condition";
  detail::Accumulator acc;
  double worstS3 = 0.0;
  for (const Point& p : pts) {
    auto res = berwald_necessary_scalar(sp, sigma, p);
    acc.add(std::abs(res.phi), p);
    if (res.phiS3) worstS3 = std::max(worstS3, std::abs(*res.phiS3));
  }
  acc.finish(out);
  out.details.emplace_back("phi", out.maxResidual);
  if (sp.n >= 3) out.details.emplace_back("phi (S3-like form)", worstS3);
  out.verdict = out.maxResidual < tol;
  if (!out.verdict)
    out.notes.push_back("the necessary condition fails: the lifted space cannot be Berwald");
  return out;
}

inline CheckOutcome check_special_forms(const MetricSpace& sp,
                                        std::span<const Point> pts, double tol) {
  CheckOutcome out;
  out.name = "special-forms";
  detail::Accumulator acc;
  double worstCRed = 0.0, worstC2 = 0.0, worstS3 = 0.0;
  bool c2Defined = false, s3Defined = false;
  for (const Point& p : pts) {
    SpecialFormResiduals res = special_form_residuals(sp, p);
    worstCRed = std::max(worstCRed, res.cReducible);
    if (res.c2Like) {
      c2Defined = true;
      worstC2 = std::max(worstC2, *res.c2Like);
    }
    if (res.s3Like) {
      s3Defined = true;
      worstS3 = std::max(worstS3, *res.s3Like);
    }
    acc.add(res.cReducible, p);
  }
  acc.finish(out);
  out.details.emplace_back("c-reducible", worstCRed);
  if (c2Defined)
    out.details.emplace_back("c2-like", worstC2);
  else
    out.notes.push_back("c2-like undefined (C^2 is numerically zero)");
  if (s3Defined)
    out.details.emplace_back("s3-like", worstS3);
  else if (sp.n < 3)
    out.notes.push_back("s3-like undefined for n = 2");
  out.notes.push_back("informational: special-form residuals are reported, not asserted");
  out.verdict = true;
  (void)tol;
  return out;
}

/// The full delta hierarchy: closed forms against direct differences, the
/// three-way Berwald-delta agreement and the B^{ir} relation.
inline CheckOutcome check_b_hierarchy(const MetricSpace& sp, const Expr& sigma,
                                      std::span<const Point> pts, double tol) {
  CheckOutcome out;
  out.name = "b-hierarchy";
  detail::Accumulator acc;
  int n = sp.n;
  double worstLow = 0.0, worstThree = 0.0, worstBir = 0.0;
  for (const Point& p : pts) {
    ConformalDeltas d = b_hierarchy(sp, sigma, p);
    double low = 0.0;
    for (int i = 0; i < n; ++i)
      low = std::max(low, std::abs(d.B1[i] - d.B1direct[i]) /
                              (1.0 + std::abs(d.B1direct[i])));
    low = std::max(low, normalized(max_abs_diff(d.B2, d.B2direct),
                                   std::max(max_abs(d.B2), max_abs(d.B2direct))));
    low = std::max(low, normalized(max_abs_diff(d.B3, d.B3direct),
                                   std::max(max_abs(d.B3), max_abs(d.B3direct))));
    double three = std::max(
        {normalized(max_abs_diff(d.B4direct, d.B4formula),
                    std::max(max_abs(d.B4direct), max_abs(d.B4formula))),
         normalized(max_abs_diff(d.B4direct, d.B4Tform),
                    std::max(max_abs(d.B4direct), max_abs(d.B4Tform))),
         normalized(max_abs_diff(d.B4formula, d.B4Tform),
                    std::max(max_abs(d.B4formula), max_abs(d.B4Tform)))});
    // B^i_jkh = -1/2 B^{ir}_jkh sigma_r
    MetricPack mp = metric_pack(sp, p);
    SigmaPack sig = sigma_pack(sigma, p, mp);
    double birRel = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int h = 0; h < n; ++h) {
            double v = 0.0;
            for (int r = 0; r < n; ++r) v += d.Bir(i, r, j, k, h) * sig.grad[r];
            birRel = std::max(birRel, std::abs(-0.5 * v - d.B4direct(i, j, k, h)));
          }
    birRel = normalized(birRel, max_abs(d.B4direct));
    worstLow = std::max(worstLow, low);
    worstThree = std::max(worstThree, three);
    worstBir = std::max(worstBir, birRel);
    acc.add(std::max({low, three, birRel}), p);
  }
  acc.finish(out);
  out.details.emplace_back("B1/B2/B3 closed forms", worstLow);
  out.details.emplace_back("B4 three-way agreement", worstThree);
  out.details.emplace_back("B4 = -1/2 sigma_r B^{ir}", worstBir);
  out.verdict = out.maxResidual < tol;
  return out;
}

/// Closed-form matches registered for the entry (relative agreement with the
/// printed component formulas).
inline CheckOutcome check_closed_forms(const RegistryEntry& entry,
                                       std::span<const Point> pts, double tol) {
  CheckOutcome out;
  out.name = "closed-forms";
  detail::Accumulator acc;
  bool any = false;
  for (const Claim& c : entry.claims) {
    if (c.kind != ClaimKind::ClosedFormMatch) continue;
    any = true;
    double worst = 0.0;
    for (const Point& p : pts) {
      MetricPack mp = metric_pack(entry.space, p);
      double got = 0.0, want = 0.0;
      if (c.subject == "closed-form:T4_444") {
        CartanPack cp = cartan_pack(entry.space, p, 4, mp);
        TTensorPack tt = t_tensor_pack(entry.space, p, false, mp, cp);
        for (int r = 0; r < entry.space.n; ++r)
          got += mp.gInv(3, r) * tt.T4(r, 3, 3, 3);
        want = ex32_closed_T4_444(p, mp.F);
      } else if (c.subject == "closed-form:B44_444") {
        TensorD bir = bir_tensor(entry.space, p);
        got = bir(3, 3, 3, 3, 3);
        want = ex32_closed_B44_444(p);
      } else {
        continue;
      }
      double rel = std::abs(got - want) / std::max(std::abs(want), 1e-300);
      worst = std::max(worst, rel);
      acc.add(rel, p);
    }
    out.details.emplace_back(c.subject, worst);
  }
  acc.finish(out);
  if (!any) out.notes.push_back("no closed forms registered for this space");
  out.verdict = out.maxResidual < tol;
  return out;
}

// ---------------------------------------------------------------------------
// Registry-claim evaluation
// ---------------------------------------------------------------------------

struct ClaimResult {
  std::string subject;
  double value = 0.0;  // residual (zero/holds kinds) or magnitude (nonzero kinds)
  bool pass = false;
};

inline ClaimResult evaluate_claim(const RegistryEntry& entry, const Claim& claim,
                                  std::span<const Point> pts) {
  const MetricSpace& sp = entry.space;
  int n = sp.n;
  ClaimResult res;
  res.subject = claim.subject;
  double value = 0.0;
  bool boolean = false, boolPass = true;

  auto lifted = [&]() { return conformal_lift(sp, *entry.sigma); };

  std::string base = claim.subject;
  int arg = 0;
  if (auto pos = base.find(':'); pos != std::string::npos && base.rfind("closed-form", 0) != 0) {
    arg = std::stoi(base.substr(pos + 1));
    base = base.substr(0, pos);
  }

  for (const Point& p : pts) {
    if (base == "cartan-zero") {
      MetricPack mp = metric_pack(sp, p);
      CartanPack cp = cartan_pack(sp, p, 3, mp);
      value = std::max(value, normalized(max_abs(cp.C3), max_abs(mp.g)));
    } else if (base == "t-tensor-zero") {
      MetricPack mp = metric_pack(sp, p);
      CartanPack cp = cartan_pack(sp, p, 4, mp);
      TTensorPack tt = t_tensor_pack(sp, p, false, mp, cp);
      value = std::max(value, normalized(max_abs(tt.T4), mp.F * max_abs(*cp.C4)));
    } else if (base == "berwald-zero" || base == "berwald-nonzero") {
      SprayPack spr = spray_pack(sp, p);
      BerwaldTensor bt = berwald_tensor(sp, p);
      value = std::max(value, normalized(max_abs(bt.G4), max_abs(spr.GConn)));
    } else if (base == "landsberg-zero") {
      MetricPack mp = metric_pack(sp, p);
      BerwaldTensor bt = berwald_tensor(sp, p);
      LandsbergTensor lt = landsberg_tensor(mp, bt);
      value = std::max(value, normalized(max_abs(lt.L), 0.5 * mp.F * max_abs(bt.G4)));
    } else if (base == "v-curvature-zero") {
      MetricPack mp = metric_pack(sp, p);
      CartanPack cp = cartan_pack(sp, p, 3, mp);
      VCurvaturePack vc = v_curvature_pack(mp, cp);
      value = std::max(value,
                       normalized(max_abs(vc.S4), max_abs(cp.Cmixed) * max_abs(cp.C3)));
    } else if (base == "positive-definite") {
      boolean = true;
      MetricPack mp = metric_pack(sp, p);
      auto eig = symmetric_eigenvalues(mp.g);
      double mn = *std::min_element(eig.begin(), eig.end());
      value = value == 0.0 ? mn : std::min(value, mn);
      boolPass = boolPass && positive_definite(mp.g);
    } else if (base == "sigma-t-zero") {
      auto r = sigma_t_condition(sp, *entry.sigma, std::span<const Point>(&p, 1));
      value = std::max(value, r.maxResidual);
    } else if (base == "sigma-c-zero") {
      auto r = sigma_c_contractions(sp, *entry.sigma, p);
      value = std::max(value, std::abs(r.sigmaC));
    } else if (base == "necessary-condition") {
      auto r = berwald_necessary_scalar(sp, *entry.sigma, p);
      value = std::max(value, std::abs(r.phi));
    } else if (base == "t-raised-slice-zero") {
      MetricPack mp = metric_pack(sp, p);
      CartanPack cp = cartan_pack(sp, p, 4, mp);
      TTensorPack tt = t_tensor_pack(sp, p, false, mp, cp);
      TensorD traised = raise_front(tt.T4, mp.gInv, 1);
      value = std::max(value, normalized(detail::slice_max(traised, arg - 1),
                                         max_abs(traised)));
    } else if (base == "t-component-nonzero") {
      MetricPack mp = metric_pack(sp, p);
      CartanPack cp = cartan_pack(sp, p, 4, mp);
      TTensorPack tt = t_tensor_pack(sp, p, false, mp, cp);
      double comp = 0.0;
      for (int r = 0; r < n; ++r)
        comp += mp.gInv(arg - 1, r) * tt.T4(r, arg - 1, arg - 1, arg - 1);
      value = std::max(value, std::abs(comp));
    } else if (base == "b4-zero") {
      MetricPack mp = metric_pack(sp, p);
      CartanPack cp = cartan_pack(sp, p, 5, mp);
      SigmaPack sig = sigma_pack(*entry.sigma, p, mp);
      TensorD b4 = b4_cartan_form(mp, cp, sig);
      TensorD bir = bir_tensor(sp, p);
      value = std::max(value, normalized(max_abs(b4), 0.5 * max_abs(bir)));
    } else if (base == "bir-slice-zero") {
      MetricPack mp = metric_pack(sp, p);
      SigmaPack sig = sigma_pack(*entry.sigma, p, mp);
      TensorD bir = bir_tensor(sp, p);
      double worst = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int h = 0; h < n; ++h)
              worst = std::max(worst,
                               std::abs(sig.grad[arg - 1] * bir(i, arg - 1, j, k, h)));
      value = std::max(value, normalized(worst, max_abs(bir)));
    } else if (base == "bir-nonzero") {
      TensorD bir = bir_tensor(sp, p);
      value = std::max(value, max_abs(bir));
    } else if (base == "lifted-berwald-zero" || base == "lifted-berwald-nonzero") {
      MetricSpace lf = lifted();
      SprayPack spr = spray_pack(lf, p);
      BerwaldTensor bt = berwald_tensor(lf, p);
      value = std::max(value, normalized(max_abs(bt.G4), max_abs(spr.GConn)));
    } else if (base == "lifted-landsberg-zero") {
      MetricSpace lf = lifted();
      MetricPack mp = metric_pack(lf, p);
      BerwaldTensor bt = berwald_tensor(lf, p);
      LandsbergTensor lt = landsberg_tensor(mp, bt);
      value = std::max(value, normalized(max_abs(lt.L), 0.5 * mp.F * max_abs(bt.G4)));
    } else if (base == "g4-plus-b4-zero") {
      MetricPack mp = metric_pack(sp, p);
      CartanPack cp = cartan_pack(sp, p, 5, mp);
      SigmaPack sig = sigma_pack(*entry.sigma, p, mp);
      TensorD b4 = b4_cartan_form(mp, cp, sig);
      BerwaldTensor bt = berwald_tensor(sp, p);
      double worst = 0.0;
      for (std::size_t m = 0; m < b4.data().size(); ++m)
        worst = std::max(worst, std::abs(b4.data()[m] + bt.G4.data()[m]));
      value = std::max(value, normalized(worst, max_abs(bt.G4)));
    } else if (base == "closed-form") {
      // handled via check_closed_forms; evaluate the same way here
      MetricPack mp = metric_pack(sp, p);
      double got = 0.0, want = 0.0;
      if (claim.subject == "closed-form:T4_444") {
        CartanPack cp = cartan_pack(sp, p, 4, mp);
        TTensorPack tt = t_tensor_pack(sp, p, false, mp, cp);
        for (int r = 0; r < n; ++r) got += mp.gInv(3, r) * tt.T4(r, 3, 3, 3);
        want = ex32_closed_T4_444(p, mp.F);
      } else if (claim.subject == "closed-form:B44_444") {
        TensorD bir = bir_tensor(sp, p);
        got = bir(3, 3, 3, 3, 3);
        want = ex32_closed_B44_444(p);
      }
      value = std::max(value, std::abs(got - want) / std::max(std::abs(want), 1e-300));
    } else {
      throw std::invalid_argument("unknown claim subject '" + claim.subject + "'");
    }
  }

  res.value = value;
  if (boolean) {
    res.pass = boolPass;
    return res;
  }
  switch (claim.kind) {
    case ClaimKind::TensorZero:
    case ClaimKind::ConditionHolds:
    case ClaimKind::ClosedFormMatch:
      res.pass = value < claim.threshold;
      break;
    case ClaimKind::TensorNonzero:
    case ClaimKind::ConditionFails:
      res.pass = value > claim.threshold;
      break;
  }
  return res;
}

}  // namespace finsler
