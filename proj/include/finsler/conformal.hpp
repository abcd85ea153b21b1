#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "finsler/geometry.hpp"

namespace finsler {

/// The transformed space with F replaced by exp(sigma(x)) * F; the admissible
/// domain is unchanged.
inline MetricSpace conformal_lift(const MetricSpace& sp, const Expr& sigma) {
  if (sigma.contains_axis(Axis::Y))
    throw std::invalid_argument("conformal factor must depend on x only");
  MetricSpace out = sp;
  out.F = Expr::combine(BinaryOp::Mul, Expr::apply(UnaryOp::Exp, sigma), sp.F);
  return out;
}

struct SigmaPack {
  double eSigma = 1.0;
  double sigma0 = 0.0;          // sigma_i y^i
  std::vector<double> grad;     // sigma_i
  std::vector<double> gradUp;   // sigma^i = g^{ij} sigma_j (y-dependent via g)
};

inline SigmaPack sigma_pack(const Expr& sigma, const Point& p, const MetricPack& mp) {
  if (sigma.contains_axis(Axis::Y))
    throw std::invalid_argument("conformal factor must depend on x only");
  int n = p.dim();
  SigmaPack s;
  s.grad.resize(n);
  for (int i = 0; i < n; ++i) {
    std::array<Direction, 1> d = {Direction{Axis::X, i}};
    s.grad[i] = eval_jet<1>(sigma, p, d).coeff(1);
  }
  s.eSigma = std::exp(sigma.eval<double>(p.x, p.y));
  s.sigma0 = 0.0;
  for (int i = 0; i < n; ++i) s.sigma0 += s.grad[i] * p.y[i];
  s.gradUp.assign(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s.gradUp[i] += mp.gInv(i, j) * s.grad[j];
  return s;
}

/// B^{ir}_jkh = d_j d_k d_h (F^2 g^{ir}), via jets with the inverse metric
/// inverted in jet arithmetic. Slots [i][r][j][k][h].
inline TensorD bir_tensor(const MetricSpace& sp, const Point& p) {
  int n = sp.n;
  TensorD out = TensorD::square(5, n);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b)
      for (int c = b; c < n; ++c) {
        DerivProvider<3> prov(sp, p,
                              {Direction{Axis::Y, a}, Direction{Axis::Y, b},
                               Direction{Axis::Y, c}});
        auto g = metric_matrix(prov);
        auto gInv = invert_matrix(g);
        auto F2 = prov.f2();
        int perm[6][3] = {{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}};
        for (int i = 0; i < n; ++i)
          for (int r = 0; r < n; ++r) {
            double v = (F2 * gInv(i, r)).coeff(7);
            for (auto& q : perm) out(i, r, q[0], q[1], q[2]) = v;
          }
      }
  return out;
}

struct ConformalDeltas {
  std::vector<double> B1, B1direct;  // B^i
  TensorD B2, B2direct;              // B^i_j
  TensorD B3, B3direct;              // B^i_jk
  TensorD B4direct;                  // barred G^i_jkh minus G^i_jkh
  TensorD B4formula;                 // closed form in the Cartan family
  TensorD B4Tform;                   // closed form in the T-tensor family
  TensorD Bir;                       // B^{ir}_jkh
};

namespace detail {

/// sigma_r-contraction of the front (raised) slot.
inline TensorD sigma_front(const TensorD& t, const std::vector<double>& sigma) {
  int n = t.dim(0);
  std::vector<int> dims(t.dims().begin() + 1, t.dims().end());
  TensorD out(dims);
  std::vector<int> idx(out.rank(), 0);
  std::vector<int> src(t.rank(), 0);
  for (;;) {
    double acc = 0.0;
    for (int r = 0; r < n; ++r) {
      src[0] = r;
      for (int k = 0; k < out.rank(); ++k) src[k + 1] = idx[k];
      acc += sigma[r] * t.at(std::span<const int>(src));
    }
    out.at(idx) = acc;
    int k = out.rank() - 1;
    while (k >= 0 && ++idx[k] == out.dim(k)) idx[k--] = 0;
    if (k < 0) break;
  }
  return out;
}

}  // namespace detail

/// The Berwald-tensor conformal delta assembled from the Cartan family:
/// B^i_jkh = F^2 sigma_r C^{ir}_jkh
///         + 2 sigma_r (C^{ir}_j g_kh + C^{ir}_h g_jk + C^{ir}_k g_jh)
///         - 2 sigma^i C_jkh
///         + 2F sigma_r (C^{ir}_jk l_h + C^{ir}_hj l_k + C^{ir}_kh l_j)
///         - 4F sigma_r ((C^r_sj C^{si}_k + C^i_sj C^{sr}_k) l_h + ...)
///         - 2F^2 sigma_r (C^r_sjk C^{si}_h + C^i_sjk C^{sr}_h + ...)
///         + 4F^2 sigma_r ((C_stj C^{ti}_k + C_stk C^{ti}_j) C^{sr}_h + ...)
/// The -2 sigma^i C_jkh term restores d_h of the B^i_jk closed form (it is
/// produced by d_h(-sigma^i g_jk)); without it the delta fails the direct
/// dual-path check by exactly that amount.
inline TensorD b4_cartan_form(const MetricPack& mp, const CartanPack& cp,
                              const SigmaPack& sig, bool withGradGCorrection = true) {
  int n = mp.g.dim(0);
  double F = mp.F;
  const std::vector<double>& l = mp.l;
  const std::vector<double>& s = sig.grad;
  const TensorD& C3 = cp.C3;
  TensorD C3u1 = raise_front(C3, mp.gInv, 1);
  TensorD C3u2 = raise_front(C3, mp.gInv, 2);
  TensorD C4u1 = raise_front(*cp.C4, mp.gInv, 1);
  TensorD C4u2 = raise_front(*cp.C4, mp.gInv, 2);
  TensorD C5u2 = raise_front(*cp.C5, mp.gInv, 2);

  TensorD D2 = detail::sigma_front(C3u2, s);     // sigma_r C^{ri}_j -> (i, j)
  TensorD D3 = detail::sigma_front(C4u2, s);     // sigma_r C^{ri}_jk
  TensorD D4 = detail::sigma_front(C5u2, s);     // sigma_r C^{ri}_jkh
  TensorD E = detail::sigma_front(C3u1, s);      // sigma_r C^r_sj -> (s, j)
  TensorD E4 = detail::sigma_front(C4u1, s);     // sigma_r C^r_sjk
  TensorD Eu = raise_front(E, mp.gInv, 1);       // sigma_r C^{sr}_k -> (s, k)

  TensorD out = TensorD::square(4, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int h = 0; h < n; ++h) {
          double acc = F * F * D4(i, j, k, h);
          acc += 2.0 * (D2(i, j) * mp.g(k, h) + D2(i, h) * mp.g(j, k) +
                        D2(i, k) * mp.g(j, h));
          if (withGradGCorrection) acc -= 2.0 * sig.gradUp[i] * C3(j, k, h);
          acc += 2.0 * F *
                 (D3(i, j, k) * l[h] + D3(i, h, j) * l[k] + D3(i, k, h) * l[j]);
          for (int q = 0; q < n; ++q) {
            acc -= 4.0 * F *
                   ((E(q, j) * C3u2(q, i, k) + C3u1(i, q, j) * Eu(q, k)) * l[h] +
                    (E(q, j) * C3u2(q, i, h) + C3u1(i, q, j) * Eu(q, h)) * l[k] +
                    (E(q, k) * C3u2(q, i, h) + C3u1(i, q, k) * Eu(q, h)) * l[j]);
            acc -= 2.0 * F * F *
                   (E4(q, j, k) * C3u2(q, i, h) + C4u1(i, q, j, k) * Eu(q, h) +
                    E4(q, j, h) * C3u2(q, i, k) + C4u1(i, q, j, h) * Eu(q, k) +
                    E4(q, k, h) * C3u2(q, i, j) + C4u1(i, q, k, h) * Eu(q, j));
            for (int t = 0; t < n; ++t) {
              acc += 4.0 * F * F *
                     ((C3(q, t, j) * C3u2(t, i, k) + C3(q, t, k) * C3u2(t, i, j)) *
                          Eu(q, h) +
                      (C3(q, t, j) * C3u2(i, t, h) + C3(q, t, h) * C3u2(i, t, j)) *
                          Eu(q, k) +
                      (C3(q, t, k) * C3u2(i, t, h) + C3(q, t, h) * C3u2(i, t, k)) *
                          Eu(q, j));
            }
          }
          out(i, j, k, h) = acc;
        }
  return out;
}

/// The same delta assembled from the T-tensor family: T5 (the jet derivative
/// of the raised T-tensor), raised T4, the Cartan tensor and the metric pack
/// -- no fourth- or fifth-order Cartan tensor enters. Obtained by
/// substituting the T-tensor expression for C^{ir}_jkh into the Cartan-form
/// delta and eliminating every remaining 4-index Cartan term through the
/// raised T-tensor definition. The printed grouping of this formula carries
/// inconsistent signs in its T-l and T-C blocks, so the engine evaluates the
/// substituted form directly.
inline TensorD b4_t_form(const MetricPack& mp, const CartanPack& cp,
                         const TTensorPack& tt, const SigmaPack& sig) {
  int n = mp.g.dim(0);
  double F = mp.F;
  const std::vector<double>& l = mp.l;
  const std::vector<double>& s = sig.grad;

  std::vector<double> lup(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) lup[i] += mp.gInv(i, j) * l[j];
  double sLup = 0.0;  // sigma_r l^r
  for (int r = 0; r < n; ++r) sLup += s[r] * lup[r];

  const TensorD& C = cp.C3;
  TensorD Cu1 = raise_front(C, mp.gInv, 1);   // C^a_bc
  TensorD Cu2 = raise_front(C, mp.gInv, 2);   // C^{ab}_c
  TensorD E = detail::sigma_front(Cu1, s);    // sigma_r C^r_ab
  TensorD sC = detail::sigma_front(Cu2, s);   // sigma_r C^{ra}_b

  TensorD Tu1 = raise_front(tt.T4, mp.gInv, 1);  // T^a_bcd
  TensorD Tu2 = raise_front(tt.T4, mp.gInv, 2);  // T^{ab}_cd
  const TensorD& T5 = *tt.T5;                    // d_h T^{ri}_jk
  TensorD sT5 = detail::sigma_front(T5, s);      // sigma_r d_h T^{ra}_bc
  TensorD sTu2 = detail::sigma_front(Tu2, s);    // sigma_r T^{ra}_bc
  TensorD sTu1 = detail::sigma_front(Tu1, s);    // sigma_r T^r_abc

  const TensorD& hL = mp.h;
  TensorD hu1 = raise_front(hL, mp.gInv, 1);  // h^a_b
  std::vector<double> sHu(n, 0.0);            // sigma_r h^r_a
  for (int a = 0; a < n; ++a)
    for (int r = 0; r < n; ++r) sHu[a] += s[r] * hu1(r, a);

  // sigma_r Q^{ra}_bc: the quadratic block of the raised T-tensor definition
  TensorD Q = TensorD::square(3, n);
  // Q^{ab}_cd with both indices free (no sigma), as QQ(a,b,c,d)
  TensorD QQ = TensorD::square(4, n);
  // sigma_r Theta^r_abc: the quadratic block of the single-raised definition
  TensorD ThS = TensorD::square(3, n);
  // Theta^a_bcd with the raised index free
  TensorD Th = TensorD::square(4, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double q = 0.0, th = 0.0;
        for (int m = 0; m < n; ++m) {
          q += Cu1(a, m, b) * sC(m, c) + E(m, b) * Cu2(m, a, c) +
               sC(a, m) * Cu1(m, b, c);
          th += C(m, a, b) * sC(m, c) + E(m, b) * Cu1(m, a, c) +
                E(m, a) * Cu1(m, b, c);
        }
        Q(a, b, c) = q;
        ThS(a, b, c) = th;
        for (int d = 0; d < n; ++d) {
          double qq = 0.0, t4 = 0.0;
          for (int m = 0; m < n; ++m) {
            qq += Cu1(b, m, c) * Cu2(m, a, d) + Cu1(a, m, c) * Cu2(m, b, d) +
                  Cu2(a, b, m) * Cu1(m, c, d);
            t4 += C(m, b, c) * Cu2(m, a, d) + Cu1(a, m, c) * Cu1(m, b, d) +
                  Cu1(a, m, b) * Cu1(m, c, d);
          }
          QQ(a, b, c, d) = qq;
          Th(a, b, c, d) = t4;
        }
      }

  TensorD out = TensorD::square(4, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int h = 0; h < n; ++h) {
          double acc = F * sT5(i, j, k, h);

          // substituted l-lowered fourth-order terms
          acc += l[h] * (sTu2(i, j, k) + F * Q(i, j, k) - sC(i, j) * l[k] -
                         sC(i, k) * l[j] - E(j, k) * lup[i] -
                         Cu1(i, j, k) * sLup);
          acc += l[k] * (sTu2(i, j, h) + F * Q(i, j, h) - sC(i, j) * l[h] -
                         sC(i, h) * l[j] - E(j, h) * lup[i] -
                         Cu1(i, j, h) * sLup);
          acc += l[j] * (sTu2(i, k, h) + F * Q(i, k, h) - sC(i, k) * l[h] -
                         sC(i, h) * l[k] - E(k, h) * lup[i] -
                         Cu1(i, k, h) * sLup);

          // substituted l-raised fourth-order terms
          acc -= lup[i] * (sTu1(j, k, h) + F * ThS(j, k, h) - E(j, k) * l[h] -
                           E(j, h) * l[k] - E(k, h) * l[j] - C(j, k, h) * sLup);
          acc -= sLup * (Tu1(i, j, k, h) + F * Th(i, j, k, h) -
                         Cu1(i, j, k) * l[h] - Cu1(i, j, h) * l[k] -
                         Cu1(i, k, h) * l[j] - C(j, k, h) * lup[i]);

          for (int q = 0; q < n; ++q) {
            // A-group: single-raised C4 against sigma-raised C3
            acc -= F * sC(q, k) *
                   (Tu1(i, q, j, h) + F * Th(i, q, j, h) - Cu1(i, q, j) * l[h] -
                    Cu1(i, q, h) * l[j] - C(q, j, h) * lup[i]);
            acc -= F * Cu2(q, i, k) *
                   (sTu1(q, j, h) + F * ThS(q, j, h) - E(q, j) * l[h] -
                    E(q, h) * l[j] - C(q, j, h) * sLup);
            // B-group
            acc -= 2.0 * F * Cu2(q, i, j) *
                   (sTu1(q, k, h) + F * ThS(q, k, h) - E(q, k) * l[h] -
                    E(q, h) * l[k] - C(q, k, h) * sLup);
            acc -= 2.0 * F * sC(q, j) *
                   (Tu1(i, q, k, h) + F * Th(i, q, k, h) - Cu1(i, q, k) * l[h] -
                    Cu1(i, q, h) * l[k] - C(q, k, h) * lup[i]);
            // C-group: double-raised C4 substitutions
            acc += F * Cu1(i, q, j) *
                   (sTu2(q, k, h) + F * Q(q, k, h) - sC(q, k) * l[h] -
                    sC(q, h) * l[k] - Cu1(q, k, h) * sLup);
            acc += F * E(q, j) *
                   (Tu2(q, i, k, h) + F * QQ(q, i, k, h) - Cu2(q, i, k) * l[h] -
                    Cu2(q, i, h) * l[k] - Cu1(q, k, h) * lup[i]);
            // D-group
            acc += F * Cu1(q, j, k) *
                   (sTu2(i, q, h) + F * Q(i, q, h) - sC(i, q) * l[h] -
                    Cu1(i, q, h) * sLup - E(q, h) * lup[i]);
            acc += F * sC(i, q) *
                   (Tu1(q, j, k, h) + F * Th(q, j, k, h) - Cu1(q, j, k) * l[h] -
                    Cu1(q, j, h) * l[k] - Cu1(q, k, h) * l[j] -
                    C(j, k, h) * lup[q]);
          }

          // metric-trace block and the sigma-gradient term
          acc += 2.0 * (sC(i, j) * mp.g(k, h) + sC(i, h) * mp.g(j, k) +
                        sC(i, k) * mp.g(j, h));
          acc -= 2.0 * sig.gradUp[i] * C(j, k, h);

          // quadratic blocks that survive the substitution
          for (int q = 0; q < n; ++q) {
            acc -= 4.0 * F *
                   ((E(q, j) * Cu2(q, i, k) + Cu1(i, q, j) * sC(q, k)) * l[h] +
                    (E(q, j) * Cu2(q, i, h) + Cu1(i, q, j) * sC(q, h)) * l[k] +
                    (E(q, k) * Cu2(q, i, h) + Cu1(i, q, k) * sC(q, h)) * l[j]);
            acc += 2.0 * F *
                   ((E(q, j) * Cu2(i, q, h) + Cu1(i, q, j) * sC(q, h)) * l[k] +
                    (E(q, k) * Cu2(i, q, h) + Cu1(i, q, k) * sC(q, h)) * l[j]);
            acc += 2.0 * F * C(q, j, k) * sC(q, h) * lup[i] +
                   2.0 * F * C(q, j, k) * Cu2(i, q, h) * sLup;
          }
          acc += F * l[h] * Q(i, j, k);

          // angular-metric block
          acc -= sC(i, j) * hL(k, h) + sC(i, k) * hL(j, h);
          acc -= E(j, k) * hu1(i, h) + Cu1(i, j, k) * sHu[h];

          // cubic blocks
          for (int q = 0; q < n; ++q)
            for (int m = 0; m < n; ++m) {
              acc -= 2.0 * F * F *
                     (C(m, q, j) * Cu2(i, m, h) * sC(q, k) +
                      Cu1(i, q, j) * E(m, k) * Cu2(q, m, h) +
                      Cu1(i, q, j) * Cu1(q, m, k) * sC(m, h) +
                      C(m, q, j) * sC(m, h) * Cu2(q, i, k) +
                      E(q, j) * Cu1(i, m, k) * Cu2(q, m, h) +
                      E(q, j) * Cu1(q, m, k) * Cu2(i, m, h) +
                      E(m, q) * Cu2(i, m, h) * Cu1(q, j, k) +
                      Cu1(i, m, q) * sC(m, h) * Cu1(q, j, k) +
                      sC(i, q) * C(m, j, k) * Cu2(q, m, h));
              acc += 4.0 * F * F *
                     ((C(q, m, j) * Cu2(m, i, k) + C(q, m, k) * Cu2(m, i, j)) *
                          sC(q, h) +
                      (C(q, m, j) * Cu2(i, m, h) + C(q, m, h) * Cu2(i, m, j)) *
                          sC(q, k) +
                      (C(q, m, k) * Cu2(i, m, h) + C(q, m, h) * Cu2(i, m, k)) *
                          sC(q, j));
            }

          out(i, j, k, h) = acc;
        }
  return out;
}

/// Compute the whole conformal delta hierarchy at one point: the closed
/// forms, the direct barred-minus-unbarred differences, and B^{ir}_jkh.
inline ConformalDeltas b_hierarchy(const MetricSpace& sp, const Expr& sigma,
                                   const Point& p) {
  int n = sp.n;
  MetricPack mp = metric_pack(sp, p);
  CartanPack cp = cartan_pack(sp, p, 5, mp);
  SigmaPack sig = sigma_pack(sigma, p, mp);
  TTensorPack tt = t_tensor_pack(sp, p, /*withT5=*/true, mp, cp);

  ConformalDeltas out;
  double F = mp.F;
  const std::vector<double>& l = mp.l;

  // Closed forms of the low-order hierarchy
  out.B1.assign(n, 0.0);
  for (int i = 0; i < n; ++i)
    out.B1[i] = sig.sigma0 * p.y[i] - 0.5 * F * F * sig.gradUp[i];

  TensorD C3u2 = raise_front(cp.C3, mp.gInv, 2);
  TensorD C3u1 = raise_front(cp.C3, mp.gInv, 1);
  TensorD C4u2 = raise_front(*cp.C4, mp.gInv, 2);
  TensorD D2 = detail::sigma_front(C3u2, sig.grad);
  TensorD D3 = detail::sigma_front(C4u2, sig.grad);
  TensorD E = detail::sigma_front(C3u1, sig.grad);
  TensorD Eu = raise_front(E, mp.gInv, 1);

  out.B2 = TensorD::square(2, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.B2(i, j) = sig.grad[j] * p.y[i] + sig.sigma0 * (i == j ? 1.0 : 0.0) -
                     F * sig.gradUp[i] * l[j] + F * F * D2(i, j);

  out.B3 = TensorD::square(3, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double acc = sig.grad[j] * (i == k ? 1.0 : 0.0) +
                     sig.grad[k] * (i == j ? 1.0 : 0.0) -
                     sig.gradUp[i] * mp.g(j, k) + 2.0 * F * D2(i, k) * l[j] +
                     2.0 * F * D2(i, j) * l[k] + F * F * D3(i, j, k);
        for (int q = 0; q < n; ++q)
          acc -= 2.0 * F * F *
                 (E(q, j) * C3u2(q, i, k) + C3u1(i, q, j) * Eu(q, k));
        out.B3(i, j, k) = acc;
      }

  out.B4formula = b4_cartan_form(mp, cp, sig);
  out.B4Tform = b4_t_form(mp, cp, tt, sig);
  out.Bir = bir_tensor(sp, p);

  // Direct differences on the lifted space
  MetricSpace lifted = conformal_lift(sp, sigma);
  SprayPack base = spray_pack(sp, p);
  SprayPack barred = spray_pack(lifted, p);
  out.B1direct.assign(n, 0.0);
  for (int i = 0; i < n; ++i) out.B1direct[i] = barred.G[i] - base.G[i];
  out.B2direct = TensorD::square(2, n);
  out.B3direct = TensorD::square(3, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      out.B2direct(i, j) = barred.GJac(i, j) - base.GJac(i, j);
      for (int k = 0; k < n; ++k)
        out.B3direct(i, j, k) = barred.GConn(i, j, k) - base.GConn(i, j, k);
    }
  BerwaldTensor baseB = berwald_tensor(sp, p);
  BerwaldTensor barredB = berwald_tensor(lifted, p);
  out.B4direct = TensorD::square(4, n);
  for (std::size_t m = 0; m < out.B4direct.data().size(); ++m)
    out.B4direct.data()[m] = barredB.G4.data()[m] - baseB.G4.data()[m];
  return out;
}

/// Residual of the Landsberg transformation law
///   barred L_jkh = e^{2 sigma} (L_jkh + F sigma_r T^r_jkh).
/// The printed statement carries e^sigma on the first term; a constant-sigma
/// transformation already forces the e^{2 sigma} coefficient (L scales with
/// F l_i under a homothety), so the engine evaluates the consistent form.
inline double landsberg_law_residual(const MetricSpace& sp, const Expr& sigma,
                                     const Point& p) {
  MetricPack mp = metric_pack(sp, p);
  BerwaldTensor bt = berwald_tensor(sp, p);
  LandsbergTensor lt = landsberg_tensor(mp, bt);
  TTensorPack tt = t_tensor_pack(sp, p, false);
  SigmaPack sig = sigma_pack(sigma, p, mp);

  MetricSpace lifted = conformal_lift(sp, sigma);
  MetricPack mpBar = metric_pack(lifted, p);
  LandsbergTensor ltBar = landsberg_tensor(mpBar, berwald_tensor(lifted, p));

  int n = sp.n;
  TensorD sT = detail::sigma_front(raise_front(tt.T4, mp.gInv, 1), sig.grad);
  double e2 = sig.eSigma * sig.eSigma;
  double worst = 0.0, ref = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int h = 0; h < n; ++h) {
        double rhs = e2 * (lt.L(j, k, h) + mp.F * sT(j, k, h));
        worst = std::max(worst, std::abs(ltBar.L(j, k, h) - rhs));
        ref = std::max({ref, std::abs(ltBar.L(j, k, h)), std::abs(rhs),
                        e2 * mp.F * std::abs(sT(j, k, h))});
      }
  return normalized(worst, ref);
}

struct ConditionResult {
  double maxResidual = 0.0;
  bool holds = false;
};

/// sigma_r T^r_jkh = 0: the condition for a Landsberg space to stay
/// Landsberg under the transformation.
inline ConditionResult sigma_t_condition(const MetricSpace& sp, const Expr& sigma,
                                         std::span<const Point> points,
                                         double tol = 1e-8) {
  ConditionResult res;
  for (const Point& p : points) {
    MetricPack mp = metric_pack(sp, p);
    TTensorPack tt = t_tensor_pack(sp, p, false);
    SigmaPack sig = sigma_pack(sigma, p, mp);
    TensorD t4u1 = raise_front(tt.T4, mp.gInv, 1);
    TensorD sT = detail::sigma_front(t4u1, sig.grad);
    double ref = 0.0;
    for (int r = 0; r < sp.n; ++r)
      ref = std::max(ref, std::abs(sig.grad[r]) * max_abs(t4u1));
    res.maxResidual = std::max(res.maxResidual, normalized(max_abs(sT), ref));
  }
  res.holds = res.maxResidual < tol;
  return res;
}

struct NecessaryConditionScalars {
  double phi = 0.0;            // ((n-2)C^r + F^2 C^u S_u^r - F T_uv C^{uvr} - T l^r) sigma_r
  std::optional<double> phiS3; // the S3-like specialisation, n >= 3
};

inline NecessaryConditionScalars berwald_necessary_scalar(const MetricSpace& sp,
                                                          const Expr& sigma,
                                                          const Point& p) {
  int n = sp.n;
  MetricPack mp = metric_pack(sp, p);
  CartanPack cp = cartan_pack(sp, p, 4, mp);
  TTensorPack tt = t_tensor_pack(sp, p, false, mp, cp);
  VCurvaturePack vc = v_curvature_pack(mp, cp);
  SigmaPack sig = sigma_pack(sigma, p, mp);

  std::vector<double> lup(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) lup[i] += mp.gInv(i, j) * mp.l[j];

  TensorD cu3 = raise_front(cp.C3, mp.gInv, 3);
  TensorD ricciUp = contract_slot(vc.Ricci, 1, mp.gInv);  // S_u^r

  double phi = 0.0;
  for (int r = 0; r < n; ++r) {
    double term = (n - 2) * cp.C1up[r];
    for (int u = 0; u < n; ++u) {
      term += mp.F * mp.F * cp.C1up[u] * ricciUp(u, r);
      for (int v = 0; v < n; ++v) term -= mp.F * tt.T2(u, v) * cu3(u, v, r);
    }
    term -= tt.Tscalar * lup[r];
    phi += term * sig.grad[r];
  }

  NecessaryConditionScalars out;
  out.phi = phi;
  if (n >= 3) {
    double rho = *vc.rho;
    double val = 0.0;
    for (int r = 0; r < n; ++r) {
      double term = (n - 2) * (1.0 + mp.F * mp.F * rho) * cp.C1up[r];
      for (int s = 0; s < n; ++s)
        for (int h = 0; h < n; ++h) term -= mp.F * tt.T2(s, h) * cu3(s, r, h);
      term -= tt.Tscalar * lup[r];
      val += term * sig.grad[r];
    }
    out.phiS3 = val;
  }
  return out;
}

struct SigmaCContractions {
  double sigmaC = 0.0;     // sigma_r C^r
  double maxMixed = 0.0;   // max component of sigma_r C^r_jk
};

inline SigmaCContractions sigma_c_contractions(const MetricSpace& sp, const Expr& sigma,
                                               const Point& p) {
  MetricPack mp = metric_pack(sp, p);
  CartanPack cp = cartan_pack(sp, p, 3, mp);
  SigmaPack sig = sigma_pack(sigma, p, mp);
  SigmaCContractions out;
  for (int r = 0; r < sp.n; ++r) out.sigmaC += sig.grad[r] * cp.C1up[r];
  TensorD mixed = detail::sigma_front(cp.Cmixed, sig.grad);
  out.maxMixed = max_abs(mixed);
  return out;
}

}  // namespace finsler
