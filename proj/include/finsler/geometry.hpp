#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <type_traits>
#include <vector>

#include "finsler/jet.hpp"
#include "finsler/linalg.hpp"
#include "finsler/space.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

// ---------------------------------------------------------------------------
// Derivative provider
//
// Supplies exact partial derivatives of F and F^2 at one point via seeded
// jets. `Outer` extra directions turn every returned scalar into a jet in
// those directions, so whole tensor assemblies can be differentiated by
// running them over jet scalars. With Outer == 0 results are plain reals.
// ---------------------------------------------------------------------------

template <unsigned Outer = 0>
class DerivProvider {
 public:
  using Scalar = std::conditional_t<Outer == 0, double, Jet<Outer>>;

  DerivProvider(const MetricSpace& sp, const Point& p,
                std::array<Direction, Outer> outer = {})
      : sp_(&sp), p_(p), outer_(outer) {}

  int dim() const { return sp_->n; }
  const Point& point() const { return p_; }
  const MetricSpace& space() const { return *sp_; }

  /// Seeded coordinate value (carries outer generators).
  Scalar coord(Axis a, int i) const {
    double v = (a == Axis::X ? p_.x : p_.y)[i];
    if constexpr (Outer == 0) {
      return v;
    } else {
      Jet<Outer> j(v);
      for (unsigned g = 0; g < Outer; ++g)
        if (outer_[g].axis == a && outer_[g].index == i) j.coeff(1u << g) += 1.0;
      return j;
    }
  }

  /// Mixed partial of F along `inner`, as a jet in the outer directions.
  template <std::size_t NIn>
  Scalar f(const std::array<Direction, NIn>& inner) const {
    return extract<NIn>(raw_f<NIn>(inner));
  }

  /// Mixed partial of F^2 along `inner`.
  template <std::size_t NIn>
  Scalar f2(const std::array<Direction, NIn>& inner) const {
    auto v = raw_f<NIn>(inner);
    return extract<NIn>(v * v);
  }

  Scalar f() const { return f(std::array<Direction, 0>{}); }
  Scalar f(Direction d1) const { return f(std::array<Direction, 1>{d1}); }
  Scalar f(Direction d1, Direction d2) const { return f(std::array<Direction, 2>{d1, d2}); }
  Scalar f2() const { return f2(std::array<Direction, 0>{}); }
  Scalar f2(Direction d1) const { return f2(std::array<Direction, 1>{d1}); }
  Scalar f2(Direction d1, Direction d2) const { return f2(std::array<Direction, 2>{d1, d2}); }

 private:
  const MetricSpace* sp_;
  Point p_;
  std::array<Direction, Outer> outer_;

  template <std::size_t NIn>
  Jet<Outer + static_cast<unsigned>(NIn)> raw_f(
      const std::array<Direction, NIn>& inner) const {
    constexpr unsigned Total = Outer + static_cast<unsigned>(NIn);
    std::array<Direction, Total> gens{};
    for (unsigned g = 0; g < Outer; ++g) gens[g] = outer_[g];
    for (unsigned g = 0; g < NIn; ++g) gens[Outer + g] = inner[g];
    return eval_jet<Total>(sp_->F, p_, gens);
  }

  template <std::size_t NIn>
  Scalar extract(const Jet<Outer + static_cast<unsigned>(NIn)>& v) const {
    constexpr unsigned innerMask = ((1u << NIn) - 1) << Outer;
    if constexpr (Outer == 0)
      return v.coeff(innerMask);
    else
      return subjet<Outer>(v, innerMask);
  }
};

// ---------------------------------------------------------------------------
// Generic assemblies (run over reals or jets)
// ---------------------------------------------------------------------------

// g_ij = 1/2 d_i d_j F^2
template <class P>
Tensor<typename P::Scalar> metric_matrix(const P& prov) {
  using S = typename P::Scalar;
  int n = prov.dim();
  Tensor<S> g = Tensor<S>::square(2, n);
  fill_symmetric(g, [&](std::span<const int> idx) {
    return 0.5 * prov.f2(Direction{Axis::Y, idx[0]}, Direction{Axis::Y, idx[1]});
  });
  return g;
}

// l_i = d_i F
template <class P>
std::vector<typename P::Scalar> ell_vector(const P& prov) {
  int n = prov.dim();
  std::vector<typename P::Scalar> l(n);
  for (int i = 0; i < n; ++i) l[i] = prov.f(Direction{Axis::Y, i});
  return l;
}

// l_ij = d_j l_i
template <class P>
Tensor<typename P::Scalar> ell_deriv_matrix(const P& prov) {
  using S = typename P::Scalar;
  int n = prov.dim();
  Tensor<S> m = Tensor<S>::square(2, n);
  fill_symmetric(m, [&](std::span<const int> idx) {
    return prov.f(Direction{Axis::Y, idx[0]}, Direction{Axis::Y, idx[1]});
  });
  return m;
}

// Rank-R pure y-derivative of F^2 / 4: rank 3 gives the Cartan tensor
// C_ijk = 1/2 d_k g_ij, rank 4 its d-derivative, rank 5 the next one.
template <unsigned R, class P>
Tensor<typename P::Scalar> cartan_tensor(const P& prov) {
  using S = typename P::Scalar;
  int n = prov.dim();
  Tensor<S> t = Tensor<S>::square(R, n);
  fill_symmetric(t, [&](std::span<const int> idx) {
    std::array<Direction, R> dirs;
    for (unsigned k = 0; k < R; ++k) dirs[k] = Direction{Axis::Y, idx[k]};
    return 0.25 * prov.f2(dirs);
  });
  return t;
}

// G^i = 1/4 g^{ih} (y^r dx_r dy_h F^2 - dx_h F^2)
template <class P>
std::vector<typename P::Scalar> spray_vector(const P& prov,
                                             const Tensor<typename P::Scalar>& gInv) {
  using S = typename P::Scalar;
  int n = prov.dim();
  std::vector<S> bracket(n);
  for (int h = 0; h < n; ++h) {
    S acc = -prov.f2(Direction{Axis::X, h});
    for (int r = 0; r < n; ++r)
      acc = acc + prov.coord(Axis::Y, r) *
                      prov.f2(Direction{Axis::X, r}, Direction{Axis::Y, h});
    bracket[h] = acc;
  }
  std::vector<S> G(n, S{});
  for (int i = 0; i < n; ++i) {
    S acc{};
    for (int h = 0; h < n; ++h) acc = acc + gInv(i, h) * bracket[h];
    G[i] = 0.25 * acc;
  }
  return G;
}

// T_rijk = F C_rijk - F (C_sij C^s_rk + C_sjr C^s_ik + C_sir C^s_jk)
//          + C_rij l_k + C_rik l_j + C_rjk l_i + C_ijk l_r
template <class S>
Tensor<S> t_tensor_assembly(int n, const S& F, const std::vector<S>& l,
                            const Tensor<S>& C3, const Tensor<S>& C3u1,
                            const Tensor<S>& C4) {
  Tensor<S> T = Tensor<S>::square(4, n);
  fill_symmetric(T, [&](std::span<const int> idx) {
    int r = idx[0], i = idx[1], j = idx[2], k = idx[3];
    S q{};
    for (int s = 0; s < n; ++s)
      q = q + C3(s, i, j) * C3u1(s, r, k) + C3(s, j, r) * C3u1(s, i, k) +
          C3(s, i, r) * C3u1(s, j, k);
    return F * C4(r, i, j, k) - F * q + C3(r, i, j) * l[k] + C3(r, i, k) * l[j] +
           C3(r, j, k) * l[i] + C3(i, j, k) * l[r];
  });
  return T;
}

// ---------------------------------------------------------------------------
// Per-point packs
// ---------------------------------------------------------------------------

struct MetricPack {
  double F = 0.0;
  std::vector<double> l;  // l_i
  TensorD g, gInv, h, lDeriv;
};

inline MetricPack metric_pack(const MetricSpace& sp, const Point& p) {
  DerivProvider<0> prov(sp, p);
  MetricPack mp;
  mp.F = prov.f();
  if (!(mp.F > 0.0)) throw DomainError("outside Finsler domain");
  mp.g = metric_matrix(prov);
  mp.gInv = invert_matrix(mp.g);
  mp.l = ell_vector(prov);
  mp.lDeriv = ell_deriv_matrix(prov);
  int n = sp.n;
  mp.h = TensorD::square(2, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) mp.h(i, j) = mp.g(i, j) - mp.l[i] * mp.l[j];
  return mp;
}

struct CartanPack {
  TensorD C3;      // C_ijk
  TensorD Cmixed;  // C^h_ij, first slot raised
  std::vector<double> C1, C1up;
  double Csq = 0.0;
  std::optional<TensorD> C4;  // C_ijkh = d_h C_ijk
  std::optional<TensorD> C5;  // C_lijkh = d_h C_lijk
};

inline CartanPack cartan_pack(const MetricSpace& sp, const Point& p, int depth,
                              const MetricPack& mp) {
  DerivProvider<0> prov(sp, p);
  int n = sp.n;
  CartanPack cp;
  cp.C3 = cartan_tensor<3>(prov);
  cp.Cmixed = raise_front(cp.C3, mp.gInv, 1);
  cp.C1.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) acc += cp.C3(i, j, k) * mp.gInv(j, k);
    cp.C1[i] = acc;
  }
  cp.C1up.assign(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cp.C1up[i] += mp.gInv(i, j) * cp.C1[j];
  cp.Csq = 0.0;
  for (int i = 0; i < n; ++i) cp.Csq += cp.C1[i] * cp.C1up[i];
  if (depth >= 4) cp.C4 = cartan_tensor<4>(prov);
  if (depth >= 5) cp.C5 = cartan_tensor<5>(prov);
  return cp;
}

inline CartanPack cartan_pack(const MetricSpace& sp, const Point& p, int depth = 3) {
  return cartan_pack(sp, p, depth, metric_pack(sp, p));
}

struct SprayPack {
  std::vector<double> G;  // G^i
  TensorD GJac;           // G^i_j
  TensorD GConn;          // G^i_jk
};

inline SprayPack spray_pack(const MetricSpace& sp, const Point& p) {
  int n = sp.n;
  SprayPack out;
  out.G.assign(n, 0.0);
  out.GJac = TensorD::square(2, n);
  out.GConn = TensorD::square(3, n);
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      DerivProvider<2> prov(sp, p,
                            {Direction{Axis::Y, a}, Direction{Axis::Y, b}});
      auto g = metric_matrix(prov);
      auto gInv = invert_matrix(g);
      auto G = spray_vector(prov, gInv);
      for (int i = 0; i < n; ++i) {
        if (a == 0 && b == 0) out.G[i] = G[i].value();
        if (b == a) out.GJac(i, a) = G[i].coeff(1);
        out.GConn(i, a, b) = G[i].coeff(3);
        out.GConn(i, b, a) = G[i].coeff(3);
      }
    }
  }
  return out;
}

struct BerwaldTensor {
  TensorD G4;  // G^i_jkh = d_h G^i_jk, slots [i][j][k][h]
};

inline BerwaldTensor berwald_tensor(const MetricSpace& sp, const Point& p) {
  int n = sp.n;
  BerwaldTensor out;
  out.G4 = TensorD::square(4, n);
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      for (int c = b; c < n; ++c) {
        DerivProvider<3> prov(sp, p,
                              {Direction{Axis::Y, a}, Direction{Axis::Y, b},
                               Direction{Axis::Y, c}});
        auto g = metric_matrix(prov);
        auto gInv = invert_matrix(g);
        auto G = spray_vector(prov, gInv);
        int perm[6][3] = {{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}};
        for (int i = 0; i < n; ++i) {
          double v = G[i].coeff(7);
          for (auto& q : perm) out.G4(i, q[0], q[1], q[2]) = v;
        }
      }
    }
  }
  return out;
}

struct LandsbergTensor {
  TensorD L;  // L_jkh = -1/2 F l_i G^i_jkh
};

inline LandsbergTensor landsberg_tensor(const MetricPack& mp, const BerwaldTensor& bt) {
  int n = mp.g.dim(0);
  LandsbergTensor out;
  out.L = TensorD::square(3, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int h = 0; h < n; ++h) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += mp.l[i] * bt.G4(i, j, k, h);
        out.L(j, k, h) = -0.5 * mp.F * acc;
      }
  return out;
}

inline LandsbergTensor landsberg_tensor(const MetricSpace& sp, const Point& p) {
  return landsberg_tensor(metric_pack(sp, p), berwald_tensor(sp, p));
}

struct TTensorPack {
  TensorD T4;            // T_rijk
  TensorD T2;            // T_ij = T_ijhk g^{hk}
  double Tscalar = 0.0;  // T = T_ij g^{ij}
  std::optional<TensorD> T5;  // d_h T^{ri}_jk, slots [r][i][j][k][h]
};

/// Raised T-tensor T^{ri}_jk assembled over any scalar ring; running it over
/// one-generator jets yields the derivative tensor d_h T^{ri}_jk.
template <class P>
Tensor<typename P::Scalar> t_raised_assembly(const P& prov) {
  using S = typename P::Scalar;
  int n = prov.dim();
  auto g = metric_matrix(prov);
  auto gInv = invert_matrix(g);
  auto l = ell_vector(prov);
  S F = prov.f();
  auto C3 = cartan_tensor<3>(prov);
  auto C3u1 = raise_front(C3, gInv, 1);
  auto C4 = cartan_tensor<4>(prov);
  Tensor<S> T4 = t_tensor_assembly(n, F, l, C3, C3u1, C4);
  return raise_front(T4, gInv, 2);
}

inline TTensorPack t_tensor_pack(const MetricSpace& sp, const Point& p, bool withT5,
                                 const MetricPack& mp, const CartanPack& cp) {
  int n = sp.n;
  TTensorPack out;
  const TensorD& C4 = *cp.C4;
  TensorD C3u1 = raise_front(cp.C3, mp.gInv, 1);
  out.T4 = t_tensor_assembly(n, mp.F, mp.l, cp.C3, C3u1, C4);
  out.T2 = TensorD::square(2, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) acc += out.T4(i, j, a, b) * mp.gInv(a, b);
      out.T2(i, j) = acc;
    }
  out.Tscalar = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.Tscalar += out.T2(i, j) * mp.gInv(i, j);
  if (withT5) {
    TensorD T5 = TensorD::square(5, n);
    for (int h = 0; h < n; ++h) {
      DerivProvider<1> prov(sp, p, {Direction{Axis::Y, h}});
      auto traised = t_raised_assembly(prov);
      for (int r = 0; r < n; ++r)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) T5(r, i, j, k, h) = traised(r, i, j, k).coeff(1);
    }
    out.T5 = std::move(T5);
  }
  return out;
}

inline TTensorPack t_tensor_pack(const MetricSpace& sp, const Point& p,
                                 bool withT5 = false) {
  MetricPack mp = metric_pack(sp, p);
  CartanPack cp = cartan_pack(sp, p, 4, mp);
  return t_tensor_pack(sp, p, withT5, mp, cp);
}

struct VCurvaturePack {
  TensorD S4;     // S_ijkh = C^r_ih C_rjk - C^r_ik C_rjh (lowered second slot)
  TensorD Ricci;  // S_ik = S_ijkl g^{jl}
  double Sscalar = 0.0;
  std::optional<double> rho;  // S / ((n-1)(n-2)), n >= 3
};

inline VCurvaturePack v_curvature_pack(const MetricPack& mp, const CartanPack& cp) {
  int n = mp.g.dim(0);
  VCurvaturePack out;
  const TensorD& Cm = cp.Cmixed;  // C^r_ab
  out.S4 = TensorD::square(4, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int h = 0; h < n; ++h) {
          double acc = 0.0;
          for (int r = 0; r < n; ++r)
            acc += Cm(r, i, h) * cp.C3(r, j, k) - Cm(r, i, k) * cp.C3(r, j, h);
          out.S4(i, j, k, h) = acc;
        }
  out.Ricci = TensorD::square(2, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) acc += out.S4(i, j, k, l) * mp.gInv(j, l);
      out.Ricci(i, k) = acc;
    }
  out.Sscalar = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) out.Sscalar += out.Ricci(i, k) * mp.gInv(i, k);
  if (n >= 3) out.rho = out.Sscalar / ((n - 1) * (n - 2));
  return out;
}

inline VCurvaturePack v_curvature_pack(const MetricSpace& sp, const Point& p) {
  MetricPack mp = metric_pack(sp, p);
  CartanPack cp = cartan_pack(sp, p, 3, mp);
  return v_curvature_pack(mp, cp);
}

// ---------------------------------------------------------------------------
// Cartan-derivative identities (dual-path residuals)
// ---------------------------------------------------------------------------

struct CIdentityResiduals {
  // d_h of the raised Cartan family: jet path vs algebraic right side
  double mixed2 = 0.0;  // d_h C^{ir}_j
  double mixed1 = 0.0;  // d_h C^r_sj
  double mixed2d4 = 0.0;  // d_h C^{ir}_jk
  double mixed1d4 = 0.0;  // d_h C^r_ijk
  double tform = 0.0;     // C^{ir}_jkh from the T-tensor expression
};

namespace detail {

/// d_h of an assembled tensor: run `assemble` over one-generator jets per
/// direction h and collect the epsilon coefficients in a trailing slot.
template <class Assemble>
TensorD jet_derivative(const MetricSpace& sp, const Point& p, int rank,
                       Assemble&& assemble) {
  int n = sp.n;
  std::vector<int> dims(rank + 1, n);
  TensorD out(dims);
  std::vector<int> idx(rank + 1, 0);
  for (int h = 0; h < n; ++h) {
    DerivProvider<1> prov(sp, p, {Direction{Axis::Y, h}});
    Tensor<Jet<1>> t = assemble(prov);
    std::fill(idx.begin(), idx.end(), 0);
    idx[rank] = h;
    for (;;) {
      out.at(idx) = t.at(std::span<const int>(idx.data(), rank)).coeff(1);
      int k = rank - 1;
      while (k >= 0 && ++idx[k] == n) idx[k--] = 0;
      if (k < 0) break;
    }
  }
  return out;
}

}  // namespace detail

inline CIdentityResiduals verify_c_identities(const MetricSpace& sp, const Point& p) {
  int n = sp.n;
  MetricPack mp = metric_pack(sp, p);
  CartanPack cp = cartan_pack(sp, p, 5, mp);
  const TensorD& C3 = cp.C3;
  const TensorD& C4 = *cp.C4;
  const TensorD& C5 = *cp.C5;
  TensorD C3u1 = raise_front(C3, mp.gInv, 1);
  TensorD C3u2 = raise_front(C3, mp.gInv, 2);
  TensorD C4u1 = raise_front(C4, mp.gInv, 1);
  TensorD C4u2 = raise_front(C4, mp.gInv, 2);
  TensorD C5u1 = raise_front(C5, mp.gInv, 1);
  TensorD C5u2 = raise_front(C5, mp.gInv, 2);

  CIdentityResiduals out;

  // (a) d_h C^{ir}_j = C^{ir}_jh - 2 C^r_sj C^{is}_h - 2 C^i_sj C^{rs}_h
  {
    TensorD lhs = detail::jet_derivative(sp, p, 3, [](auto& prov) {
      auto g = metric_matrix(prov);
      auto gInv = invert_matrix(g);
      return raise_front(cartan_tensor<3>(prov), gInv, 2);
    });
    TensorD rhs = TensorD::square(4, n);
    for (int i = 0; i < n; ++i)
      for (int r = 0; r < n; ++r)
        for (int j = 0; j < n; ++j)
          for (int h = 0; h < n; ++h) {
            double acc = C4u2(i, r, j, h);
            for (int s = 0; s < n; ++s)
              acc -= 2.0 * C3u1(r, s, j) * C3u2(i, s, h) +
                     2.0 * C3u1(i, s, j) * C3u2(r, s, h);
            rhs(i, r, j, h) = acc;
          }
    out.mixed2 = normalized(max_abs_diff(lhs, rhs), std::max(max_abs(lhs), max_abs(rhs)));
  }

  // (b) d_h C^r_sj = C^r_sjh - 2 C_lsj C^{rl}_h
  {
    TensorD lhs = detail::jet_derivative(sp, p, 3, [](auto& prov) {
      auto g = metric_matrix(prov);
      auto gInv = invert_matrix(g);
      return raise_front(cartan_tensor<3>(prov), gInv, 1);
    });
    TensorD rhs = TensorD::square(4, n);
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s)
        for (int j = 0; j < n; ++j)
          for (int h = 0; h < n; ++h) {
            double acc = C4u1(r, s, j, h);
            for (int le = 0; le < n; ++le) acc -= 2.0 * C3(le, s, j) * C3u2(r, le, h);
            rhs(r, s, j, h) = acc;
          }
    out.mixed1 = normalized(max_abs_diff(lhs, rhs), std::max(max_abs(lhs), max_abs(rhs)));
  }

  // (c) d_h C^{ir}_jk = C^{ir}_jkh - 2 C^r_sjk C^{is}_h - 2 C^i_sjk C^{rs}_h
  {
    TensorD lhs = detail::jet_derivative(sp, p, 4, [](auto& prov) {
      auto g = metric_matrix(prov);
      auto gInv = invert_matrix(g);
      return raise_front(cartan_tensor<4>(prov), gInv, 2);
    });
    TensorD rhs = TensorD::square(5, n);
    for (int i = 0; i < n; ++i)
      for (int r = 0; r < n; ++r)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int h = 0; h < n; ++h) {
              double acc = C5u2(i, r, j, k, h);
              for (int s = 0; s < n; ++s)
                acc -= 2.0 * C4u1(r, s, j, k) * C3u2(i, s, h) +
                       2.0 * C4u1(i, s, j, k) * C3u2(r, s, h);
              rhs(i, r, j, k, h) = acc;
            }
    out.mixed2d4 =
        normalized(max_abs_diff(lhs, rhs), std::max(max_abs(lhs), max_abs(rhs)));
  }

  // (d) d_h C^r_ijk = C^r_ijkh - 2 C^{rs}_h C_sijk
  {
    TensorD lhs = detail::jet_derivative(sp, p, 4, [](auto& prov) {
      auto g = metric_matrix(prov);
      auto gInv = invert_matrix(g);
      return raise_front(cartan_tensor<4>(prov), gInv, 1);
    });
    TensorD rhs = TensorD::square(5, n);
    for (int r = 0; r < n; ++r)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int h = 0; h < n; ++h) {
              double acc = C5u1(r, i, j, k, h);
              for (int s = 0; s < n; ++s) acc -= 2.0 * C3u2(r, s, h) * C4(s, i, j, k);
              rhs(r, i, j, k, h) = acc;
            }
    out.mixed1d4 =
        normalized(max_abs_diff(lhs, rhs), std::max(max_abs(lhs), max_abs(rhs)));
  }

  // C^{ir}_jkh expressed through the T-tensor: obtained by differentiating
  // the raised T-tensor and eliminating d-derivatives of mixed Cartan
  // tensors with the identities above.
  {
    TTensorPack tt = t_tensor_pack(sp, p, /*withT5=*/true, mp, cp);
    const TensorD& T5 = *tt.T5;
    TensorD lhs = C5u2;
    TensorD rhs = TensorD::square(5, n);
    const std::vector<double>& l = mp.l;
    std::vector<double> lup(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) lup[i] += mp.gInv(i, j) * l[j];
    const TensorD& lD = mp.lDeriv;
    TensorD lDup = raise_front(lD, mp.gInv, 1);  // l^i_h
    double F = mp.F;

    for (int i = 0; i < n; ++i)
      for (int r = 0; r < n; ++r)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int h = 0; h < n; ++h) {
              double acc = T5(r, i, j, k, h) - l[h] * C4u2(r, i, j, k);
              for (int s = 0; s < n; ++s) {
                acc += 2.0 * F *
                       (C4u1(r, s, j, k) * C3u2(i, s, h) +
                        C4u1(i, s, j, k) * C3u2(r, s, h));
                acc += l[h] * (C3u1(i, s, j) * C3u2(s, r, k) +
                               C3u1(r, s, j) * C3u2(s, i, k) +
                               C3u2(i, r, s) * C3u1(s, j, k));
                acc += F * (C4u1(i, s, j, h) * C3u2(s, r, k) +
                            C3u1(i, s, j) * C4u2(s, r, k, h) +
                            C4u1(r, s, j, h) * C3u2(s, i, k) +
                            C3u1(r, s, j) * C4u2(s, i, k, h) +
                            C4u2(i, r, s, h) * C3u1(s, j, k) +
                            C4u1(s, j, k, h) * C3u2(i, r, s));
                for (int le = 0; le < n; ++le) {
                  acc -= 2.0 * F *
                         (C3(le, s, j) * C3u2(i, le, h) * C3u2(s, r, k) +
                          C3u1(i, s, j) * C3u1(r, le, k) * C3u2(s, le, h) +
                          C3u1(i, s, j) * C3u1(s, le, k) * C3u2(r, le, h) +
                          C3(le, s, j) * C3u2(r, le, h) * C3u2(s, i, k) +
                          C3u1(r, s, j) * C3u1(i, le, k) * C3u2(s, le, h) +
                          C3u1(r, s, j) * C3u1(s, le, k) * C3u2(i, le, h) +
                          C3u1(r, le, s) * C3u2(i, le, h) * C3u1(s, j, k) +
                          C3u1(i, le, s) * C3u2(r, le, h) * C3u1(s, j, k) +
                          C3u2(i, r, s) * C3(le, j, k) * C3u2(s, le, h));
                }
                acc += 2.0 * l[k] * (C3u1(r, s, j) * C3u2(i, s, h) +
                                     C3u1(i, s, j) * C3u2(r, s, h));
                acc += 2.0 * l[j] * (C3u1(r, s, k) * C3u2(i, s, h) +
                                     C3u1(i, s, k) * C3u2(r, s, h));
                acc += 2.0 * lup[i] * C3(s, j, k) * C3u2(r, s, h);
                acc += 2.0 * lup[r] * C3(s, j, k) * C3u2(i, s, h);
              }
              acc -= C4u2(r, i, j, h) * l[k] + C3u2(r, i, j) * lD(k, h);
              acc -= C4u2(r, i, k, h) * l[j] + C3u2(r, i, k) * lD(j, h);
              acc -= C4u1(r, j, k, h) * lup[i] + C3u1(r, j, k) * lDup(i, h);
              acc -= C4u1(i, j, k, h) * lup[r] + C3u1(i, j, k) * lDup(r, h);
              rhs(i, r, j, k, h) = acc / F;
            }
    out.tform = normalized(max_abs_diff(lhs, rhs), std::max(max_abs(lhs), max_abs(rhs)));
  }

  return out;
}

}  // namespace finsler
