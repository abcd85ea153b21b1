#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace finsler {

/// Dense multi-index array over any scalar ring. All geometry tensors here
/// have equal extents per slot (the space dimension), but extents are kept
/// per-slot anyway.
template <class S>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::initializer_list<int> dims) { reshape(std::vector<int>(dims)); }
  explicit Tensor(std::vector<int> dims) { reshape(std::move(dims)); }

  /// Square tensor: `rank` slots of extent n.
  static Tensor square(int rank, int n) {
    return Tensor(std::vector<int>(static_cast<std::size_t>(rank), n));
  }

  void reshape(std::vector<int> dims) {
    dims_ = std::move(dims);
    strides_.assign(dims_.size(), 1);
    std::size_t total = 1;
    for (int k = static_cast<int>(dims_.size()) - 1; k >= 0; --k) {
      strides_[k] = total;
      total *= static_cast<std::size_t>(dims_[k]);
    }
    data_.assign(total, S{});
  }

  int rank() const { return static_cast<int>(dims_.size()); }
  int dim(int k) const { return dims_[k]; }
  const std::vector<int>& dims() const { return dims_; }

  template <class... I>
  S& operator()(I... idx) {
    return data_[offset(idx...)];
  }
  template <class... I>
  const S& operator()(I... idx) const {
    return data_[offset(idx...)];
  }

  S& at(std::span<const int> idx) { return data_[offset_span(idx)]; }
  const S& at(std::span<const int> idx) const { return data_[offset_span(idx)]; }

  std::vector<S>& data() { return data_; }
  const std::vector<S>& data() const { return data_; }

 private:
  std::vector<int> dims_;
  std::vector<std::size_t> strides_;
  std::vector<S> data_;

  template <class... I>
  std::size_t offset(I... idx) const {
    assert(sizeof...(idx) == dims_.size());
    std::size_t off = 0;
    std::size_t k = 0;
    ((off += strides_[k++] * static_cast<std::size_t>(idx)), ...);
    return off;
  }
  std::size_t offset_span(std::span<const int> idx) const {
    assert(idx.size() == dims_.size());
    std::size_t off = 0;
    for (std::size_t k = 0; k < idx.size(); ++k)
      off += strides_[k] * static_cast<std::size_t>(idx[k]);
    return off;
  }
};

using TensorD = Tensor<double>;

inline double max_abs(const TensorD& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

inline double max_abs_diff(const TensorD& a, const TensorD& b) {
  assert(a.dims() == b.dims());
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

/// Scale-free residual: max deviation over 1 + reference magnitude.
inline double normalized(double maxAbsDeviation, double referenceScale) {
  return maxAbsDeviation / (1.0 + referenceScale);
}

/// Fill a fully symmetric tensor: `compute` is called once per non-decreasing
/// index tuple; other tuples mirror the sorted one (already filled, since the
/// sorted permutation precedes them in row-major order).
template <class S, class F>
void fill_symmetric(Tensor<S>& t, F&& compute) {
  int r = t.rank();
  std::vector<int> idx(r, 0);
  std::vector<int> sorted(r);
  for (;;) {
    bool nondecreasing = std::is_sorted(idx.begin(), idx.end());
    if (nondecreasing) {
      t.at(idx) = compute(std::span<const int>(idx));
    } else {
      sorted = idx;
      std::sort(sorted.begin(), sorted.end());
      t.at(idx) = t.at(std::span<const int>(sorted));
    }
    int k = r - 1;
    while (k >= 0 && ++idx[k] == t.dim(k)) idx[k--] = 0;
    if (k < 0) break;
  }
}

/// Contract one slot with a symmetric rank-2 tensor (metric raise/lower):
/// out(..., a, ...) = sum_b m(a,b) t(..., b, ...).
template <class S>
Tensor<S> contract_slot(const Tensor<S>& t, int slot, const Tensor<S>& m) {
  assert(m.rank() == 2);
  int n = t.dim(slot);
  Tensor<S> out(t.dims());
  int r = t.rank();
  std::vector<int> idx(r, 0);
  for (;;) {
    S acc{};
    std::vector<int> src = idx;
    for (int b = 0; b < n; ++b) {
      src[slot] = b;
      acc = acc + m(idx[slot], b) * t.at(std::span<const int>(src));
    }
    out.at(idx) = acc;
    int k = r - 1;
    while (k >= 0 && ++idx[k] == out.dim(k)) idx[k--] = 0;
    if (k < 0) break;
  }
  return out;
}

/// Raise the first `count` slots with the inverse metric.
template <class S>
Tensor<S> raise_front(const Tensor<S>& t, const Tensor<S>& gInv, int count) {
  Tensor<S> out = t;
  for (int k = 0; k < count; ++k) out = contract_slot(out, k, gInv);
  return out;
}

/// Max deviation of a fully symmetric candidate from exact symmetry,
/// over all index permutations.
inline double symmetry_residual(const TensorD& t) {
  int r = t.rank();
  std::vector<int> idx(r, 0), perm(r);
  double m = 0.0;
  for (;;) {
    perm = idx;
    std::sort(perm.begin(), perm.end());
    do {
      m = std::max(m, std::abs(t.at(idx) - t.at(std::span<const int>(perm))));
    } while (std::next_permutation(perm.begin(), perm.end()));
    int k = r - 1;
    while (k >= 0 && ++idx[k] == t.dim(k)) idx[k--] = 0;
    if (k < 0) break;
  }
  return m;
}

}  // namespace finsler
