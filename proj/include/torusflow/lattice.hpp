#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

namespace torusflow {

using Index = std::array<int, 2>;

inline int l1_norm(const Index& k, int dim) {
  int s = 0;
  for (int j = 0; j < dim; ++j) s += k[j] < 0 ? -k[j] : k[j];
  return s;
}

/// The set {k in Z^dim : |k|_1 <= order}, enumerated in a fixed order.
/// Instances are interned; compare by pointer.
class Lattice {
 public:
  static std::shared_ptr<const Lattice> get(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  std::size_t size() const { return indices_.size(); }
  const Index& operator[](std::size_t i) const { return indices_[i]; }
  const std::vector<Index>& indices() const { return indices_; }

  /// Position of k, or -1 if |k|_1 > order.
  long find(const Index& k) const;
  /// Position of -k (always present).
  std::size_t mirror(std::size_t i) const { return mirror_[i]; }

 private:
  Lattice(int dim, int order);

  int dim_;
  int order_;
  std::vector<Index> indices_;
  std::vector<std::size_t> mirror_;
  std::vector<long> lookup_;  // dense box [-order, order]^dim
};

}  // namespace torusflow
