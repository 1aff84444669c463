#include "torusflow/lattice.hpp"

#include <map>
#include <mutex>
#include <utility>

#include "torusflow/errors.hpp"

namespace torusflow {

Lattice::Lattice(int dim, int order) : dim_(dim), order_(order) {
  require(dim == 1 || dim == 2, "lattice dimension must be 1 or 2");
  require(order >= 0, "truncation order must be nonnegative");
  const int width = 2 * order + 1;
  lookup_.assign(dim == 1 ? width : width * width, -1);
  if (dim == 1) {
    for (int k = -order; k <= order; ++k) {
      lookup_[k + order] = static_cast<long>(indices_.size());
      indices_.push_back({k, 0});
    }
  } else {
    for (int k1 = -order; k1 <= order; ++k1) {
      const int rest = order - (k1 < 0 ? -k1 : k1);
      for (int k2 = -rest; k2 <= rest; ++k2) {
        lookup_[(k1 + order) * width + (k2 + order)] = static_cast<long>(indices_.size());
        indices_.push_back({k1, k2});
      }
    }
  }
  mirror_.resize(indices_.size());
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    mirror_[i] = static_cast<std::size_t>(find({-indices_[i][0], -indices_[i][1]}));
  }
}

long Lattice::find(const Index& k) const {
  if (l1_norm(k, dim_) > order_) return -1;
  if (dim_ == 1) return k[1] == 0 ? lookup_[k[0] + order_] : -1;
  const int width = 2 * order_ + 1;
  return lookup_[(k[0] + order_) * width + (k[1] + order_)];
}

std::shared_ptr<const Lattice> Lattice::get(int dim, int order) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const Lattice>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{dim, order}];
  if (!slot) slot = std::shared_ptr<const Lattice>(new Lattice(dim, order));
  return slot;
}

}  // namespace torusflow
