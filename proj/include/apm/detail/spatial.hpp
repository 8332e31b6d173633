#pragma once

#include "apm/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <unordered_map>
#include <vector>

namespace apm::detail {

// Static kd-tree over points, answering fixed-radius queries.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::vector<Vec> pts) : pts_(std::move(pts)) {
    idx_.resize(pts_.size());
    std::iota(idx_.begin(), idx_.end(), 0);
    if (!pts_.empty()) build(0, static_cast<int>(idx_.size()), 0);
  }

  std::size_t size() const { return pts_.size(); }

  // indices with |p - q| <= r, ascending
  void radius(const Vec& q, double r, std::vector<int>& out) const {
    out.clear();
    if (pts_.empty()) return;
    search(0, static_cast<int>(idx_.size()), 0, q, r * r, out);
    std::sort(out.begin(), out.end());
  }

 private:
  void build(int lo, int hi, int depth) {
    if (hi - lo <= 8) return;
    const int d = static_cast<int>(pts_[0].size());
    const int axis = depth % d;
    const int mid = (lo + hi) / 2;
    std::nth_element(idx_.begin() + lo, idx_.begin() + mid, idx_.begin() + hi,
                     [&](int a, int b) { return pts_[a][axis] < pts_[b][axis]; });
    build(lo, mid, depth + 1);
    build(mid + 1, hi, depth + 1);
  }

  void search(int lo, int hi, int depth, const Vec& q, double r2, std::vector<int>& out) const {
    if (hi - lo <= 8) {
      for (int i = lo; i < hi; ++i)
        if ((pts_[idx_[i]] - q).squaredNorm() <= r2) out.push_back(idx_[i]);
      return;
    }
    const int d = static_cast<int>(pts_[0].size());
    const int axis = depth % d;
    const int mid = (lo + hi) / 2;
    const Vec& p = pts_[idx_[mid]];
    if ((p - q).squaredNorm() <= r2) out.push_back(idx_[mid]);
    const double diff = q[axis] - p[axis];
    if (diff <= 0.0 || diff * diff <= r2) search(lo, mid, depth + 1, q, r2, out);
    if (diff >= 0.0 || diff * diff <= r2) search(mid + 1, hi, depth + 1, q, r2, out);
  }

  std::vector<Vec> pts_;
  std::vector<int> idx_;
};

// Uniform hash grid of axis-aligned boxes. Boxes spanning too many cells go
// to an overflow list that every query scans.
class BoxGrid {
 public:
  BoxGrid(int dim, double cell) : d_(dim), cell_(cell) {}

  void insert(int id, const Vec& lo, const Vec& hi) {
    std::int64_t a[kMaxDim], b[kMaxDim];
    double count = 1.0;
    for (int i = 0; i < d_; ++i) {
      a[i] = key(lo[i]);
      b[i] = key(hi[i]);
      count *= static_cast<double>(b[i] - a[i] + 1);
    }
    if (count > 512) {
      big_.push_back(id);
      return;
    }
    for_cells(a, b, [&](std::uint64_t h) { cells_[h].push_back(id); });
  }

  // ids of boxes whose cells meet [lo, hi]; may contain duplicates
  void query(const Vec& lo, const Vec& hi, std::vector<int>& out) const {
    out.assign(big_.begin(), big_.end());
    std::int64_t a[kMaxDim], b[kMaxDim];
    for (int i = 0; i < d_; ++i) {
      a[i] = key(lo[i]);
      b[i] = key(hi[i]);
    }
    for_cells(a, b, [&](std::uint64_t h) {
      auto it = cells_.find(h);
      if (it != cells_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
    });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }

 private:
  std::int64_t key(double x) const { return static_cast<std::int64_t>(std::floor(x / cell_)); }

  template <class F>
  void for_cells(const std::int64_t* a, const std::int64_t* b, F&& f) const {
    std::int64_t c[kMaxDim];
    for (int i = 0; i < d_; ++i) c[i] = a[i];
    for (;;) {
      std::uint64_t h = 1469598103934665603ULL;
      for (int i = 0; i < d_; ++i) {
        h ^= static_cast<std::uint64_t>(c[i]);
        h *= 1099511628211ULL;
      }
      f(h);
      int i = 0;
      while (i < d_ && ++c[i] > b[i]) {
        c[i] = a[i];
        ++i;
      }
      if (i == d_) break;
    }
  }

  int d_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
  std::vector<int> big_;
};

}  // namespace apm::detail
