#pragma once

#include "apm/canonical.hpp"
#include "apm/hierarchy.hpp"

#include <limits>

namespace apm {

struct RayShootAnswer {
  Vec point;
  Halfspace witness;
  int witness_facet = -1;
  int leaf = -1;
  int path_length = 0;
  int fanout_checked = 0;   // ellipsoid-ray tests performed
};

// Descend one node per level, taking the lowest-index child whose ellipsoid
// meets the ray O -> q, then intersect the ray with the leaf's witnesses.
inline RayShootAnswer ray_shoot(const LayeredDag& dag, const CanonicalBody& k, const Vec& q) {
  check_dim(k.body, q);
  require(q.norm() > 0.0, ErrorCode::Precondition, "query direction is undefined at the origin");
  const Ray ray = Ray::make(Vec::Zero(k.dim()), q);
  RayShootAnswer ans;
  int cur = -1;
  for (std::size_t i = 0; i < dag.levels.size(); ++i) {
    const auto& level = dag.levels[i];
    int next = -1;
    auto test = [&](int j) {
      ++ans.fanout_checked;
      return ellipsoid_ray_intersect(level[j].ellipsoid, ray);
    };
    if (i == 0) {
      for (std::size_t j = 0; j < level.size() && next < 0; ++j)
        if (test(static_cast<int>(j))) next = static_cast<int>(j);
    } else {
      for (int j : dag.levels[i - 1][cur].children)
        if (test(j)) {
          next = j;
          break;
        }
    }
    require(next >= 0, ErrorCode::Internal, "no ellipsoid meets the query ray at level " + std::to_string(i));
    cur = next;
    ++ans.path_length;
  }
  ans.leaf = cur;
  const auto& leaf = dag.levels.back()[cur];
  double best = std::numeric_limits<double>::infinity();
  for (int f : leaf.witnesses) {
    const Halfspace& h = k.body[f];
    const double den = h.normal.dot(ray.direction);
    if (den <= 0.0) continue;
    const double t = h.offset / den;
    if (t < best) {
      best = t;
      ans.witness_facet = f;
    }
  }
  require(ans.witness_facet >= 0, ErrorCode::Internal, "query ray misses every witness hyperplane");
  ans.witness = k.body[ans.witness_facet];
  ans.point = best * ray.direction;
  return ans;
}

enum class Membership { Inside, Outside };

inline const char* to_string(Membership m) { return m == Membership::Inside ? "Inside" : "Outside"; }

struct MembershipAnswer {
  Membership status = Membership::Inside;
  RayShootAnswer ray;   // empty when q = O
};

inline MembershipAnswer membership(const LayeredDag& dag, const CanonicalBody& k, const Vec& q) {
  check_dim(k.body, q);
  MembershipAnswer a;
  if (q.norm() == 0.0) return a;
  a.ray = ray_shoot(dag, k, q);
  a.status = q.norm() <= a.ray.point.norm() ? Membership::Inside : Membership::Outside;
  return a;
}

}  // namespace apm
