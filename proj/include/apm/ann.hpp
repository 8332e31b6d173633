#pragma once

// Approximate nearest neighbors through central ray shooting: lifting to
// the paraboloid, clipping by the frustum F, and the projective map T
// taking vertical lines to lines through p0 = (0, ..., 0, 2).

#include "apm/canonical.hpp"
#include "apm/hierarchy.hpp"
#include "apm/oracle.hpp"
#include "apm/query.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace apm {

// x_{d+1} = slope . x + intercept, tangent to the paraboloid above site.
struct LiftedHyperplane {
  Vec site;
  Vec slope;
  double intercept = 0.0;

  double value(const Vec& x) const { return slope.dot(x) + intercept; }
  // The side above the hyperplane, as slope . x - x_{d+1} <= -intercept.
  Halfspace upper() const {
    const int d = static_cast<int>(site.size());
    Vec n(d + 1);
    n.head(d) = slope;
    n[d] = -1.0;
    return {n, -intercept};
  }
};

inline LiftedHyperplane lift(const Vec& p) {
  require(all_finite(p), ErrorCode::Input, "site has non-finite coordinates");
  return {p, 2.0 * p, -p.squaredNorm()};
}

inline Vec lift_point(const Vec& p) {
  const int d = static_cast<int>(p.size());
  Vec u(d + 1);
  u.head(d) = p;
  u[d] = p.squaredNorm();
  return u;
}

// Convex hull of the cube |x_i| <= 1/2 at height -1 and |x_i| <= 5/6 at +1.
struct Frustum {
  int dim = 0;   // ambient dimension d + 1

  std::vector<Halfspace> halfspaces() const {
    const int d = dim - 1;
    std::vector<Halfspace> hs;
    hs.push_back(Halfspace::make(-unit_vec(dim, d), 1.0));
    hs.push_back(Halfspace::make(unit_vec(dim, d), 1.0));
    for (int i = 0; i < d; ++i)
      for (double s : {1.0, -1.0}) {
        Vec n = Vec::Zero(dim);
        n[i] = s;
        n[d] = -1.0 / 6.0;
        hs.push_back(Halfspace::make(n, 2.0 / 3.0));
      }
    return hs;
  }

  std::vector<Vec> corners() const {
    const int d = dim - 1;
    std::vector<Vec> out;
    for (double h : {-1.0, 1.0}) {
      const double half = h < 0.0 ? 0.5 : 5.0 / 6.0;
      for (int m = 0; m < (1 << d); ++m) {
        Vec v(dim);
        for (int i = 0; i < d; ++i) v[i] = (m >> i) & 1 ? half : -half;
        v[d] = h;
        out.push_back(v);
      }
    }
    return out;
  }

  bool contains(const Vec& x, double tol = 1e-12) const {
    for (const auto& h : halfspaces())
      if (h.slack(x) < -tol) return false;
    return true;
  }
};

// Homogeneous matrices of T on [x_0, x_1, ..., x_{d+1}] and of its inverse.
inline Mat projective_matrix(int d) {
  require(d >= 1 && d + 2 <= kMaxDim, ErrorCode::Input, "dimension out of range for T");
  Mat t = Mat::Zero(d + 2, d + 2);
  t(0, 0) = 4.0;
  t(0, d + 1) = 1.0;
  for (int i = 1; i <= d; ++i) t(i, i) = 4.0;
  t(d + 1, d + 1) = 2.0;
  return t;
}

inline Mat projective_inverse_matrix(int d) {
  require(d >= 1 && d + 2 <= kMaxDim, ErrorCode::Input, "dimension out of range for T");
  Mat t = Mat::Zero(d + 2, d + 2);
  t(0, 0) = 2.0;
  t(0, d + 1) = -1.0;
  for (int i = 1; i <= d; ++i) t(i, i) = 2.0;
  t(d + 1, d + 1) = 4.0;
  return t / 8.0;
}

inline Vec homogeneous(const Vec& p) {
  Vec h(p.size() + 1);
  h[0] = 1.0;
  h.tail(p.size()) = p;
  return h;
}

inline Vec from_homogeneous(const Vec& h) {
  require(h[0] != 0.0, ErrorCode::ProjectiveDegenerate, "point at infinity has no Cartesian form");
  return h.tail(h.size() - 1) / h[0];
}

inline Vec apply_T(const Vec& p) {
  const int n = static_cast<int>(p.size());
  require(n >= 2 && n + 1 <= kMaxDim, ErrorCode::Input, "dimension out of range for T");
  const double den = 4.0 + p[n - 1];
  require(den != 0.0, ErrorCode::ProjectiveDegenerate, "T is undefined on x_{d+1} = -4");
  Vec out(n);
  out.head(n - 1) = 4.0 * p.head(n - 1) / den;
  out[n - 1] = 2.0 * p[n - 1] / den;
  return out;
}

inline Vec apply_T_inv(const Vec& p) {
  const int n = static_cast<int>(p.size());
  require(n >= 2 && n + 1 <= kMaxDim, ErrorCode::Input, "dimension out of range for T");
  const double den = 2.0 - p[n - 1];
  require(den != 0.0, ErrorCode::ProjectiveDegenerate, "inverse of T is undefined on x_{d+1} = 2");
  Vec out(n);
  out.head(n - 1) = 2.0 * p.head(n - 1) / den;
  out[n - 1] = 4.0 * p[n - 1] / den;
  return out;
}

inline Vec sphere_p0(int d) { return 2.0 * unit_vec(d + 1, d); }

// phi(x) = sum x_i^2 + (x_{d+1} - 1)^2 - 1, zero on the sphere S.
inline double sphere_residual(const Vec& x) {
  const int n = static_cast<int>(x.size());
  return x.head(n - 1).squaredNorm() + (x[n - 1] - 1.0) * (x[n - 1] - 1.0) - 1.0;
}

// Image under T of a . x + a_z x_{d+1} <= b, restricted to x_{d+1} > -4,
// then translated by -p0.
inline Halfspace transform_halfspace(const Halfspace& h) {
  const int n = h.dim();
  const double az = h.normal[n - 1];
  Vec m(n);
  m.head(n - 1) = 2.0 * h.normal.head(n - 1);
  m[n - 1] = 4.0 * az + h.offset;
  return Halfspace::make(m, -8.0 * az);
}

struct CellStructure {
  CanonicalBody body;
  LayeredDag dag;
  std::vector<int> rep_of_facet;   // site index per body facet, -1 for frustum facets
};

struct AnnConfig {
  int brute_threshold = 16;
  double c = 4.0;        // Hausdorff constant of the reduction
  int max_depth = 60;
  BuildConfig dag;
};

// Facets of T(E(R) cap F) - p0 with the top facet raised to 8/3: one per
// site, then the bottom, the 2d sides and the raised top.
inline HPolytope cell_polytope(const std::vector<Vec>& reps, std::vector<int>* rep_of_facet = nullptr) {
  require(!reps.empty(), ErrorCode::Input, "representative set is empty");
  const int d = static_cast<int>(reps[0].size());
  std::vector<Halfspace> hs;
  if (rep_of_facet) rep_of_facet->clear();
  for (std::size_t j = 0; j < reps.size(); ++j) {
    require(static_cast<int>(reps[j].size()) == d, ErrorCode::Input, "representative dimension mismatch");
    hs.push_back(transform_halfspace(lift(reps[j]).upper()));
    if (rep_of_facet) rep_of_facet->push_back(static_cast<int>(j));
  }
  const auto f = Frustum{d + 1}.halfspaces();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i == 1) continue;
    hs.push_back(transform_halfspace(f[i]));
    if (rep_of_facet) rep_of_facet->push_back(-1);
  }
  hs.push_back({unit_vec(d + 1, d), 8.0 / 3.0 - 2.0});
  if (rep_of_facet) rep_of_facet->push_back(-1);
  return HPolytope(d + 1, std::move(hs));
}

// Reps are normalized: the cell and the reps lie within 1/2 of the origin.
inline CellStructure build_cell_structure(const std::vector<Vec>& reps, double eps, const AnnConfig& cfg = {}) {
  require(eps > 0.0 && eps <= 1.0, ErrorCode::Input, "eps must lie in (0, 1]");
  CellStructure cs;
  const HPolytope p = cell_polytope(reps, &cs.rep_of_facet);
  const int n = p.dim();
  cs.body = canonicalize_centered(p, Vec::Zero(n));
  const double cprime = 8.0 * n;
  const double scale = detail::min_singular(cs.body.map.matrix);
  const double eps_dag = std::min(1.0, eps / (cfg.c * cprime) * scale);
  cs.dag = build_dag(cs.body, eps_dag, cfg.dag);
  return cs;
}

// Site index of the facet hit by the central ray for normalized query q,
// or -1 when the witness is a frustum facet.
inline int cell_query(const CellStructure& cs, const Vec& q) {
  const int d = static_cast<int>(q.size());
  Vec dir(d + 1);
  dir.head(d) = q;
  dir[d] = -2.0;
  const auto a = ray_shoot(cs.dag, cs.body, cs.body.map.matrix * dir);
  return cs.rep_of_facet[a.witness_facet];
}

struct AnnCell {
  int rep_begin = 0;    // range in AnnIndex::rep_pool
  int rep_count = 0;
  int structure = -1;   // index into AnnIndex::structures
};

struct CellGeometry {
  Vec center;
  double half = 0.0;
};

struct AnnStructure {
  int cell = -1;
  Vec center;
  double norm_scale = 1.0;   // q -> norm_scale * (q - center)
  CellStructure cs;
};

struct AnnStats {
  long leaves = 0;
  long total_reps = 0;
  int max_reps = 0;
  int dag_cells = 0;
  int depth = 0;
  bool m_clamped = false;
};

struct AnnIndex {
  std::vector<Vec> points;      // as given
  std::vector<int> unique;      // lowest input index of each distinct point
  double eps = 0.0;
  int m = 0;
  double t = 0.0;
  Vec center;
  double half = 0.0;
  // quadtree: node i has children first_child[i] .. + 2^d; leaves have leaf[i] >= 0
  std::vector<int> first_child;
  std::vector<int> leaf;
  std::vector<AnnCell> cells;
  std::vector<int> rep_pool;
  std::vector<AnnStructure> structures;
  AnnStats stats;
  std::vector<std::string> warnings;

  int dim() const { return points.empty() ? 0 : static_cast<int>(points[0].size()); }
  std::span<const int> reps(int cell) const {
    return {rep_pool.data() + cells[cell].rep_begin, static_cast<std::size_t>(cells[cell].rep_count)};
  }
};

// Integer m range [ceil(log 1/eps), floor(1 / (eps^{d/2} log 1/eps))].
inline std::pair<int, int> ann_m_range(double eps, int d) {
  const double l = std::log(1.0 / eps);
  const int lo = std::max(1, static_cast<int>(std::ceil(l - 1e-12)));
  if (l <= 0.0) return {lo, std::numeric_limits<int>::max()};
  const double hi = 1.0 / (std::pow(eps, 0.5 * d) * l);
  const int hi_i = hi >= static_cast<double>(std::numeric_limits<int>::max())
                       ? std::numeric_limits<int>::max()
                       : static_cast<int>(std::floor(hi + 1e-12));
  return {lo, std::max(lo, hi_i)};
}

namespace detail {

template <class Ids>
inline int brute_nn(const std::vector<Vec>& pts, const Ids& ids, const Vec& q) {
  int best = -1;
  double bd = std::numeric_limits<double>::infinity();
  for (int i : ids) {
    const double dd = (pts[i] - q).squaredNorm();
    if (dd < bd) {
      bd = dd;
      best = i;
    }
  }
  return best;
}

}  // namespace detail

inline AnnIndex build_ann(const std::vector<Vec>& x, double eps, int m, const AnnConfig& cfg = {}) {
  require(!x.empty(), ErrorCode::Input, "point set is empty");
  require(eps > 0.0 && eps <= 1.0, ErrorCode::Input, "eps must lie in (0, 1]");
  const int d = static_cast<int>(x[0].size());
  require(d >= 1 && d + 2 <= kMaxDim, ErrorCode::Input, "point dimension out of range");
  AnnIndex idx;
  idx.points = x;
  idx.eps = eps;
  for (const auto& p : x) {
    require(static_cast<int>(p.size()) == d, ErrorCode::Input, "point dimension mismatch");
    require(all_finite(p), ErrorCode::Input, "point has non-finite coordinates");
  }
  const auto [mlo, mhi] = ann_m_range(eps, d);
  idx.m = std::clamp(m, mlo, mhi);
  if (idx.m != m) {
    idx.stats.m_clamped = true;
    idx.warnings.push_back("m = " + std::to_string(m) + " outside [" + std::to_string(mlo) + ", " +
                           std::to_string(mhi) + "], clamped to " + std::to_string(idx.m));
  }
  idx.t = 1.0 / (idx.m * std::pow(eps, 0.5 * d));
  const double cap = std::max(idx.t, 1.0);

  std::vector<int> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (int i = 0; i < d; ++i)
      if (x[a][i] != x[b][i]) return x[a][i] < x[b][i];
    return a < b;
  });
  for (std::size_t k = 0; k < order.size(); ++k)
    if (k == 0 || x[order[k]] != x[order[k - 1]]) idx.unique.push_back(order[k]);
  std::sort(idx.unique.begin(), idx.unique.end());

  Vec lo = x[idx.unique[0]], hi = lo;
  for (int i : idx.unique) {
    lo = lo.cwiseMin(x[i]);
    hi = hi.cwiseMax(x[i]);
  }
  idx.center = 0.5 * (lo + hi);
  idx.half = 0.5 * (hi - lo).maxCoeff();
  idx.half = idx.half > 0.0 ? idx.half * (1.0 + 1e-9) : 1.0;

  struct Item {
    int node;
    Vec center;
    double half;
    int depth;
    std::vector<int> cand;
  };
  std::vector<Item> stack;
  std::vector<CellGeometry> big;   // geometry of cells that get a structure
  idx.first_child.push_back(-1);
  idx.leaf.push_back(-1);
  stack.push_back({0, idx.center, idx.half, 0, idx.unique});
  const double rfac = std::sqrt(static_cast<double>(d));
  while (!stack.empty()) {
    Item it = std::move(stack.back());
    stack.pop_back();
    const double r = it.half * rfac;
    int nearest = -1;
    double dmin = std::numeric_limits<double>::infinity();
    for (int i : it.cand) {
      const double dd = (x[i] - it.center).norm();
      if (dd < dmin) {
        dmin = dd;
        nearest = i;
      }
    }
    // p survives only if some q in the cell is at least as close to p as
    // to the point nearest the center; the test is linear in q.
    std::vector<int> reps;
    const Vec& pn = x[nearest];
    for (int i : it.cand) {
      if ((x[i] - it.center).norm() > dmin + 2.0 * r) continue;
      const Vec v = x[i] - pn;
      const double gain = 2.0 * (it.center.dot(v) + it.half * v.lpNorm<1>()) + pn.squaredNorm() - x[i].squaredNorm();
      if (i == nearest || gain >= -1e-12 * (1.0 + x[i].squaredNorm())) reps.push_back(i);
    }
    const bool single = r <= eps * dmin / (2.0 + eps);
    if (single) reps = {nearest};
    if (static_cast<double>(reps.size()) <= cap || single) {
      AnnCell cell;
      cell.rep_begin = static_cast<int>(idx.rep_pool.size());
      cell.rep_count = static_cast<int>(reps.size());
      idx.rep_pool.insert(idx.rep_pool.end(), reps.begin(), reps.end());
      if (cell.rep_count > cfg.brute_threshold) {
        cell.structure = static_cast<int>(big.size());
        big.push_back({it.center, it.half});
      }
      idx.leaf[it.node] = static_cast<int>(idx.cells.size());
      idx.stats.depth = std::max(idx.stats.depth, it.depth);
      idx.stats.total_reps += cell.rep_count;
      idx.stats.max_reps = std::max(idx.stats.max_reps, cell.rep_count);
      idx.cells.push_back(cell);
      continue;
    }
    require(it.depth < cfg.max_depth, ErrorCode::Degenerate, "quadtree depth exceeds the limit");
    const int first = static_cast<int>(idx.first_child.size());
    idx.first_child[it.node] = first;
    for (int c = 0; c < (1 << d); ++c) {
      idx.first_child.push_back(-1);
      idx.leaf.push_back(-1);
    }
    for (int c = (1 << d) - 1; c >= 0; --c) {
      Vec cc = it.center;
      for (int i = 0; i < d; ++i) cc[i] += ((c >> i) & 1 ? 0.5 : -0.5) * it.half;
      stack.push_back({first + c, cc, 0.5 * it.half, it.depth + 1, reps});
    }
  }

  for (int c = 0; c < static_cast<int>(idx.cells.size()); ++c) {
    const AnnCell& cell = idx.cells[c];
    if (cell.structure < 0) continue;
    const CellGeometry& g = big[cell.structure];
    AnnStructure st;
    st.cell = c;
    st.center = g.center;
    double reach = g.half * rfac;
    for (int i : idx.reps(c)) reach = std::max(reach, (x[i] - g.center).norm());
    st.norm_scale = 0.5 / reach;
    std::vector<Vec> normalized;
    for (int i : idx.reps(c)) normalized.push_back(st.norm_scale * (x[i] - g.center));
    st.cs = build_cell_structure(normalized, eps, cfg);
    idx.structures.push_back(std::move(st));
  }
  idx.stats.dag_cells = static_cast<int>(idx.structures.size());
  idx.stats.leaves = static_cast<long>(idx.cells.size());
  return idx;
}

// Leaf cell containing q, or -1 outside the domain box.
inline int locate_cell(const AnnIndex& idx, const Vec& q, CellGeometry* geom = nullptr) {
  const int d = idx.dim();
  if (((q - idx.center).cwiseAbs().array() > idx.half).any()) return -1;
  int node = 0;
  Vec c = idx.center;
  double h = idx.half;
  while (idx.leaf[node] < 0) {
    int k = 0;
    for (int i = 0; i < d; ++i)
      if (q[i] >= c[i]) k |= 1 << i;
    h *= 0.5;
    for (int i = 0; i < d; ++i) c[i] += ((k >> i) & 1 ? 1.0 : -1.0) * h;
    node = idx.first_child[node] + k;
  }
  if (geom) *geom = {c, h};
  return idx.leaf[node];
}

struct NnAnswer {
  int index = -1;
  double distance = 0.0;
  int cell = -1;
  bool used_structure = false;
  bool fallback = false;   // brute force over the cell reps or the whole set
};

inline NnAnswer nn_query_detail(const AnnIndex& idx, const Vec& q) {
  require(static_cast<int>(q.size()) == idx.dim(), ErrorCode::Input, "query dimension mismatch");
  require(all_finite(q), ErrorCode::Input, "query has non-finite coordinates");
  NnAnswer a;
  a.cell = locate_cell(idx, q);
  if (a.cell < 0) {
    a.fallback = true;
    a.index = detail::brute_nn(idx.points, idx.unique, q);
  } else {
    const AnnCell& cell = idx.cells[a.cell];
    const auto reps = idx.reps(a.cell);
    if (cell.structure >= 0) {
      const AnnStructure& st = idx.structures[cell.structure];
      const int site = cell_query(st.cs, st.norm_scale * (q - st.center));
      if (site >= 0) {
        a.used_structure = true;
        a.index = reps[site];
      }
    }
    if (a.index < 0) {
      a.fallback = cell.structure >= 0;
      a.index = detail::brute_nn(idx.points, reps, q);
    }
  }
  a.distance = (idx.points[a.index] - q).norm();
  return a;
}

inline int nn_query(const AnnIndex& idx, const Vec& q) { return nn_query_detail(idx, q).index; }

}  // namespace apm
