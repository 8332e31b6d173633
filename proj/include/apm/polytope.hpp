#pragma once

#include "apm/halfspace.hpp"
#include "apm/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace apm {

inline constexpr double kContainTol = 1e-12;

// Convex body given as an intersection of halfspaces. Redundant and
// duplicate halfspaces are allowed and kept.
class HPolytope {
 public:
  HPolytope() = default;
  HPolytope(int dim, std::vector<Halfspace> halfspaces) : dim_(dim), hs_(std::move(halfspaces)) {
    require(dim >= 1 && dim <= kMaxDim - 1, ErrorCode::Input, "polytope dimension out of range");
    for (auto& h : hs_) {
      require(h.dim() == dim, ErrorCode::Input, "halfspace dimension mismatch");
      const double len = h.normal.norm();
      if (std::abs(len - 1.0) > 1e-12) h = Halfspace::make(h.normal, h.offset);
    }
  }

  int dim() const { return dim_; }
  std::size_t size() const { return hs_.size(); }
  bool empty() const { return hs_.empty(); }
  const std::vector<Halfspace>& halfspaces() const { return hs_; }
  const Halfspace& operator[](std::size_t i) const { return hs_[i]; }

  double min_slack(const Vec& y) const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& h : hs_) m = std::min(m, h.slack(y));
    return m;
  }

  bool operator==(const HPolytope& o) const { return dim_ == o.dim_ && hs_ == o.hs_; }

 private:
  int dim_ = 0;
  std::vector<Halfspace> hs_;
};

inline void check_dim(const HPolytope& p, const Vec& q) {
  require(static_cast<int>(q.size()) == p.dim(), ErrorCode::Input, "dimension mismatch");
}

inline bool contains(const HPolytope& p, const Vec& q, double tol = kContainTol) {
  check_dim(p, q);
  for (const auto& h : p.halfspaces())
    if (h.normal.dot(q) > h.offset + tol) return false;
  return true;
}

struct RayExit {
  double t = 0.0;
  int facet = -1;
};

// First boundary crossing of a ray whose origin is interior. Ties go to the
// lowest facet index.
inline RayExit ray_exit(const HPolytope& p, const Ray& r) {
  check_dim(p, r.origin);
  RayExit best{std::numeric_limits<double>::infinity(), -1};
  for (std::size_t j = 0; j < p.size(); ++j) {
    const auto& h = p[j];
    const double slack = h.slack(r.origin);
    require(slack > 0.0, ErrorCode::Precondition, "ray origin is not interior");
    const double den = h.normal.dot(r.direction);
    if (den > 0.0) {
      const double t = slack / den;
      if (t < best.t) best = {t, static_cast<int>(j)};
    }
  }
  require(best.facet >= 0, ErrorCode::Unbounded, "ray never leaves the polytope");
  return best;
}

inline LpResult support_lp(const HPolytope& p, const Vec& direction) {
  check_dim(p, direction);
  auto r = solve_lp(direction, p.halfspaces());
  require(r.status != LpStatus::Infeasible, ErrorCode::Infeasible, "empty polytope");
  require(r.status != LpStatus::Unbounded, ErrorCode::Unbounded, "polytope unbounded in direction");
  return r;
}

inline double support(const HPolytope& p, const Vec& direction) {
  return support_lp(p, direction).value;
}

struct Ball {
  Vec center;
  double radius = 0.0;
};

// Largest inscribed ball: maximize r subject to a_j . y + r <= b_j.
inline Ball chebyshev_ball(const HPolytope& p) {
  const int d = p.dim();
  std::vector<Halfspace> lifted;
  lifted.reserve(p.size() + 1);
  for (const auto& h : p.halfspaces()) {
    Vec n(d + 1);
    n.head(d) = h.normal;
    n[d] = 1.0;
    lifted.push_back({n, h.offset});
  }
  Vec c = Vec::Zero(d + 1);
  c[d] = 1.0;
  const auto r = solve_lp(c, lifted);
  require(r.status != LpStatus::Unbounded, ErrorCode::Unbounded, "Chebyshev LP unbounded");
  require(r.status == LpStatus::Optimal, ErrorCode::Infeasible, "Chebyshev LP infeasible");
  return {r.optimum.head(d), r.optimum[d]};
}

struct Box {
  Vec lo, hi;
};

inline Box bounding_box(const HPolytope& p) {
  const int d = p.dim();
  Box b{Vec(d), Vec(d)};
  for (int i = 0; i < d; ++i) {
    b.hi[i] = support(p, unit_vec(d, i));
    b.lo[i] = -support(p, unit_vec(d, i, -1.0));
  }
  return b;
}

// Bounded with nonempty interior; throws Input otherwise.
inline Ball validate_body(const HPolytope& p) {
  require(p.dim() >= 1, ErrorCode::Input, "polytope has no dimension");
  require(!p.empty(), ErrorCode::Input, "polytope has no halfspaces (unbounded)");
  Ball b;
  try {
    b = chebyshev_ball(p);
  } catch (const Error& e) {
    throw Error(ErrorCode::Input, std::string("polytope invalid: ") + e.what());
  }
  require(b.radius > 1e-12, ErrorCode::Input, "empty interior");
  for (int i = 0; i < p.dim(); ++i) {
    for (double s : {1.0, -1.0}) {
      const auto r = solve_lp(unit_vec(p.dim(), i, s), p.halfspaces());
      require(r.status == LpStatus::Optimal, ErrorCode::Input, "polytope is unbounded");
    }
  }
  return b;
}

// K(delta): every halfspace translated inward by delta.
inline HPolytope erode(const HPolytope& p, double delta) {
  require(delta >= 0.0, ErrorCode::Precondition, "erosion distance must be nonnegative");
  std::vector<Halfspace> hs = p.halfspaces();
  for (auto& h : hs) h.offset -= delta;
  HPolytope out(p.dim(), std::move(hs));
  if (delta > 0.0) {
    Ball b;
    try {
      b = chebyshev_ball(out);
    } catch (const Error&) {
      throw Error(ErrorCode::ErosionTooLarge, "eroded body is empty");
    }
    require(b.radius > 0.0, ErrorCode::ErosionTooLarge, "eroded body is empty");
  }
  return out;
}

inline HPolytope translate(const HPolytope& p, const Vec& shift) {
  std::vector<Halfspace> hs = p.halfspaces();
  for (auto& h : hs) h.offset += h.normal.dot(shift);
  return HPolytope(p.dim(), std::move(hs));
}

// Image of p under y -> A y + b (A invertible).
inline HPolytope affine_image(const HPolytope& p, const Mat& a, const Vec& b) {
  const Mat ainv = a.inverse();
  std::vector<Halfspace> hs;
  hs.reserve(p.size());
  for (const auto& h : p.halfspaces()) {
    // n . x <= c with x = Ainv (y - b)  =>  (Ainv^T n) . y <= c + (Ainv^T n) . b
    const Vec n = ainv.transpose() * h.normal;
    hs.push_back(Halfspace::make(n, h.offset + n.dot(b)));
  }
  return HPolytope(p.dim(), std::move(hs));
}

// Brute-force vertex enumeration over d-subsets, for small d and n.
namespace detail {

inline void dedupe_points(std::vector<Vec>& pts) {
  std::vector<Vec> out;
  for (const auto& v : pts) {
    bool dup = false;
    for (const auto& w : out)
      if ((w - v).lpNorm<Eigen::Infinity>() < 1e-9 * (1.0 + v.lpNorm<Eigen::Infinity>())) {
        dup = true;
        break;
      }
    if (!dup) out.push_back(v);
  }
  pts = std::move(out);
}

// Every feasible intersection of d hyperplanes.
inline std::vector<Vec> vertices_brute(const std::vector<Halfspace>& hs, int d, double tol) {
  std::vector<Vec> verts;
  const int n = static_cast<int>(hs.size());
  if (n < d) return verts;
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  Mat m(d, d);
  Vec rhs(d);
  while (true) {
    for (int i = 0; i < d; ++i) {
      m.row(i) = hs[idx[i]].normal.transpose();
      rhs[i] = hs[idx[i]].offset;
    }
    Eigen::FullPivLU<Mat> lu(m);
    if (lu.rank() == d && std::abs(lu.determinant()) > 1e-12) {
      const Vec v = lu.solve(rhs);
      bool ok = v.allFinite();
      for (int j = 0; ok && j < n; ++j)
        if (hs[j].normal.dot(v) > hs[j].offset + tol) ok = false;
      if (ok) verts.push_back(v);
    }
    int k = d - 1;
    while (k >= 0 && idx[k] == n - d + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int i = k + 1; i < d; ++i) idx[i] = idx[i - 1] + 1;
  }
  dedupe_points(verts);
  return verts;
}

// Convex polygon clipped by a . x <= b (Sutherland-Hodgman). Points cut by
// the line are appended to cut when given.
inline std::vector<Vec> clip_polygon(const std::vector<Vec>& poly, const Halfspace& h, double tol,
                                     std::vector<Vec>* cut) {
  std::vector<Vec> out;
  const std::size_t n = poly.size();
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = h.normal.dot(poly[i]) - h.offset;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    if (s[i] <= tol) out.push_back(poly[i]);
    if (cut && std::abs(s[i]) <= tol) cut->push_back(poly[i]);
    if ((s[i] < -tol && s[j] > tol) || (s[i] > tol && s[j] < -tol)) {
      const double t = s[i] / (s[i] - s[j]);
      Vec v = poly[i] + t * (poly[j] - poly[i]);
      out.push_back(v);
      if (cut) cut->push_back(std::move(v));
    }
  }
  if (out.size() < 3) out.clear();
  return out;
}

// Points of a planar convex set ordered by angle about their centroid.
inline std::vector<Vec> order_face(std::vector<Vec> pts, const Vec& normal) {
  dedupe_points(pts);
  if (pts.size() < 3) return {};
  Vec c = Vec::Zero(pts[0].size());
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  const Eigen::Vector3d n(normal[0], normal[1], normal[2]);
  Eigen::Vector3d e1 = std::abs(n[0]) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  e1 = (e1 - e1.dot(n) * n).normalized();
  const Eigen::Vector3d e2 = n.cross(e1);
  std::vector<std::pair<double, int>> ang;
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    const Eigen::Vector3d w(pts[i][0] - c[0], pts[i][1] - c[1], pts[i][2] - c[2]);
    ang.push_back({std::atan2(w.dot(e2), w.dot(e1)), i});
  }
  std::sort(ang.begin(), ang.end());
  std::vector<Vec> out;
  for (const auto& a : ang) out.push_back(pts[a.second]);
  return out;
}

// Vertices of the box [lo, hi] cut by every halfspace, for d <= 3.
inline std::vector<Vec> vertices_clip(const std::vector<Halfspace>& hs, int d, double tol,
                                      const Vec& lo, const Vec& hi) {
  std::vector<Vec> verts;
  if (d == 1) {
    double a = lo[0], b = hi[0];
    for (const auto& h : hs) {
      if (h.normal[0] > 0.0) b = std::min(b, h.offset / h.normal[0]);
      else if (h.normal[0] < 0.0) a = std::max(a, h.offset / h.normal[0]);
      else if (h.offset < -tol) return verts;
    }
    if (a > b + tol) return verts;
    verts.push_back(make_vec({a}));
    if (b > a) verts.push_back(make_vec({b}));
    return verts;
  }
  if (d == 2) {
    std::vector<Vec> poly = {make_vec({lo[0], lo[1]}), make_vec({hi[0], lo[1]}),
                             make_vec({hi[0], hi[1]}), make_vec({lo[0], hi[1]})};
    for (const auto& h : hs) {
      poly = clip_polygon(poly, h, tol, nullptr);
      if (poly.empty()) return verts;
    }
    dedupe_points(poly);
    return poly;
  }
  std::vector<std::vector<Vec>> faces;
  auto corner = [&](int m) { return make_vec({m & 1 ? hi[0] : lo[0], m & 2 ? hi[1] : lo[1], m & 4 ? hi[2] : lo[2]}); };
  const int quads[6][4] = {{0, 2, 6, 4}, {1, 5, 7, 3}, {0, 4, 5, 1}, {2, 3, 7, 6}, {0, 1, 3, 2}, {4, 6, 7, 5}};
  for (const auto& q : quads) faces.push_back({corner(q[0]), corner(q[1]), corner(q[2]), corner(q[3])});
  for (const auto& h : hs) {
    std::vector<std::vector<Vec>> next;
    std::vector<Vec> cut;
    for (const auto& f : faces) {
      auto g = clip_polygon(f, h, tol, &cut);
      if (!g.empty()) next.push_back(std::move(g));
    }
    auto cap = order_face(std::move(cut), h.normal);
    if (!cap.empty()) next.push_back(std::move(cap));
    faces = std::move(next);
    if (faces.empty()) return verts;
  }
  for (const auto& f : faces) verts.insert(verts.end(), f.begin(), f.end());
  dedupe_points(verts);
  return verts;
}

}  // namespace detail

// Vertices of a bounded polytope known to lie in [lo, hi].
inline std::vector<Vec> enumerate_vertices(const std::vector<Halfspace>& hs, int d, double tol,
                                           const Vec& lo, const Vec& hi) {
  if (d > 3) return detail::vertices_brute(hs, d, tol);
  const Vec pad = (0.01 * (hi - lo)).array() + 1e-6;
  return detail::vertices_clip(hs, d, tol, lo - pad, hi + pad);
}

inline std::vector<Vec> enumerate_vertices(const std::vector<Halfspace>& hs, int d,
                                           double tol = 1e-10) {
  if (d > 3) return detail::vertices_brute(hs, d, tol);
  Vec lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    const auto up = solve_lp(unit_vec(d, i), hs);
    const auto dn = solve_lp(unit_vec(d, i, -1.0), hs);
    if (up.status == LpStatus::Infeasible) return {};
    if (up.status != LpStatus::Optimal || dn.status != LpStatus::Optimal)
      return detail::vertices_brute(hs, d, tol);
    hi[i] = up.value;
    lo[i] = -dn.value;
  }
  return enumerate_vertices(hs, d, tol, lo, hi);
}

inline std::vector<Vec> enumerate_vertices(const HPolytope& p, double tol = 1e-10) {
  return enumerate_vertices(p.halfspaces(), p.dim(), tol);
}

}  // namespace apm
