#pragma once

#include "apm/ellipsoid.hpp"
#include "apm/polytope.hpp"
#include "apm/rng.hpp"

#include <cmath>
#include <vector>

namespace apm {

// y = matrix * x + translation
struct AffineMap {
  Mat matrix;
  Vec translation;
  Mat inverse;

  static AffineMap identity(int d) { return make(Mat::Identity(d, d), Vec::Zero(d)); }
  static AffineMap make(const Mat& m, const Vec& t) {
    Eigen::FullPivLU<Mat> lu(m);
    require(lu.isInvertible(), ErrorCode::Degenerate, "affine map is singular");
    return {m, t, lu.inverse()};
  }

  int dim() const { return static_cast<int>(translation.size()); }
  Vec map_point(const Vec& x) const { return matrix * x + translation; }
  Vec unmap_point(const Vec& y) const { return inverse * (y - translation); }

  // this after first
  AffineMap compose(const AffineMap& first) const {
    return make(matrix * first.matrix, matrix * first.translation + translation);
  }
  bool operator==(const AffineMap& o) const {
    return matrix == o.matrix && translation == o.translation && inverse == o.inverse;
  }
};

inline Vec map_point(const AffineMap& m, const Vec& q) { return m.map_point(q); }
inline Vec unmap_point(const AffineMap& m, const Vec& q) { return m.unmap_point(q); }

inline HPolytope apply_map(const HPolytope& p, const AffineMap& m) {
  std::vector<Halfspace> hs;
  hs.reserve(p.size());
  for (const auto& h : p.halfspaces()) {
    const Vec n = m.inverse.transpose() * h.normal;
    hs.push_back(Halfspace::make(n, h.offset + n.dot(m.translation)));
  }
  return HPolytope(p.dim(), std::move(hs));
}

struct CanonicalBody {
  HPolytope body;
  double gamma = 0.0;   // certified: B(O, gamma/2) inside body inside B(O, 1/2)
  AffineMap map;        // original -> canonical
  // A point at distance > eps * diam(P) from P lands at distance
  // > eps / distance_bound from body.
  double distance_bound = 1.0;

  int dim() const { return body.dim(); }
  bool operator==(const CanonicalBody& o) const {
    return body == o.body && gamma == o.gamma && map == o.map && distance_bound == o.distance_bound;
  }
};

namespace detail {

// Unit directions whose spherical caps of angular radius `angle` cover the
// sphere: a grid on each face of the cube [-1,1]^d.
inline std::vector<Vec> cube_net(int d, int k, double& angle) {
  std::vector<Vec> dirs;
  std::vector<int> idx(d - 1, 0);
  for (int face = 0; face < d; ++face) {
    for (double sign : {1.0, -1.0}) {
      std::fill(idx.begin(), idx.end(), 0);
      for (;;) {
        Vec v(d);
        int c = 0;
        for (int i = 0; i < d; ++i) {
          if (i == face) {
            v[i] = sign;
          } else {
            v[i] = -1.0 + 2.0 * idx[c++] / k;
          }
        }
        dirs.push_back(v / v.norm());
        int j = 0;
        while (j < d - 1 && ++idx[j] > k) idx[j++] = 0;
        if (j == d - 1) break;
      }
    }
  }
  // a face point is within half a grid diagonal (sqrt(d-1)/k) of a grid node;
  // the chord bound on the unit sphere gives the angle.
  angle = std::asin(std::min(1.0, std::sqrt(d - 1.0) / k));
  return dirs;
}

inline double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace detail

// Certified upper bound on max |y| over P.
inline double circumradius_upper(const HPolytope& p) {
  const int d = p.dim();
  if (detail::binom(static_cast<int>(p.size()), d) * p.size() <= 2e7) {
    double r = 0.0;
    for (const auto& v : enumerate_vertices(p, 1e-9)) r = std::max(r, v.norm());
    return r * (1.0 + 1e-12);
  }
  if (d <= 4) {
    const int k = d == 2 ? 400 : (d == 3 ? 40 : 12);
    double angle = 0.0;
    const auto dirs = detail::cube_net(d, k, angle);
    double h = 0.0;
    for (const auto& u : dirs) h = std::max(h, support(p, u));
    return h / std::cos(angle);
  }
  const Box b = bounding_box(p);
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    const double m = std::max(std::abs(b.lo[i]), std::abs(b.hi[i]));
    s += m * m;
  }
  return std::sqrt(s);
}

namespace detail {

inline double diameter_lower(const HPolytope& p, int ndirs, std::uint64_t seed) {
  Rng rng(seed);
  double w = 0.0;
  const int d = p.dim();
  for (int i = 0; i < d + ndirs; ++i) {
    const Vec u = i < d ? unit_vec(d, i) : rng.unit(d);
    w = std::max(w, support(p, u) + support(p, -u));
  }
  return w;
}

inline double min_singular(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues().minCoeff();
}

// Finish a map whose image of p has its Chebyshev center somewhere: move that
// center to O and scale so the body sits in B(O, 1/2).
inline CanonicalBody finish(const HPolytope& original, const AffineMap& pre, const Vec& center,
                            double diam_lb) {
  const int d = original.dim();
  AffineMap shift = AffineMap::make(Mat::Identity(d, d), -center);
  AffineMap m = shift.compose(pre);
  HPolytope body = apply_map(original, m);
  const double rout = circumradius_upper(body);
  double rin = body.min_slack(Vec::Zero(d));
  require(rin > 0.0, ErrorCode::Internal, "canonical center is not interior");
  const double s = 0.5 / rout;
  AffineMap scale = AffineMap::make(Mat::Identity(d, d) * s, Vec::Zero(d));
  m = scale.compose(m);
  CanonicalBody out;
  out.body = apply_map(original, m);
  out.map = m;
  out.gamma = 2.0 * out.body.min_slack(Vec::Zero(d));
  out.distance_bound = 1.0 / (min_singular(m.matrix) * diam_lb);
  return out;
}

}  // namespace detail

// Affine rounding into gamma-canonical form. The rounding ellipsoid is the
// minimum-volume ellipsoid of support points in a spread of directions; the
// Chebyshev center of the rounded body becomes the origin.
inline CanonicalBody canonicalize(const HPolytope& p, std::uint64_t seed = 42) {
  validate_body(p);
  const int d = p.dim();
  const double diam_lb = detail::diameter_lower(p, 8 * d, mix_seed(seed, 1));
  AffineMap pre = AffineMap::identity(d);
  CanonicalBody best;
  for (int round = 0; round < 3; ++round) {
    HPolytope cur = apply_map(p, pre);
    Rng rng(mix_seed(seed, 10 + round));
    std::vector<Vec> pts;
    for (int i = 0; i < d; ++i)
      for (double s : {1.0, -1.0}) pts.push_back(support_lp(cur, unit_vec(d, i, s)).optimum);
    for (int i = 0; i < 20 * d; ++i) {
      const Vec u = rng.unit(d);
      pts.push_back(support_lp(cur, u).optimum);
      pts.push_back(support_lp(cur, -u).optimum);
    }
    auto e = mvee_general(pts, 1e-6).ellipsoid;
    Eigen::LLT<Mat> llt(e.shape);
    require(llt.info() == Eigen::Success, ErrorCode::Numeric, "rounding ellipsoid not positive definite");
    const Mat lt = llt.matrixL().transpose();
    AffineMap round_map = AffineMap::make(lt, -lt * e.center);
    pre = round_map.compose(pre);
    const Ball cb = chebyshev_ball(apply_map(p, pre));
    CanonicalBody c = detail::finish(p, pre, cb.center, diam_lb);
    if (round == 0 || c.gamma > best.gamma) best = c;
    if (best.gamma >= 1.0 / (2.0 * d)) break;
  }
  require(best.gamma >= 1.0 / (4.0 * d), ErrorCode::Construction, "rounding did not reach gamma >= 1/(4d)");
  return best;
}

// Translate `center` to O and scale into B(O, 1/2) without rotating.
inline CanonicalBody canonicalize_centered(const HPolytope& p, const Vec& center) {
  const int d = p.dim();
  require(p.min_slack(center) > 0.0, ErrorCode::Precondition, "center is not interior");
  const double diam_lb = detail::diameter_lower(p, 0, 0);
  return detail::finish(p, AffineMap::identity(d), center, diam_lb);
}

}  // namespace apm
