#pragma once

// Macbeath regions M^lambda(x) = x + lambda((K - x) cap (x - K)). For an
// H-polytope with unit normals a_j and slacks s_j = b_j - a_j.x this is the
// intersection of the slabs |a_j.(y - x)| <= lambda s_j, so a region is kept
// as its center plus the slack vector, and the halfspace form is produced
// only when asked for.

#include "apm/canonical.hpp"
#include "apm/ellipsoid.hpp"
#include "apm/polytope.hpp"
#include "apm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace apm {

inline double default_lambda0(int d) { return 1.0 / (20.0 * std::sqrt(static_cast<double>(d))); }
inline double strict_delta0(double gamma, int d) { return 0.5 * std::pow(gamma * gamma / (4.0 * d), d); }
inline double practical_delta0(double gamma) { return std::min(gamma / 12.0, 0.05); }

inline double delta_of(const HPolytope& k, const Vec& x) { return k.min_slack(x); }

struct MacbeathRegion {
  Vec center;
  double lambda = 0.0;
  HPolytope region;
};

inline void require_interior(const HPolytope& k, const Vec& x) {
  check_dim(k, x);
  require(k.min_slack(x) > 0.0, ErrorCode::Precondition, "point is not interior to the body");
}

inline MacbeathRegion macbeath_region(const HPolytope& k, const Vec& x, double lambda) {
  require_interior(k, x);
  require(lambda > 0.0, ErrorCode::Precondition, "lambda must be positive");
  std::vector<Halfspace> hs;
  hs.reserve(2 * k.size());
  for (const auto& h : k.halfspaces()) {
    const double ax = h.normal.dot(x);
    const double w = lambda * (h.offset - ax);
    hs.push_back({h.normal, ax + w});
    hs.push_back({-h.normal, -ax + w});
  }
  return {x, lambda, HPolytope(k.dim(), std::move(hs))};
}

inline MacbeathRegion macbeath_region(const CanonicalBody& k, const Vec& x, double lambda) {
  return macbeath_region(k.body, x, lambda);
}

// Slab form of M^lambda(x) restricted to the slabs that actually bound it.
struct SlabRegion {
  Vec center;
  double lambda = 0.0;
  std::vector<int> facets;     // indices into the body
  std::vector<double> half;    // lambda * slack, same order
  Vec box_half;                // axis-aligned half extents around center

  Vec box_lo() const { return center - box_half; }
  Vec box_hi() const { return center + box_half; }
};

namespace detail {

inline void append_slab(std::vector<Halfspace>& hs, const Vec& a, double ax, double w) {
  hs.push_back({a, ax + w});
  hs.push_back({-a, -ax + w});
}

}  // namespace detail

// All slabs, then prune parallel duplicates and slabs that contain the
// region's bounding box.
inline SlabRegion slab_region(const HPolytope& k, const Vec& x, double lambda) {
  const int d = k.dim();
  const int n = static_cast<int>(k.size());
  SlabRegion r;
  r.center = x;
  r.lambda = lambda;
  std::vector<double> s(n);
  for (int j = 0; j < n; ++j) s[j] = k[j].slack(x);
  // the bounding box of a centrally symmetric region: one LP per axis
  r.box_half = Vec(d);
  for (int i = 0; i < d; ++i) {
    const Vec e = unit_vec(d, i);
    LpOptions opt;
    opt.box = 1e3;
    auto res = detail::solve_lp_rows(
        e, 2 * n, [&](int j) -> Vec { return (j & 1) ? Vec(-k[j >> 1].normal) : k[j >> 1].normal; },
        [&](int j) { return lambda * s[j >> 1]; }, opt);
    require(res.status == LpStatus::Optimal, ErrorCode::Internal, "Macbeath region is unbounded");
    r.box_half[i] = std::max(res.value, 0.0);
  }
  for (int j = 0; j < n; ++j) {
    const Vec& a = k[j].normal;
    const double w = lambda * s[j];
    if (a.cwiseAbs().dot(r.box_half) <= w * (1.0 - 1e-12)) continue;
    bool dup = false;
    for (std::size_t q = 0; q < r.facets.size(); ++q) {
      const Vec& b = k[r.facets[q]].normal;
      if (std::abs(std::abs(a.dot(b)) - 1.0) < 1e-14) {
        if (w < r.half[q]) {
          r.facets[q] = j;
          r.half[q] = w;
        }
        dup = true;
        break;
      }
    }
    if (!dup) {
      r.facets.push_back(j);
      r.half.push_back(w);
    }
  }
  return r;
}

inline std::vector<Halfspace> slab_halfspaces(const HPolytope& k, const SlabRegion& r, double scale = 1.0) {
  std::vector<Halfspace> hs;
  hs.reserve(2 * r.facets.size());
  for (std::size_t q = 0; q < r.facets.size(); ++q) {
    const Vec& a = k[r.facets[q]].normal;
    detail::append_slab(hs, a, a.dot(r.center), scale * r.half[q]);
  }
  return hs;
}

// Exact disjointness of two slab regions of the same body.
inline bool slab_regions_disjoint(const HPolytope& k, const SlabRegion& u, const SlabRegion& v) {
  for (int i = 0; i < u.center.size(); ++i)
    if (std::abs(u.center[i] - v.center[i]) > u.box_half[i] + v.box_half[i]) return true;
  auto separated = [&](const SlabRegion& a, const SlabRegion& b) {
    for (std::size_t q = 0; q < a.facets.size(); ++q) {
      const Vec& nrm = k[a.facets[q]].normal;
      const double pa = nrm.dot(a.center);
      const double pb = nrm.dot(b.center);
      const double ext = nrm.cwiseAbs().dot(b.box_half);
      if (std::abs(pa - pb) > a.half[q] + ext) return true;
    }
    return false;
  };
  if (separated(u, v) || separated(v, u)) return true;
  std::vector<Halfspace> hs = slab_halfspaces(k, u);
  const auto hv = slab_halfspaces(k, v);
  hs.insert(hs.end(), hv.begin(), hv.end());
  LpOptions opt;
  opt.box = 1e3;
  const auto res = solve_lp(v.center - u.center, hs, opt);
  return res.status == LpStatus::Infeasible;
}

struct MacbeathEllipsoid {
  Ellipsoid ellipsoid;
  bool lower_certified = false;   // M^{4 lambda0}(x) inside E
  bool upper_certified = false;   // E inside M^{4 lambda0 sqrt d}(x)
  bool sampled = false;           // lower containment checked on a direction net only
  double upper_ratio = 0.0;       // max_j sqrt(a_j^T A^-1 a_j) / (4 lambda0 sqrt(d) s_j)
};

inline constexpr double kSandwichTol = 1e-7;

namespace detail {

inline std::vector<Vec> region_net(int d) {
  std::vector<Vec> dirs;
  for (int i = 0; i < d; ++i) {
    dirs.push_back(unit_vec(d, i));
    dirs.push_back(unit_vec(d, i, -1.0));
  }
  const int k = 8;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      for (int t = 0; t < 2 * k; ++t) {
        const double a = M_PI * (t + 0.5) / k;
        Vec v = Vec::Zero(d);
        v[i] = std::cos(a);
        v[j] = std::sin(a);
        dirs.push_back(v);
      }
  return dirs;
}

}  // namespace detail

// Centered minimum-volume ellipsoid of M^{4 lambda0}(x) from its vertices
// (d <= 3) or from support points on a direction net (d >= 4).
inline MacbeathEllipsoid macbeath_ellipsoid(const HPolytope& k, const SlabRegion& r, double lambda0) {
  const int d = k.dim();
  const double scale = 4.0 * lambda0 / r.lambda;
  std::vector<Vec> pts;
  MacbeathEllipsoid out;
  const auto hs = slab_halfspaces(k, r, scale);
  if (d <= 3) {
    const Vec half = r.box_half * scale;
    for (const auto& v : enumerate_vertices(hs, d, 1e-9 * (1.0 + half.norm()), r.center - half, r.center + half))
      pts.push_back(v - r.center);
  } else {
    out.sampled = true;
    for (const auto& u : detail::region_net(d)) {
      const auto res = solve_lp(u, hs);
      require(res.status == LpStatus::Optimal, ErrorCode::Internal, "region support LP failed");
      pts.push_back(res.optimum - r.center);
    }
  }
  require(static_cast<int>(pts.size()) >= d, ErrorCode::Numeric, "region has too few vertices");
  // Iterate on one point per antipodal pair with near-duplicates merged;
  // the final dilation runs over every point, so merging costs nothing in
  // correctness. Distances use the second-moment metric so thin regions
  // keep their short axes.
  Mat moment = Mat::Zero(d, d);
  for (const auto& p : pts) moment.noalias() += p * p.transpose();
  const Eigen::LDLT<Mat> mom(moment / static_cast<double>(pts.size()));
  require(mom.info() == Eigen::Success && mom.isPositive(), ErrorCode::Numeric, "region is flat");
  auto metric = [&](const Vec& v) { return v.dot(mom.solve(v)); };
  double size = 0.0;
  for (const auto& p : pts) size = std::max(size, metric(p));
  const double merge2 = 1e-6 * size;
  std::vector<Vec> reps;
  for (const auto& p : pts) {
    bool dup = false;
    for (const auto& q : reps)
      if (metric(p - q) <= merge2 || metric(p + q) <= merge2) {
        dup = true;
        break;
      }
    if (!dup) reps.push_back(p);
  }
  const double mu = 4.0 * lambda0 * std::sqrt(static_cast<double>(d)) / r.lambda;
  auto upper_ratio = [&](const Mat& shape) {
    const Mat einv = shape.ldlt().solve(Mat::Identity(d, d));
    double ratio = 0.0;
    for (std::size_t q = 0; q < r.facets.size(); ++q) {
      const Vec& a = k[r.facets[q]].normal;
      ratio = std::max(ratio, std::sqrt(a.dot(einv * a)) / (mu * r.half[q]));
    }
    return ratio;
  };
  auto dilate = [&](Mat shape) {
    double grow = 0.0;
    for (const auto& p : pts) grow = std::max(grow, p.dot(shape * p));
    return Mat(shape / grow);
  };
  CenteredMvee m;
  Mat shape;
  double ratio = 0.0;
  int used = 0;
  for (double tol : {1e-3, 1e-5, 1e-7, 1e-9}) {
    m = mvee_centered(reps, tol, 10000 - used, m.weights.empty() ? nullptr : &m.weights);
    used += m.iterations + 1;
    require(m.converged, ErrorCode::Numeric, "MVEE did not converge in 10^4 steps");
    shape = dilate(m.shape);
    ratio = upper_ratio(shape);
    if (ratio <= 1.0 + kSandwichTol) break;
  }
  if (ratio > 1.0 + kSandwichTol && reps.size() < pts.size()) {
    m = mvee_centered(pts, 1e-9, 10000);
    require(m.converged, ErrorCode::Numeric, "MVEE did not converge in 10^4 steps");
    shape = dilate(m.shape);
    ratio = upper_ratio(shape);
  }
  out.ellipsoid = {r.center, shape};
  double lower = 0.0;
  for (const auto& p : pts) lower = std::max(lower, p.dot(shape * p));
  out.lower_certified = lower <= 1.0 + kSandwichTol;
  out.upper_ratio = ratio;
  out.upper_certified = ratio <= 1.0 + kSandwichTol;
  return out;
}

inline MacbeathEllipsoid macbeath_ellipsoid(const CanonicalBody& k, const Vec& x, double lambda0 = 0.0) {
  require_interior(k.body, x);
  if (lambda0 <= 0.0) lambda0 = default_lambda0(k.dim());
  return macbeath_ellipsoid(k.body, slab_region(k.body, x, lambda0), lambda0);
}

// The cap K cap {direction . y >= base}.
struct Cap {
  const HPolytope* body = nullptr;
  Vec direction;        // unit outward direction
  double base = 0.0;    // direction . y at the cut
  double width = 0.0;   // support(direction) - base
  Vec apex;             // maximizer of direction . y over the body
  double volume = 0.0;  // Monte-Carlo estimate when computed
  double volume_se = 0.0;

  Halfspace cut() const { return {-direction, -base}; }
  HPolytope polytope() const {
    std::vector<Halfspace> hs = body->halfspaces();
    hs.push_back(cut());
    return HPolytope(body->dim(), std::move(hs));
  }
};

struct CapOptions {
  long samples = 10000;
  int random_dirs = 50;
  std::uint64_t seed = 42;
};

namespace detail {

struct McVolume {
  double estimate = 0.0;
  double std_error = 0.0;
};

inline McVolume cap_mc_volume(const HPolytope& k, const Vec& v, double base, long samples, std::uint64_t seed) {
  const int d = k.dim();
  std::vector<Halfspace> hs = k.halfspaces();
  hs.push_back({-v, -base});
  Vec lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    const auto up = solve_lp(unit_vec(d, i), hs);
    const auto dn = solve_lp(unit_vec(d, i, -1.0), hs);
    if (up.status != LpStatus::Optimal || dn.status != LpStatus::Optimal) return {};
    hi[i] = up.value;
    lo[i] = -dn.value;
  }
  double boxvol = 1.0;
  for (int i = 0; i < d; ++i) boxvol *= std::max(0.0, hi[i] - lo[i]);
  Rng rng(seed);
  long hits = 0;
  Vec y(d);
  for (long s = 0; s < samples; ++s) {
    for (int i = 0; i < d; ++i) y[i] = lo[i] + (hi[i] - lo[i]) * rng.uniform();
    if (v.dot(y) >= base && contains(k, y, 0.0)) ++hits;
  }
  const double f = static_cast<double>(hits) / samples;
  return {boxvol * f, boxvol * std::sqrt(f * (1.0 - f) / samples)};
}

}  // namespace detail

inline Cap make_cap(const HPolytope& k, const Vec& direction, double base) {
  Cap c;
  c.body = &k;
  c.direction = direction / direction.norm();
  const auto r = support_lp(k, c.direction);
  c.apex = r.optimum;
  c.base = base;
  c.width = std::max(0.0, r.value - base);
  return c;
}

// Least-volume cap through x over a candidate direction set, without the
// depth check.
inline Cap min_cap_search(const HPolytope& k, const Vec& x, const CapOptions& opt = {}) {
  const int d = k.dim();
  const int n = static_cast<int>(k.size());
  std::vector<Vec> cands;
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const int nf = std::min(n, 3 * d);
  std::partial_sort(idx.begin(), idx.begin() + nf, idx.end(), [&](int a, int b) {
    const double sa = k[a].slack(x), sb = k[b].slack(x);
    return sa < sb || (sa == sb && a < b);
  });
  for (int i = 0; i < nf; ++i) cands.push_back(k[idx[i]].normal);
  Rng rng(opt.seed);
  for (int i = 0; i < opt.random_dirs; ++i) cands.push_back(rng.unit(d));
  if (x.norm() > 0.0) cands.push_back(x / x.norm());

  std::vector<double> width(cands.size());
  double wmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cands.size(); ++i) {
    width[i] = support(k, cands[i]) - cands[i].dot(x);
    wmin = std::min(wmin, width[i]);
  }
  Cap best;
  bool have = false;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (width[i] > 4.0 * wmin) continue;
    Cap c = make_cap(k, cands[i], cands[i].dot(x));
    if (opt.samples > 0) {
      const auto v = detail::cap_mc_volume(k, c.direction, c.base, opt.samples, mix_seed(opt.seed, 1000 + i));
      c.volume = v.estimate;
      c.volume_se = v.std_error;
    } else {
      c.volume = c.width;
    }
    if (!have || c.volume < best.volume) {
      best = c;
      have = true;
    }
  }
  return best;
}

inline Cap approx_min_cap(const HPolytope& k, const Vec& x, double delta0, const CapOptions& opt = {}) {
  require_interior(k, x);
  require(k.min_slack(x) <= delta0, ErrorCode::OutOfRegime, "point is deeper than Delta0");
  return min_cap_search(k, x, opt);
}

inline Cap approx_min_cap(const CanonicalBody& k, const Vec& x, const CapOptions& opt = {}) {
  return approx_min_cap(k.body, x, practical_delta0(k.gamma), opt);
}

inline Cap cap_expand(const Cap& c, double rho) {
  require(rho >= 0.0, ErrorCode::Precondition, "expansion factor must be nonnegative");
  Cap out = c;
  const double top = c.base + c.width;
  const double kwidth = top + support(*c.body, -c.direction);
  if (rho * c.width >= kwidth) {
    out.width = kwidth;
    out.base = top - kwidth;
  } else {
    out.width = rho * c.width;
    out.base = top - out.width;
  }
  out.volume = 0.0;
  out.volume_se = 0.0;
  return out;
}

inline detail::McVolume cap_volume(const Cap& c, long samples, std::uint64_t seed) {
  return detail::cap_mc_volume(*c.body, c.direction, c.base, samples, seed);
}

struct DistanceProfile {
  double delta = 0.0;
  double ray_dist = 0.0;
  double width = 0.0;
  double cap_volume_estimate = 0.0;
  double cap_volume_se = 0.0;
  Vec cap_direction;
};

inline DistanceProfile distance_profile(const HPolytope& k, const Vec& x, const CapOptions& opt = {}) {
  require_interior(k, x);
  require(x.norm() > 0.0, ErrorCode::Precondition, "ray distance is undefined at the origin");
  DistanceProfile p;
  p.delta = k.min_slack(x);
  p.ray_dist = ray_exit(k, Ray::make(x, x)).t;
  const Cap c = min_cap_search(k, x, opt);
  p.width = c.width;
  p.cap_direction = c.direction;
  if (opt.samples > 0) {
    p.cap_volume_estimate = c.volume;
    p.cap_volume_se = c.volume_se;
  }
  return p;
}

inline DistanceProfile distance_profile(const CanonicalBody& k, const Vec& x, const CapOptions& opt = {}) {
  return distance_profile(k.body, x, opt);
}

}  // namespace apm
