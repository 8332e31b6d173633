#pragma once

#include "apm/canonical.hpp"
#include "apm/detail/spatial.hpp"
#include "apm/macbeath.hpp"
#include "apm/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace apm {

struct DagParams {
  int dim = 0;
  double gamma = 0.0;
  double delta0 = 0.0;
  double lambda0 = 0.0;
  double eps = 0.0;
  int ell = 0;
  bool strict_constants = false;

  double delta(int level) const { return std::ldexp(delta0, -level); }
  double target() const { return gamma * gamma * eps / (8.0 * (3 * dim + 1)); }

  static DagParams make(double gamma, int d, double eps, bool strict) {
    require(eps > 0.0 && eps <= 1.0, ErrorCode::Input, "eps must lie in (0, 1]");
    require(gamma > 0.0 && gamma <= 1.0, ErrorCode::Input, "gamma must lie in (0, 1]");
    DagParams p;
    p.dim = d;
    p.gamma = gamma;
    p.eps = eps;
    p.strict_constants = strict;
    p.lambda0 = default_lambda0(d);
    p.delta0 = strict ? strict_delta0(gamma, d) : practical_delta0(gamma);
    const double t = p.target();
    int ell = std::max(0, static_cast<int>(std::ceil(std::log2(p.delta0 / t))));
    while (ell > 0 && p.delta(ell - 1) <= t) --ell;
    while (p.delta(ell) > t) ++ell;
    p.ell = ell;
    return p;
  }

  bool operator==(const DagParams&) const = default;
};

struct DagNode {
  Vec center;
  Ellipsoid ellipsoid;
  int level = 0;
  std::vector<int> children;    // indices into the next level, ascending
  std::vector<int> witnesses;   // facet indices of the body (leaves only)

  bool operator==(const DagNode&) const = default;
};

struct LevelStats {
  int nodes = 0;
  long candidates = 0;
  int repair_rounds = 0;
  int repair_inserted = 0;
  int repair_accepted = 0;   // uncovered rays whose point overlapped a kept region
  int sandwich_failures = 0;
  bool operator==(const LevelStats&) const = default;
};

struct BuildStats {
  std::vector<LevelStats> levels;
  int max_fanout = 0;
  long edges = 0;
  int witness_fallbacks = 0;
  bool sampled_sandwich = false;
  double seconds = 0.0;   // wall clock, not serialized

  long node_count() const {
    long n = 0;
    for (const auto& l : levels) n += l.nodes;
    return n;
  }
};

struct LayeredDag {
  DagParams params;
  std::vector<std::vector<DagNode>> levels;
  BuildStats stats;

  int dim() const { return params.dim; }
  const std::vector<DagNode>& leaves() const { return levels.back(); }
  long node_count() const {
    long n = 0;
    for (const auto& l : levels) n += static_cast<long>(l.size());
    return n;
  }
};

struct BuildConfig {
  std::uint64_t seed = 42;
  bool strict_constants = false;
  int min_stream = 1024;
  int repair_rays = 10000;
  int max_repair_rounds = 50;
  long cap_samples = 1000;
  int cap_random_dirs = 50;
  long max_nodes = 2000000;                                  // per level
  long node_budget = std::numeric_limits<long>::max();       // packed by one build, cached levels free
  double cone_slack = 1e-3;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  std::function<void(const std::string&)> log;
};

namespace detail {

inline void check_deadline(const BuildConfig& cfg) {
  if (cfg.deadline && std::chrono::steady_clock::now() > *cfg.deadline)
    throw Error(ErrorCode::Construction, "build exceeded its time budget");
}

}  // namespace detail

// Angular radius of the cone from O around the ellipsoid's enclosing ball.
struct Cone {
  Vec axis;
  double half_angle = 0.0;
};

inline Cone ellipsoid_cone(const Ellipsoid& e) {
  require(e.form(Vec::Zero(e.dim())) > 1.0, ErrorCode::Precondition, "origin lies inside the ellipsoid");
  const double c = e.center.norm();
  const double r = e.max_radius();
  return {e.center / c, r >= c ? M_PI / 2.0 : std::asin(r / c)};
}

inline bool cone_overlap(const Cone& a, const Cone& b, double slack = 1e-3) {
  const double ang = 2.0 * std::asin(std::min(1.0, 0.5 * (a.axis - b.axis).norm()));
  return ang <= a.half_angle + b.half_angle + slack;
}

inline bool cone_overlap(const Ellipsoid& e1, const Ellipsoid& e2, double slack = 1e-3) {
  return cone_overlap(ellipsoid_cone(e1), ellipsoid_cone(e2), slack);
}

namespace detail {

inline double chord(double angle) { return 2.0 * std::sin(std::min(angle, M_PI) / 2.0); }

// Exact angular interval [lo, hi] (radians, lo < hi, hi - lo < pi) of the
// directions from O that meet a planar ellipsoid not containing O.
inline std::pair<double, double> planar_interval(const Ellipsoid& e) {
  const Vec& c = e.center;
  const Vec ac = e.shape * c;
  const double k = c.dot(ac) - 1.0;
  const Mat b = ac * ac.transpose() - k * e.shape;
  Eigen::SelfAdjointEigenSolver<Mat> es(b);
  const double l1 = es.eigenvalues()[0], l2 = es.eigenvalues()[1];
  const Vec e1 = es.eigenvectors().col(0), e2 = es.eigenvectors().col(1);
  const double ratio = std::sqrt(std::max(0.0, -l1 / std::max(l2, 1e-300)));
  const double phi = std::atan2(c[1], c[0]);
  double ends[2];
  int m = 0;
  for (double s : {1.0, -1.0}) {
    Vec u = e1 + s * ratio * e2;
    if (u.dot(ac) < 0.0) u = -u;
    double a = std::atan2(u[1], u[0]) - phi;
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a < -M_PI) a += 2.0 * M_PI;
    ends[m++] = a;
  }
  return {phi + std::min(ends[0], ends[1]), phi + std::max(ends[0], ends[1])};
}

// Directions (as angles) in the middle of uncovered arcs.
inline std::vector<double> planar_gaps(const std::vector<Ellipsoid>& es) {
  std::vector<std::pair<double, double>> iv;
  iv.reserve(es.size());
  for (const auto& e : es) {
    auto [lo, hi] = planar_interval(e);
    const double shift = std::floor(lo / (2.0 * M_PI)) * 2.0 * M_PI;
    iv.push_back({lo - shift, hi - shift});
  }
  std::vector<double> gaps;
  if (iv.empty()) {
    gaps.push_back(0.0);
    return gaps;
  }
  std::sort(iv.begin(), iv.end());
  // unroll the circle: start at the first interval and sweep 2 pi
  double reach = iv[0].second;
  const double start = iv[0].first;
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& [lo, hi] : iv) {
      const double l = lo + pass * 2.0 * M_PI, h = hi + pass * 2.0 * M_PI;
      if (l > start + 2.0 * M_PI) break;
      if (l > reach + 1e-12) gaps.push_back(0.5 * (reach + l));
      reach = std::max(reach, h);
    }
  }
  if (reach < start + 2.0 * M_PI - 1e-12) gaps.push_back(0.5 * (reach + start + 2.0 * M_PI));
  return gaps;
}

inline Vec exit_point(const HPolytope& eroded, const Vec& u) {
  const Vec o = Vec::Zero(eroded.dim());
  return ray_exit(eroded, Ray{o, u}).t * u;
}

}  // namespace detail

struct PackedLevel {
  std::vector<Vec> centers;
  std::vector<Ellipsoid> ellipsoids;
  LevelStats stats;
  bool sampled = false;
};

// Greedy packing of disjoint M^{lambda0} regions centered on the boundary of
// K(delta), followed by coverage repair against rays from O.
inline PackedLevel pack_level(const HPolytope& k, double delta, double lambda0, std::uint64_t seed,
                              const BuildConfig& cfg = {}) {
  const int d = k.dim();
  const HPolytope eroded = erode(k, delta);
  require(eroded.min_slack(Vec::Zero(d)) > 0.0, ErrorCode::Precondition, "origin is not inside the eroded body");
  PackedLevel out;
  std::vector<SlabRegion> regions;
  std::unique_ptr<detail::BoxGrid> grid;
  std::vector<int> near;

  auto disjoint_from_all = [&](const SlabRegion& r) {
    if (!grid) return true;
    grid->query(r.box_lo(), r.box_hi(), near);
    for (int id : near)
      if (!slab_regions_disjoint(k, regions[id], r)) return false;
    return true;
  };
  auto keep = [&](SlabRegion r) {
    if (!grid) {
      const double cell = std::max(4.0 * r.box_half.maxCoeff(), 1e-9);
      grid = std::make_unique<detail::BoxGrid>(d, cell);
    }
    grid->insert(static_cast<int>(regions.size()), r.box_lo(), r.box_hi());
    out.centers.push_back(r.center);
    regions.push_back(std::move(r));
    require(static_cast<long>(regions.size()) <= cfg.max_nodes, ErrorCode::Construction,
            "level exceeds the node budget of " + std::to_string(cfg.max_nodes));
  };
  auto add_ellipsoid = [&](const SlabRegion& r) {
    const auto me = macbeath_ellipsoid(k, r, lambda0);
    if (!me.lower_certified || !me.upper_certified) ++out.stats.sandwich_failures;
    out.sampled = out.sampled || me.sampled;
    out.ellipsoids.push_back(me.ellipsoid);
  };

  DirectionStream stream(d, seed & 0xffff);
  long processed = 0;
  while (processed < std::max<long>(cfg.min_stream, 4 * static_cast<long>(regions.size()))) {
    const Vec x = detail::exit_point(eroded, stream.next());
    if (++processed % 256 == 0) detail::check_deadline(cfg);
    SlabRegion r = slab_region(k, x, lambda0);
    if (disjoint_from_all(r)) keep(std::move(r));
  }
  out.stats.candidates = processed;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (i % 256 == 0) detail::check_deadline(cfg);
    add_ellipsoid(regions[i]);
  }

  auto try_direction = [&](const Vec& u) {
    const Vec x = detail::exit_point(eroded, u);
    SlabRegion r = slab_region(k, x, lambda0);
    if (disjoint_from_all(r)) {
      keep(std::move(r));
      add_ellipsoid(regions.back());
      ++out.stats.repair_inserted;
      return true;
    }
    ++out.stats.repair_accepted;
    return false;
  };

  Vec uncovered;
  for (int round = 0;; ++round) {
    if (round >= cfg.max_repair_rounds) {
      std::string msg = "coverage repair did not converge after " + std::to_string(cfg.max_repair_rounds) + " rounds";
      if (uncovered.size() == d) {
        msg += "; uncovered direction (";
        for (int i = 0; i < d; ++i) msg += (i ? "," : "") + std::to_string(uncovered[i]);
        msg += ")";
      }
      throw Error(ErrorCode::Construction, msg);
    }
    out.stats.repair_rounds = round + 1;
    int inserted = 0;
    if (d == 2) {
      for (double a : detail::planar_gaps(out.ellipsoids)) {
        Vec u(2);
        u << std::cos(a), std::sin(a);
        uncovered = u;
        if (try_direction(u)) ++inserted;
      }
    }
    std::vector<Vec> axes;
    std::vector<double> alpha;
    double amax = 0.0;
    for (const auto& e : out.ellipsoids) {
      const Cone c = ellipsoid_cone(e);
      axes.push_back(c.axis);
      alpha.push_back(c.half_angle);
      amax = std::max(amax, c.half_angle);
    }
    const std::size_t indexed = axes.size();
    detail::KdTree tree(axes);
    Rng rng(mix_seed(seed, 7000 + round));
    std::vector<int> cand;
    for (int s = 0; s < cfg.repair_rays; ++s) {
      if (s % 256 == 0) detail::check_deadline(cfg);
      const Vec u = rng.unit(d);
      const Ray ray{Vec::Zero(d), u};
      bool hit = false;
      tree.radius(u, detail::chord(amax), cand);
      for (int id : cand)
        if (ellipsoid_ray_intersect(out.ellipsoids[id], ray)) {
          hit = true;
          break;
        }
      for (std::size_t id = indexed; !hit && id < out.ellipsoids.size(); ++id)
        hit = ellipsoid_ray_intersect(out.ellipsoids[id], ray);
      if (!hit) {
        uncovered = u;
        if (try_direction(u)) ++inserted;
      }
    }
    if (inserted == 0) break;
  }
  out.stats.nodes = static_cast<int>(out.centers.size());
  return out;
}

struct WitnessSet {
  std::vector<int> facets;
  bool fallback = false;
};

// At most d facets of K whose normals positively span the direction of an
// approximate minimal cap at x; their intersection contains K. Falls back to
// the facet where the ray O -> x leaves K.
inline WitnessSet leaf_witnesses(const HPolytope& k, const Vec& x, const CapOptions& opt) {
  const int d = k.dim();
  WitnessSet w;
  const Cap cap = min_cap_search(k, x, opt);
  const auto lp = support_lp(k, cap.direction);
  Vec comb = Vec::Zero(d);
  for (std::size_t i = 0; i < lp.active.size(); ++i) comb += lp.weights[i] * k[lp.active[i]].normal;
  if (!lp.active.empty() && static_cast<int>(lp.active.size()) <= d && (comb - cap.direction).norm() <= 1e-8) {
    w.facets = lp.active;
    return w;
  }
  w.fallback = true;
  w.facets = {ray_exit(k, Ray::make(Vec::Zero(d), x)).facet};
  return w;
}

inline WitnessSet leaf_witnesses(const CanonicalBody& k, const DagNode& leaf, const CapOptions& opt = {}) {
  return leaf_witnesses(k.body, leaf.center, opt);
}

// Levels depend only on (body, delta_i, lambda0, seed), so builds for several
// eps over the same body can share them.
struct LevelCache {
  std::map<int, PackedLevel> levels;
  double delta0 = -1.0;
};

inline LayeredDag build_dag(const CanonicalBody& k, double eps, const BuildConfig& cfg = {},
                            LevelCache* cache = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  const int d = k.dim();
  LayeredDag dag;
  dag.params = DagParams::make(k.gamma, d, eps, cfg.strict_constants);
  const auto& p = dag.params;
  require(p.delta0 < k.gamma / 2.0, ErrorCode::Internal, "Delta0 must be below gamma/2");
  if (cfg.log)
    cfg.log("gamma=" + std::to_string(p.gamma) + " Delta0=" + std::to_string(p.delta0) +
            " ell=" + std::to_string(p.ell));
  if (cache && cache->delta0 != p.delta0) {
    cache->levels.clear();
    cache->delta0 = p.delta0;
  }
  dag.levels.resize(p.ell + 1);
  dag.stats.levels.resize(p.ell + 1);
  std::vector<std::vector<Cone>> cones(p.ell + 1);
  long budget = cfg.node_budget;
  for (int i = 0; i <= p.ell; ++i) {
    PackedLevel fresh;
    const PackedLevel* lev = nullptr;
    if (cache && cache->levels.count(i)) {
      lev = &cache->levels[i];
    } else {
      require(budget > 0, ErrorCode::Construction, "build exhausted its node budget before level " + std::to_string(i));
      BuildConfig lc = cfg;
      lc.max_nodes = std::min(cfg.max_nodes, budget);
      fresh = pack_level(k.body, p.delta(i), p.lambda0, mix_seed(cfg.seed, i), lc);
      budget -= static_cast<long>(fresh.centers.size());
      if (cache) {
        cache->levels[i] = std::move(fresh);
        lev = &cache->levels[i];
      } else {
        lev = &fresh;
      }
    }
    dag.stats.levels[i] = lev->stats;
    dag.stats.sampled_sandwich = dag.stats.sampled_sandwich || lev->sampled;
    auto& nodes = dag.levels[i];
    nodes.resize(lev->centers.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      nodes[j].center = lev->centers[j];
      nodes[j].ellipsoid = lev->ellipsoids[j];
      nodes[j].level = i;
      cones[i].push_back(ellipsoid_cone(nodes[j].ellipsoid));
    }
    if (cfg.log)
      cfg.log("level " + std::to_string(i) + ": " + std::to_string(nodes.size()) + " nodes, " +
              std::to_string(lev->stats.repair_inserted) + " repair insertions");
  }

  for (int i = 0; i < p.ell; ++i) {
    std::vector<Vec> axes;
    double amax = 0.0;
    for (const auto& c : cones[i + 1]) {
      axes.push_back(c.axis);
      amax = std::max(amax, c.half_angle);
    }
    detail::KdTree tree(axes);
    std::vector<int> cand;
    for (std::size_t j = 0; j < dag.levels[i].size(); ++j) {
      const Cone& cu = cones[i][j];
      tree.radius(cu.axis, detail::chord(cu.half_angle + amax + cfg.cone_slack), cand);
      auto& ch = dag.levels[i][j].children;
      for (int v : cand)
        if (cone_overlap(cu, cones[i + 1][v], cfg.cone_slack)) ch.push_back(v);
      require(!ch.empty(), ErrorCode::Construction, "node without children: coverage is broken");
      dag.stats.max_fanout = std::max(dag.stats.max_fanout, static_cast<int>(ch.size()));
      dag.stats.edges += static_cast<long>(ch.size());
    }
  }

  CapOptions copt;
  copt.samples = cfg.cap_samples;
  copt.random_dirs = cfg.cap_random_dirs;
  for (std::size_t j = 0; j < dag.levels[p.ell].size(); ++j) {
    if (j % 64 == 0) detail::check_deadline(cfg);
    auto& leaf = dag.levels[p.ell][j];
    copt.seed = mix_seed(cfg.seed, 50000 + j);
    const WitnessSet w = leaf_witnesses(k.body, leaf.center, copt);
    leaf.witnesses = w.facets;
    if (w.fallback) ++dag.stats.witness_fallbacks;
  }
  dag.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return dag;
}

}  // namespace apm
