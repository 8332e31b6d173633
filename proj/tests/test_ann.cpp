#include "apm/ann.hpp"
#include "apm/oracle.hpp"

#include <gtest/gtest.h>

using namespace apm;

namespace {

Vec normal_vec(Rng& rng, int d) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.normal();
  return v;
}

// Uniform point of the frustum F by rejection.
Vec frustum_point(int d, Rng& rng) {
  const Frustum f{d + 1};
  Vec x(d + 1);
  for (;;) {
    for (int i = 0; i < d; ++i) x[i] = rng.uniform(-5.0 / 6.0, 5.0 / 6.0);
    x[d] = rng.uniform(-1.0, 1.0);
    if (f.contains(x)) return x;
  }
}

std::vector<Vec> uniform_points(int n, int d, Rng& rng) {
  std::vector<Vec> out;
  for (int i = 0; i < n; ++i) {
    Vec p(d);
    for (int j = 0; j < d; ++j) p[j] = rng.uniform();
    out.push_back(p);
  }
  return out;
}

std::vector<Vec> clustered_points(int n, int d, Rng& rng) {
  std::vector<Vec> centers = uniform_points(5, d, rng), out;
  for (int i = 0; i < n; ++i) {
    Vec p = centers[i % 5];
    for (int j = 0; j < d; ++j) p[j] += 0.02 * rng.normal();
    out.push_back(p);
  }
  return out;
}

int violations(const AnnIndex& idx, int queries, Rng& rng) {
  const int d = idx.dim();
  int bad = 0;
  for (int s = 0; s < queries; ++s) {
    Vec q(d);
    for (int j = 0; j < d; ++j) q[j] = rng.uniform(-0.1, 1.1);
    const double exact = oracle::exact_nn(idx.points, q).distance;
    if ((idx.points[nn_query(idx, q)] - q).norm() > (1.0 + idx.eps) * exact + 1e-12) ++bad;
  }
  return bad;
}

}  // namespace

TEST(Lift, Examples) {
  const auto h0 = lift(make_vec({0}));
  EXPECT_EQ(h0.value(make_vec({3})), 0.0);
  const Vec q = make_vec({1});
  const Vec qp(make_vec({1, h0.value(q)})), qu = lift_point(q);
  EXPECT_EQ((qu - qp).norm(), 1.0);
  const auto h = lift(make_vec({1, 2}));
  EXPECT_EQ(h.slope, make_vec({2, 4}));
  EXPECT_EQ(h.intercept, -5.0);
  const Vec pu = lift_point(make_vec({1, 2}));
  EXPECT_EQ(pu, make_vec({1, 2, 5}));
  EXPECT_EQ(h.value(pu.head(2)), pu[2]);
  EXPECT_EQ(h.upper().slack(pu), 0.0);
}

TEST(ProjectiveT, Examples) {
  for (int d = 1; d <= 4; ++d) {
    Rng rng(30 + d);
    for (int i = 0; i < 20; ++i) {
      Vec p = Vec::Zero(d + 1);
      p.head(d) = normal_vec(rng, d);
      EXPECT_LE((apply_T(p) - p).norm(), 1e-15);
    }
    // vertical direction, a point at infinity, goes to p0
    Vec up = Vec::Zero(d + 2);
    up[d + 1] = 1.0;
    EXPECT_LE((from_homogeneous(projective_matrix(d) * up) - sphere_p0(d)).norm(), 1e-15);
    Vec lo = Vec::Constant(d + 1, 0.5), hi = Vec::Constant(d + 1, 5.0 / 6.0);
    lo[d] = -1.0;
    hi[d] = 1.0;
    Vec lo_want = Vec::Constant(d + 1, 2.0 / 3.0), hi_want = lo_want;
    lo_want[d] = -2.0 / 3.0;
    hi_want[d] = 2.0 / 5.0;
    EXPECT_LE((apply_T(lo) - lo_want).norm(), 1e-15);
    EXPECT_LE((apply_T(hi) - hi_want).norm(), 1e-15);
  }
}

TEST(ProjectiveT, SphereAndRoundTrip) {
  Rng rng(32);
  for (int d = 1; d <= 4; ++d) {
    for (int i = 0; i < 100; ++i) {
      const Vec p = normal_vec(rng, d) * rng.uniform(0.0, 3.0);
      EXPECT_LE(std::abs(sphere_residual(apply_T(lift_point(p)))), 1e-9);
    }
    for (int i = 0; i < 1000; ++i) {
      Vec x = normal_vec(rng, d + 1);
      x[d] = rng.uniform(-3.9, 10.0);
      EXPECT_LE((apply_T_inv(apply_T(x)) - x).norm(), 1e-9 * (1.0 + x.norm()));
    }
  }
  Vec bad = Vec::Zero(3);
  bad[2] = -4.0;
  try {
    apply_T(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ProjectiveDegenerate);
  }
  bad[2] = 2.0;
  EXPECT_THROW(apply_T_inv(bad), Error);
}

TEST(ProjectiveT, Distortion) {
  Rng rng(33);
  for (int d = 1; d <= 3; ++d) {
    int pairs = 0, bad = 0;
    const Frustum f{d + 1};
    while (pairs < 10000) {
      const Vec p = apply_T(frustum_point(d, rng));
      const Vec q = p + rng.unit(d + 1) * rng.uniform(0.0, 0.25);
      if (!f.contains(apply_T_inv(q))) continue;
      ++pairs;
      if ((apply_T_inv(p) - apply_T_inv(q)).norm() > 8.0 * (d + 1) * (p - q).norm() + 1e-12) ++bad;
    }
    EXPECT_EQ(bad, 0) << d;
  }
}

TEST(CellPolytope, VerticalToCentral) {
  Rng rng(34);
  for (int d = 1; d <= 3; ++d) {
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<Vec> reps;
      const int n = 1 + trial % 8;
      for (int i = 0; i < n; ++i) reps.push_back(rng.in_ball(d, 0.5));
      std::vector<int> site;
      const HPolytope k = cell_polytope(reps, &site);
      const Vec q = rng.in_ball(d, 0.5);
      int want = 0;
      for (int i = 1; i < n; ++i)
        if (lift(reps[i]).value(q) > lift(reps[want]).value(q)) want = i;
      Vec dir(d + 1);
      dir.head(d) = q;
      dir[d] = -2.0;
      const int got = site[ray_exit(k, Ray{Vec::Zero(d + 1), dir}).facet];
      if (got < 0) continue;
      ++checked;
      EXPECT_EQ(got, want);
    }
    EXPECT_GT(checked, 150);
  }
}

TEST(CellPolytope, Roundness) {
  Rng rng(35);
  for (int d = 1; d <= 2; ++d)
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Vec> reps;
      for (int i = 0; i < 1 + trial; ++i) reps.push_back(rng.in_ball(d, 0.5));
      const HPolytope k = cell_polytope(reps);
      EXPECT_GE(k.min_slack(Vec::Zero(d + 1)), 2.0 / 3.0 - 1e-12);
      for (const auto& v : enumerate_vertices(k)) EXPECT_LT(v.norm(), 3.0 + d);
    }
  EXPECT_THROW(cell_polytope({}), Error);
}

TEST(CellStructure, OneAndTwoReps) {
  const auto one = build_cell_structure({make_vec({0.0})}, 0.1);
  for (int i = 0; i <= 20; ++i) EXPECT_EQ(cell_query(one, make_vec({-0.5 + 0.05 * i})), 0);
  const auto two = build_cell_structure({make_vec({-0.25}), make_vec({0.25})}, 0.1);
  for (int i = 0; i <= 40; ++i) {
    const double q = -0.5 + 0.025 * i;
    if (std::abs(q) <= 0.05) continue;
    EXPECT_EQ(cell_query(two, make_vec({q})), q > 0.0 ? 1 : 0) << q;
  }
  EXPECT_THROW(build_cell_structure({}, 0.1), Error);
}

TEST(AnnMRange, Examples) {
  EXPECT_EQ(ann_m_range(0.1, 2), std::make_pair(3, 4));
  EXPECT_EQ(ann_m_range(0.1, 3).first, 3);
  EXPECT_EQ(ann_m_range(0.1, 3).second, 13);
  Rng rng(36);
  const auto idx = build_ann(uniform_points(50, 2, rng), 0.1, 1);
  EXPECT_TRUE(idx.stats.m_clamped);
  EXPECT_EQ(idx.m, 3);
  EXPECT_EQ(idx.warnings.size(), 1u);
}

TEST(BuildAnn, SmallCases) {
  const auto one = build_ann({make_vec({0.3, 0.4})}, 0.1, 3);
  Rng rng(37);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(nn_query(one, normal_vec(rng, 2)), 0);
  const auto pts = uniform_points(200, 2, rng);
  const auto idx = build_ann(pts, 0.1, 3);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(pts[nn_query(idx, pts[i])], pts[i]);
  const auto dup = build_ann({make_vec({0, 0}), make_vec({1, 1}), make_vec({0, 0})}, 0.1, 3);
  EXPECT_EQ(nn_query(dup, make_vec({0, 0})), 0);
  const auto out = nn_query_detail(idx, make_vec({5, 5}));
  EXPECT_TRUE(out.fallback);
  EXPECT_EQ(out.distance, oracle::exact_nn(pts, make_vec({5, 5})).distance);
}

TEST(BuildAnn, Errors) {
  EXPECT_THROW(build_ann({}, 0.1, 3), Error);
  EXPECT_THROW(build_ann({make_vec({0, 0})}, 0.0, 3), Error);
  EXPECT_THROW(build_ann({make_vec({0, 0}), make_vec({0, 0, 0})}, 0.1, 3), Error);
  std::vector<Vec> tight{make_vec({1, 1})};
  for (int i = 0; i < 10; ++i) tight.push_back(make_vec({i * 1e-20, 0}));
  try {
    build_ann(tight, 0.1, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Degenerate);
  }
}

TEST(BuildAnn, ContractUniformAndClustered) {
  Rng rng(38);
  for (int d = 2; d <= 3; ++d) {
    const auto [mlo, mhi] = ann_m_range(0.1, d);
    for (const auto& pts : {uniform_points(1000, d, rng), clustered_points(1000, d, rng)})
      for (int m : {mlo, mhi}) {
        const auto idx = build_ann(pts, 0.1, m);
        EXPECT_EQ(violations(idx, 10000, rng), 0) << d << " " << m;
        const double c = static_cast<double>(idx.stats.total_reps) / (1000.0 * std::log(10.0));
        RecordProperty("rep_constant_d" + std::to_string(d) + "_m" + std::to_string(m), std::to_string(c));
      }
  }
}

TEST(BuildAnn, StructureRouteInOneDimension) {
  AnnConfig cfg;
  cfg.brute_threshold = 0;
  const std::vector<Vec> pts{make_vec({0.1}), make_vec({0.7})};
  const auto idx = build_ann(pts, 0.1, 3, cfg);
  ASSERT_GT(idx.stats.dag_cells, 0);
  Rng rng(39);
  int used = 0;
  for (int s = 0; s < 2000; ++s) {
    const Vec q = make_vec({rng.uniform(0.1, 0.7)});
    const auto a = nn_query_detail(idx, q);
    used += a.used_structure ? 1 : 0;
    EXPECT_LE(a.distance, 1.1 * oracle::exact_nn(pts, q).distance + 1e-12);
  }
  EXPECT_GT(used, 1000);
}
