#include "property_suite.hpp"

#include <gtest/gtest.h>

using namespace apm;

namespace {

// The square [-1/2,1/2]^2 exactly, with an identity map.
CanonicalBody exact_square() {
  CanonicalBody k;
  k.body = bodies::cube(2);
  k.gamma = 1.0 / std::sqrt(2.0);
  k.map = AffineMap::identity(2);
  return k;
}

CanonicalBody exact_ball(int d) {
  CanonicalBody k;
  k.body = bodies::ball_like(d, 256);
  k.gamma = 2.0 * k.body.min_slack(Vec::Zero(d));
  k.map = AffineMap::identity(d);
  return k;
}

bool same_box(const HPolytope& p, double x0, double x1, double y0, double y1) {
  const Box b = bounding_box(p);
  return std::abs(b.lo[0] - x0) < 1e-12 && std::abs(b.hi[0] - x1) < 1e-12 && std::abs(b.lo[1] - y0) < 1e-12 &&
         std::abs(b.hi[1] - y1) < 1e-12;
}

}  // namespace

TEST(MacbeathRegion, SquareExamples) {
  const auto k = exact_square();
  const auto m0 = macbeath_region(k, Vec::Zero(2), 1.0);
  EXPECT_EQ(m0.region.size(), 8u);
  EXPECT_TRUE(oracle::contains_poly(m0.region, k.body).contained);
  EXPECT_TRUE(oracle::contains_poly(k.body, m0.region).contained);

  const auto m1 = macbeath_region(k, make_vec({0.25, 0}), 1.0);
  EXPECT_TRUE(same_box(m1.region, 0.0, 0.5, -0.5, 0.5));
  const auto m2 = macbeath_region(k, make_vec({0.25, 0}), 0.2);
  EXPECT_TRUE(same_box(m2.region, 0.2, 0.3, -0.1, 0.1));
  EXPECT_EQ(m0.region.size(), 2 * k.body.size());
}

TEST(MacbeathRegion, Errors) {
  const auto k = exact_square();
  try {
    macbeath_region(k, make_vec({0.5, 0}), 0.2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Precondition);
  }
  EXPECT_THROW(macbeath_region(k, Vec::Zero(2), 0.0), Error);
}

TEST(MacbeathRegion, SymmetricAndInsideBody) {
  const auto fx = props::default_fixtures();
  Rng rng(3);
  for (const auto& f : fx)
    for (int i = 0; i < 10; ++i) {
      const Vec x = props::anywhere(f.k, rng);
      const auto m = macbeath_region(f.k, x, rng.uniform(0.05, 1.0));
      EXPECT_TRUE(oracle::contains_poly(f.k.body, m.region).contained);
      EXPECT_GT(m.region.min_slack(x), 0.0);
      for (const auto& v : enumerate_vertices(m.region)) EXPECT_TRUE(contains(m.region, 2.0 * x - v, 1e-8));
    }
}

TEST(MacbeathRegion, Scaling) {
  const auto fx = props::default_fixtures();
  Rng rng(4);
  for (const auto& f : fx)
    for (int i = 0; i < 10; ++i) {
      const int d = f.k.dim();
      const Vec x = props::anywhere(f.k, rng);
      const double lambda = rng.uniform(0.05, 1.0), mu = rng.uniform(0.05, 1.0);
      const auto ml = macbeath_region(f.k, x, lambda).region, mm = macbeath_region(f.k, x, mu).region;
      for (int j = 0; j < 20; ++j) {
        const Vec u = rng.unit(d);
        EXPECT_NEAR(support(ml, u) - u.dot(x), lambda / mu * (support(mm, u) - u.dot(x)), 1e-12);
      }
    }
}

TEST(MacbeathEllipsoid, BallGivesBall) {
  for (int d = 2; d <= 3; ++d) {
    const auto k = exact_ball(d);
    const double l0 = default_lambda0(d);
    const auto e = macbeath_ellipsoid(k, Vec::Zero(d));
    EXPECT_TRUE(e.lower_certified);
    EXPECT_TRUE(e.upper_certified);
    EXPECT_EQ(e.ellipsoid.center, Vec::Zero(d));
    const double r = k.gamma / 2.0;
    EXPECT_GE(e.ellipsoid.min_radius(), 4.0 * l0 * r - 1e-9);
    EXPECT_LE(e.ellipsoid.max_radius(), 4.0 * l0 * std::sqrt(d) * 0.5 + 1e-9);
    EXPECT_LE(e.ellipsoid.max_radius() / e.ellipsoid.min_radius(), 1.01);
  }
}

TEST(MacbeathEllipsoid, SandwichOnSquare) {
  const auto k = exact_square();
  const Vec x = make_vec({0.25, 0});
  const double l0 = default_lambda0(2);
  const auto e = macbeath_ellipsoid(k, x);
  EXPECT_EQ(e.ellipsoid.center, x);
  const auto lower = macbeath_region(k, x, 4.0 * l0).region;
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const Vec u = rng.unit(2);
    EXPECT_GE(e.ellipsoid.support(u), support(lower, u) - 1e-12);
  }
  EXPECT_TRUE(oracle::contains_poly(macbeath_region(k, x, 4.0 * l0 * std::sqrt(2.0)).region, e.ellipsoid).contained);
}

TEST(MacbeathEllipsoid, CenterIsExact) {
  const auto fx = props::default_fixtures();
  Rng rng(6);
  for (const auto& f : fx)
    for (int i = 0; i < 5; ++i) {
      const Vec x = props::near_boundary(f.k, rng, 0.05);
      const auto e = macbeath_ellipsoid(f.k, x);
      EXPECT_EQ(e.ellipsoid.center, x);
      EXPECT_TRUE(e.lower_certified && e.upper_certified);
    }
}

TEST(MinCap, Examples) {
  const auto ball = exact_ball(2);
  // delta = 0.1 lies above the practical Delta0, so search without the depth gate
  const auto c = min_cap_search(ball.body, make_vec({0.4, 0}));
  EXPECT_GT(c.direction.dot(unit_vec(2, 0)), 0.99);
  EXPECT_NEAR(c.width, 0.1, 0.01);

  const auto sq = exact_square();
  const auto cs = approx_min_cap(sq, make_vec({0.49, 0}));
  EXPECT_NEAR(cs.direction.dot(unit_vec(2, 0)), 1.0, 1e-12);
  EXPECT_NEAR(cs.width, 0.01, 1e-12);
  EXPECT_GE(cs.width, delta_of(sq.body, make_vec({0.49, 0})) - 1e-12);

  try {
    approx_min_cap(sq, make_vec({0.1, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfRegime);
  }
}

TEST(CapExpand, Examples) {
  const auto sq = exact_square();
  const Cap c = make_cap(sq.body, unit_vec(2, 0), 0.4);
  EXPECT_NEAR(c.width, 0.1, 1e-12);
  const Cap same = cap_expand(c, 1.0);
  EXPECT_EQ(same.base, c.base);
  EXPECT_EQ(same.width, c.width);
  const Cap two = cap_expand(c, 2.0);
  EXPECT_NEAR(two.width, 0.2, 1e-12);
  EXPECT_NEAR(two.base, 0.3, 1e-12);
  const Cap all = cap_expand(c, 50.0);
  EXPECT_NEAR(all.width, 1.0, 1e-12);
  EXPECT_THROW(cap_expand(c, -1.0), Error);
}

TEST(DistanceProfile, Examples) {
  const auto ball = exact_ball(2);
  const double r0 = ball.gamma / 2.0;
  auto p = distance_profile(ball, make_vec({0.3, 0}));
  EXPECT_NEAR(p.delta, r0 - 0.3, 1e-12);
  EXPECT_NEAR(p.ray_dist, r0 - 0.3, 1e-12);
  EXPECT_GE(p.width, p.delta - 1e-9);

  const auto sq = exact_square();
  p = distance_profile(sq, make_vec({0.3, 0.3}));
  EXPECT_NEAR(p.delta, 0.2, 1e-12);
  EXPECT_NEAR(p.ray_dist, 0.2 * std::sqrt(2.0), 1e-12);
  EXPECT_THROW(distance_profile(sq, Vec::Zero(2)), Error);
}

TEST(Constants, Formulas) {
  EXPECT_DOUBLE_EQ(default_lambda0(4), 1.0 / 40.0);
  EXPECT_DOUBLE_EQ(strict_delta0(1.0, 2), 0.5 * std::pow(1.0 / 8.0, 2));
  EXPECT_DOUBLE_EQ(practical_delta0(0.9), 0.05);
  EXPECT_DOUBLE_EQ(practical_delta0(0.3), 0.025);
}

TEST(Properties, MacbeathSuite) {
  const auto fx = props::default_fixtures();
  for (const auto& r : props::macbeath_properties(fx)) {
    SCOPED_TRACE(r.name);
    EXPECT_EQ(r.instances, 100);
    EXPECT_EQ(r.failures, 0);
  }
}
