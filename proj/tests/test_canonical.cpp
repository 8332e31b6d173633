#include "apm/bodies.hpp"
#include "apm/canonical.hpp"
#include "apm/oracle.hpp"

#include <gtest/gtest.h>

using namespace apm;

namespace {

// Ball of radius gamma/2 inside, ball of radius 1/2 outside.
void expect_canonical(const CanonicalBody& k, std::uint64_t seed) {
  const int d = k.dim();
  for (const auto& h : k.body.halfspaces()) EXPECT_GE(h.offset, k.gamma / 2.0 - 1e-9);
  Rng rng(seed);
  for (int i = 0; i < 2 * d + 2 + 50; ++i) {
    const Vec u = i < 2 * d ? unit_vec(d, i / 2, i % 2 ? -1.0 : 1.0) : rng.unit(d);
    EXPECT_LE(support(k.body, u), 0.5 + 1e-9);
  }
  EXPECT_GE(k.gamma, 1.0 / (4.0 * d));
}

}  // namespace

TEST(AffineMap, IdentityAndRoundTrip) {
  const auto id = AffineMap::identity(3);
  const Vec q = make_vec({0.3, -2, 7});
  EXPECT_EQ(map_point(id, q), q);
  Rng rng(1);
  Mat a(3, 3);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a(r, c) = rng.normal();
  const auto m = AffineMap::make(a, rng.unit(3));
  EXPECT_LE((m.matrix * m.inverse - Mat::Identity(3, 3)).norm(), 1e-9);
  double err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec x = rng.in_ball(3, 5.0);
    err = std::max(err, (unmap_point(m, map_point(m, x)) - x).norm());
  }
  EXPECT_LT(err, 1e-9);
  EXPECT_THROW(AffineMap::make(Mat::Zero(3, 3), Vec::Zero(3)), Error);
}

TEST(Canonicalize, BallIsNearlyIdentity) {
  const auto k = canonicalize(bodies::ball_like(2, 64));
  EXPECT_GE(k.gamma, 0.9);
  EXPECT_LE((k.map.matrix - Mat::Identity(2, 2)).norm(), 0.05);
  EXPECT_LE(k.map.translation.norm(), 1e-6);
  expect_canonical(k, 2);
}

TEST(Canonicalize, TranslationInvariance) {
  const auto ball = bodies::ball_like(2, 64);
  const Vec shift = make_vec({100, 100});
  const auto moved = translate(ball, shift);
  const auto a = canonicalize(ball);
  const auto b = canonicalize(moved);
  EXPECT_NEAR(a.gamma, b.gamma, 1e-6);
  EXPECT_LE(map_point(b.map, shift).norm(), 1e-6);
  const Vec pre = b.map.inverse * b.map.translation;
  EXPECT_LE((pre + shift).norm(), 1e-5);
  expect_canonical(b, 3);
}

TEST(Canonicalize, AnisotropicBox) {
  HPolytope box(2, {{unit_vec(2, 0), 1.0}, {unit_vec(2, 0, -1), 1.0}, {unit_vec(2, 1), 100.0},
                    {unit_vec(2, 1, -1), 100.0}});
  const auto k = canonicalize(box);
  expect_canonical(k, 4);
  EXPECT_GT(std::abs(k.map.matrix(0, 0)), 10.0 * std::abs(k.map.matrix(1, 1)));
  EXPECT_EQ(apply_map(box, k.map), k.body);
}

TEST(Canonicalize, TestBodies) {
  for (int d = 2; d <= 4; ++d)
    for (const char* name : {"ball64", "cube", "random", "skewed"}) {
      const auto p = bodies::by_name(name, d);
      const auto k = canonicalize(p);
      SCOPED_TRACE(std::string(name) + " d=" + std::to_string(d));
      expect_canonical(k, 5);
    }
}

TEST(Canonicalize, RejectsBadInput) {
  HPolytope half(2, {Halfspace::make(make_vec({1, 0}), 1.0)});
  try {
    canonicalize(half);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Input);
  }
  HPolytope empty(1, {{make_vec({1}), -1.0}, {make_vec({-1}), -1.0}});
  try {
    canonicalize(empty);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Input);
  }
  HPolytope flat(2, {{unit_vec(2, 0), 0.0}, {unit_vec(2, 0, -1), 0.0}, {unit_vec(2, 1), 1.0},
                     {unit_vec(2, 1, -1), 1.0}});
  EXPECT_THROW(canonicalize(flat), Error);
}

TEST(Canonicalize, DistanceScaling) {
  for (const char* name : {"skewed", "random"}) {
    const auto p = bodies::by_name(name, 3);
    const auto k = canonicalize(p);
    double diam = 0.0;
    const auto verts = enumerate_vertices(p);
    for (const auto& a : verts)
      for (const auto& b : verts) diam = std::max(diam, (a - b).norm());
    const Vec c = chebyshev_ball(p).center;
    Rng rng(6);
    const double eps = 0.05;
    for (int i = 0; i < 300; ++i) {
      const Vec u = rng.unit(3);
      const double t = ray_exit(p, Ray::make(c, u)).t;
      const Vec q = c + (t + rng.uniform(0.0, 2.0) * diam) * u;
      const double dist = oracle::dist_to_polytope(p, q);
      if (dist <= eps * diam) continue;
      EXPECT_GT(oracle::dist_to_polytope(k.body, map_point(k.map, q)), eps / k.distance_bound);
    }
  }
}
