#pragma once

// Test bodies for benchmarks and examples.

#include "apm/polytope.hpp"
#include "apm/rng.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace apm::bodies {

inline HPolytope cube(int d, double half = 0.5) {
  std::vector<Halfspace> hs;
  for (int i = 0; i < d; ++i) {
    hs.push_back({unit_vec(d, i), half});
    hs.push_back({unit_vec(d, i, -1.0), half});
  }
  return HPolytope(d, std::move(hs));
}

// k halfspaces tangent to the sphere of radius r about O. In the plane the
// normals are equally spaced; in higher dimension they follow a Fibonacci
// (d = 3) or low-discrepancy (d >= 4) spread, plus the 2d axis normals.
inline HPolytope ball_like(int d, int k, double r = 0.5) {
  std::vector<Halfspace> hs;
  if (d == 2) {
    for (int j = 0; j < k; ++j) {
      const double a = 2.0 * M_PI * j / k;
      hs.push_back({make_vec({std::cos(a), std::sin(a)}), r});
    }
  } else if (d == 3) {
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int j = 0; j < k; ++j) {
      const double z = 1.0 - (2.0 * j + 1.0) / k;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double a = golden * j;
      hs.push_back({make_vec({rho * std::cos(a), rho * std::sin(a), z}), r});
    }
  } else {
    for (int i = 0; i < d; ++i) {
      hs.push_back({unit_vec(d, i), r});
      hs.push_back({unit_vec(d, i, -1.0), r});
    }
    DirectionStream s(d);
    while (static_cast<int>(hs.size()) < k) hs.push_back({s.next(), r});
  }
  return HPolytope(d, std::move(hs));
}

// n random tangent halfspaces of B(O, 1/2) pushed out by up to 30%, plus
// the cube facets so the body is bounded.
inline HPolytope random_body(int d, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Halfspace> hs;
  for (int i = 0; i < d; ++i) {
    hs.push_back({unit_vec(d, i), 0.5});
    hs.push_back({unit_vec(d, i, -1.0), 0.5});
  }
  for (int j = 0; j < n; ++j) hs.push_back({rng.unit(d), 0.35 + 0.15 * rng.uniform()});
  return HPolytope(d, std::move(hs));
}

// An anisotropic, rotated and shifted image of a ball-like body.
inline HPolytope skewed(int d, int k) {
  const HPolytope b = ball_like(d, k);
  Mat a = Mat::Identity(d, d);
  for (int i = 0; i < d; ++i) a(i, i) = std::pow(10.0, static_cast<double>(i) / std::max(1, d - 1));
  Mat rot = Mat::Identity(d, d);
  const double t = 0.6;
  rot(0, 0) = std::cos(t);
  rot(0, 1) = -std::sin(t);
  rot(1, 0) = std::sin(t);
  rot(1, 1) = std::cos(t);
  Vec shift = Vec::Constant(d, 3.0);
  return affine_image(b, rot * a, shift);
}

inline HPolytope by_name(const std::string& name, int d) {
  if (name == "ball64") return ball_like(d, 64);
  if (name == "ball256") return ball_like(d, 256);
  if (name == "cube") return cube(d);
  if (name == "random") return random_body(d, 32, 7);
  if (name == "skewed") return skewed(d, 64);
  throw Error(ErrorCode::Input, "unknown body: " + name);
}

}  // namespace apm::bodies
