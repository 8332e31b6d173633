#pragma once

// Brute-force references. Tests use these as ground truth, so nothing in
// here calls into the hierarchy, query or ann code.

#include "apm/ellipsoid.hpp"
#include "apm/polytope.hpp"
#include "apm/rng.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace apm::oracle {

struct Nearest {
  int index = -1;
  double distance = 0.0;
};

inline Nearest exact_nn(std::span<const Vec> pts, const Vec& q) {
  require(!pts.empty(), ErrorCode::Input, "empty point set");
  Nearest best{-1, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d2 = (pts[i] - q).squaredNorm();
    if (d2 < best.distance) best = {static_cast<int>(i), d2};
  }
  best.distance = std::sqrt(best.distance);
  return best;
}

// Closest point of P to q by a primal active-set method started from an
// interior point. Returns the projection; distance is |q - projection|.
inline Vec project_to_polytope(const HPolytope& p, const Vec& q, const Vec* interior = nullptr) {
  check_dim(p, q);
  if (contains(p, q, 0.0)) return q;
  const int d = p.dim();
  const int n = static_cast<int>(p.size());
  Vec y = interior ? *interior : chebyshev_ball(p).center;
  std::vector<int> work;
  for (int iter = 0; iter < 100000; ++iter) {
    const int k = static_cast<int>(work.size());
    Vec z = q;
    Vec mu(k);
    if (k > 0) {
      Eigen::MatrixXd a(k, d);
      Eigen::VectorXd rhs(k);
      for (int i = 0; i < k; ++i) {
        a.row(i) = p[work[i]].normal.transpose();
        rhs[i] = p[work[i]].normal.dot(q) - p[work[i]].offset;
      }
      const Eigen::MatrixXd g = a * a.transpose();
      const Eigen::VectorXd m = g.completeOrthogonalDecomposition().solve(rhs);
      for (int i = 0; i < k; ++i) mu[i] = m[i];
      z = q - Vec(a.transpose() * m);
    }
    const Vec step = z - y;
    if (step.norm() <= 1e-15 * (1.0 + y.norm())) {
      int drop = -1;
      double worst = -1e-14;
      for (int i = 0; i < k; ++i)
        if (mu[i] < worst) {
          worst = mu[i];
          drop = i;
        }
      if (drop < 0) return y;
      work.erase(work.begin() + drop);
      continue;
    }
    double alpha = 1.0;
    int block = -1;
    for (int j = 0; j < n; ++j) {
      if (std::find(work.begin(), work.end(), j) != work.end()) continue;
      const double den = p[j].normal.dot(step);
      if (den > 1e-15) {
        const double a = std::max(0.0, p[j].slack(y)) / den;
        if (a < alpha) {
          alpha = a;
          block = j;
        }
      }
    }
    y += alpha * step;
    if (block >= 0) {
      if (static_cast<int>(work.size()) == d) work.erase(work.begin());
      work.push_back(block);
    }
  }
  throw Error(ErrorCode::Numeric, "projection did not converge");
}

inline double dist_to_polytope(const HPolytope& p, const Vec& q, const Vec* interior = nullptr) {
  return (q - project_to_polytope(p, q, interior)).norm();
}

struct Containment {
  bool contained = false;
  bool sampled = false;  // decided from a finite direction sample, not exactly
};

inline constexpr double kInclusionTol = 1e-8;

// B inside A, both polytopes.
inline Containment contains_poly(const HPolytope& a, const HPolytope& b) {
  for (const auto& h : a.halfspaces())
    if (support(b, h.normal) > h.offset + kInclusionTol) return {false, false};
  return {true, false};
}

inline Containment contains_poly(const HPolytope& a, const Ellipsoid& b) {
  for (const auto& h : a.halfspaces())
    if (b.support(h.normal) > h.offset + kInclusionTol) return {false, false};
  return {true, false};
}

inline Containment contains_poly(const Ellipsoid& a, const HPolytope& b, std::uint64_t seed = 7) {
  if (b.dim() <= 3) {
    for (const auto& v : enumerate_vertices(b))
      if (a.form(v) > 1.0 + kInclusionTol) return {false, false};
    return {true, false};
  }
  Rng rng(seed);
  for (int i = 0; i < 1000; ++i) {
    const auto r = support_lp(b, rng.unit(b.dim()));
    if (a.form(r.optimum) > 1.0 + kInclusionTol) return {false, true};
  }
  return {true, true};
}

// max over B of the quadratic form of A, via the secular equation of the
// trust-region maximization max |M z + w|^2 over |z| <= 1.
inline Containment contains_poly(const Ellipsoid& a, const Ellipsoid& b) {
  const int d = a.dim();
  Eigen::SelfAdjointEigenSolver<Mat> ea(a.shape);
  const Mat ahalf = ea.operatorSqrt();
  Eigen::SelfAdjointEigenSolver<Mat> eb(b.shape);
  const Mat binvhalf = eb.operatorInverseSqrt();
  const Mat m = ahalf * binvhalf;
  const Vec w = ahalf * (b.center - a.center);
  const Mat h = m.transpose() * m;
  const Vec g = m.transpose() * w;
  Eigen::SelfAdjointEigenSolver<Mat> eh(h);
  const Vec lam = eh.eigenvalues();
  const Vec gt = eh.eigenvectors().transpose() * g;
  const double lmax = lam.maxCoeff();
  auto znorm2 = [&](double s) {
    double t = 0.0;
    for (int i = 0; i < d; ++i) t += gt[i] * gt[i] / ((s - lam[i]) * (s - lam[i]));
    return t;
  };
  // maximize z^T h z + 2 g^T z + w^T w on the unit sphere
  double best = -std::numeric_limits<double>::infinity();
  double lo = lmax + 1e-15 * (1.0 + lmax), hi = lmax + g.norm() + 1.0;
  if (znorm2(lo) >= 1.0) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (znorm2(mid) > 1.0 ? lo : hi) = mid;
    }
    Vec zt(d);
    for (int i = 0; i < d; ++i) zt[i] = gt[i] / (hi - lam[i]);
    const Vec z = eh.eigenvectors() * zt;
    best = (m * z + w).squaredNorm();
  } else {
    // hard case: fill the top eigenspace to reach the sphere
    Vec zt(d);
    for (int i = 0; i < d; ++i)
      zt[i] = (lmax - lam[i]) > 1e-12 * (1.0 + lmax) ? gt[i] / (lmax - lam[i]) : 0.0;
    int top = 0;
    for (int i = 0; i < d; ++i)
      if (lam[i] > lam[top]) top = i;
    zt[top] += std::sqrt(std::max(0.0, 1.0 - zt.squaredNorm()));
    const Vec z = eh.eigenvectors() * zt;
    best = (m * z + w).squaredNorm();
  }
  return {best <= 1.0 + kInclusionTol, false};
}

struct VolumeEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  long hits = 0;
  long samples = 0;
  bool degenerate = false;  // no hits at all
};

inline VolumeEstimate mc_volume(const HPolytope& p, long samples, std::uint64_t seed) {
  require(samples > 0, ErrorCode::Input, "sample count must be positive");
  const Box box = bounding_box(p);
  const int d = p.dim();
  double boxvol = 1.0;
  for (int i = 0; i < d; ++i) boxvol *= std::max(0.0, box.hi[i] - box.lo[i]);
  Rng rng(seed);
  Vec y(d);
  long hits = 0;
  for (long s = 0; s < samples; ++s) {
    for (int i = 0; i < d; ++i) y[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * rng.uniform();
    if (contains(p, y, 0.0)) ++hits;
  }
  VolumeEstimate v;
  v.samples = samples;
  v.hits = hits;
  const double f = static_cast<double>(hits) / samples;
  v.estimate = boxvol * f;
  v.std_error = boxvol * std::sqrt(f * (1.0 - f) / samples);
  v.degenerate = hits == 0;
  return v;
}

inline Ellipsoid mvee(std::span<const Vec> pts, double tol = 1e-7) {
  // The volume of the lifted ellipsoid scales like (1 + tol')^((d+1)/2);
  // tighten the iteration tolerance so the target factor holds.
  const int d = pts.empty() ? 1 : static_cast<int>(pts[0].size());
  auto r = mvee_general(pts, tol / (d + 1), 100000);
  require(r.converged, ErrorCode::Numeric, "MVEE did not converge");
  return r.ellipsoid;
}

inline double ellipsoid_volume(const Ellipsoid& e) {
  const int d = e.dim();
  const double unit = std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
  return unit / std::sqrt(e.shape.determinant());
}

}  // namespace apm::oracle
