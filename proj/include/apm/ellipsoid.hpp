#pragma once

#include "apm/halfspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace apm {

// {y : (y - center)^T shape (y - center) <= 1}, shape symmetric positive definite.
struct Ellipsoid {
  Vec center;
  Mat shape;

  static Ellipsoid ball(const Vec& center, double radius) {
    const int d = static_cast<int>(center.size());
    return {center, Mat::Identity(d, d) / (radius * radius)};
  }

  int dim() const { return static_cast<int>(center.size()); }

  double form(const Vec& y) const {
    const Vec z = y - center;
    return z.dot(shape * z);
  }
  bool contains(const Vec& y, double tol = 1e-12) const { return form(y) <= 1.0 + tol; }

  // max over the ellipsoid of u . y
  double support(const Vec& u) const {
    const Vec w = shape.ldlt().solve(u);
    return center.dot(u) + std::sqrt(std::max(0.0, u.dot(w)));
  }

  // largest semi-axis length
  double max_radius() const {
    Eigen::SelfAdjointEigenSolver<Mat> es(shape, Eigen::EigenvaluesOnly);
    return 1.0 / std::sqrt(es.eigenvalues().minCoeff());
  }
  double min_radius() const {
    Eigen::SelfAdjointEigenSolver<Mat> es(shape, Eigen::EigenvaluesOnly);
    return 1.0 / std::sqrt(es.eigenvalues().maxCoeff());
  }

  bool valid() const {
    if (shape.rows() != dim() || shape.cols() != dim()) return false;
    if ((shape - shape.transpose()).lpNorm<Eigen::Infinity>() > 1e-10 * (1.0 + shape.lpNorm<Eigen::Infinity>()))
      return false;
    Eigen::SelfAdjointEigenSolver<Mat> es(shape, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() > 0.0;
  }

  bool operator==(const Ellipsoid& o) const { return center == o.center && shape == o.shape; }
};

// Does the ray meet the ellipsoid at some parameter t >= 0?
inline bool ellipsoid_ray_intersect(const Ellipsoid& e, const Ray& r) {
  const Vec w = r.origin - e.center;
  const Vec au = e.shape * r.direction;
  const double a = r.direction.dot(au);
  const double b = w.dot(au);
  const double c = w.dot(e.shape * w) - 1.0;
  if (c <= 0.0) return true;
  return b < 0.0 && b * b >= a * c;
}

struct CenteredMvee {
  Mat shape;       // (y - c)^T shape (y - c) <= 1 contains every point
  int iterations = 0;
  bool converged = false;
  std::vector<double> weights;   // design weights, usable as a warm start
};

namespace detail {

// Newton's method on the optimality conditions g_i(u) = d over the current
// support of the design, adding violated points and dropping weights that
// reach zero. Returns false (leaving u untouched) when it does not settle.
inline bool mvee_newton_polish(std::span<const Vec> pts, std::vector<double>& u, double tol, int& iters) {
  const int d = static_cast<int>(pts[0].size());
  const int n = static_cast<int>(pts.size());
  std::vector<double> w = u;
  double umax = *std::max_element(w.begin(), w.end());
  std::vector<int> sup;
  for (int i = 0; i < n; ++i)
    if (w[i] > 1e-6 * umax) sup.push_back(i);
    else w[i] = 0.0;
  Mat m(d, d);
  for (int step = 0; step < 60; ++step) {
    ++iters;
    m.setZero();
    for (int i : sup) m.noalias() += w[i] * pts[i] * pts[i].transpose();
    Eigen::LDLT<Mat> ldlt(m);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
    const Mat minv = ldlt.solve(Mat::Identity(d, d));
    const int k = static_cast<int>(sup.size());
    Eigen::MatrixXd jac(k, k);
    Eigen::VectorXd f(k);
    for (int a = 0; a < k; ++a) {
      const Vec ma = minv * pts[sup[a]];
      for (int b = 0; b < k; ++b) {
        const double kab = pts[sup[b]].dot(ma);
        jac(a, b) = -kab * kab;
      }
      f[a] = pts[sup[a]].dot(ma) - d;
    }
    if (f.lpNorm<Eigen::Infinity>() <= 1e-12 * d) {
      int worst = -1;
      double gw = d * (1.0 + tol);
      for (int i = 0; i < n; ++i) {
        const double gi = pts[i].dot(minv * pts[i]);
        if (gi > gw) {
          gw = gi;
          worst = i;
        }
      }
      if (worst < 0) {
        u = w;
        return true;
      }
      sup.push_back(worst);
      std::sort(sup.begin(), sup.end());
      w[worst] = 1e-3 / n;
      continue;
    }
    // antipodal or repeated points make the Jacobian singular; the
    // minimum-norm step spreads weight evenly among them
    const Eigen::VectorXd delta = jac.completeOrthogonalDecomposition().solve(f);
    if (!delta.allFinite()) return false;
    double alpha = 1.0;
    for (int a = 0; a < k; ++a)
      if (delta[a] > 0.0) alpha = std::min(alpha, w[sup[a]] / delta[a]);
    if (alpha < 1.0) {
      // a weight hits zero: drop it and retry from the reduced support
      int drop = 0;
      double best = std::numeric_limits<double>::infinity();
      for (int a = 0; a < k; ++a)
        if (delta[a] > 0.0 && w[sup[a]] / delta[a] < best) {
          best = w[sup[a]] / delta[a];
          drop = a;
        }
      for (int a = 0; a < k; ++a) w[sup[a]] -= 0.5 * best * delta[a];
      w[sup[drop]] = 0.0;
      sup.erase(sup.begin() + drop);
      if (static_cast<int>(sup.size()) < d) return false;
      continue;
    }
    for (int a = 0; a < k; ++a) w[sup[a]] -= delta[a];
  }
  return false;
}

}  // namespace detail

// Minimum-volume ellipsoid centered at the origin containing the symmetric set
// {+v_i, -v_i}. Wolfe-Atwood coordinate steps on the D-optimal design weights,
// finished by a Newton polish on the support; the result is dilated so every
// point is exactly covered.
inline CenteredMvee mvee_centered(std::span<const Vec> pts, double tol = 1e-9,
                                  int max_iter = 10000, const std::vector<double>* start = nullptr) {
  require(!pts.empty(), ErrorCode::Degenerate, "MVEE of empty point set");
  const int d = static_cast<int>(pts[0].size());
  const int n = static_cast<int>(pts.size());
  std::vector<double> u(n, 1.0 / n);
  if (start && static_cast<int>(start->size()) == n) u = *start;
  std::vector<double> g(n);
  CenteredMvee out;
  Mat m(d, d), minv(d, d);
  int polish_iters = 0, next_polish = 0;
  for (int it = 0; it + polish_iters < max_iter; ++it) {
    m.setZero();
    for (int i = 0; i < n; ++i) m.noalias() += u[i] * pts[i] * pts[i].transpose();
    Eigen::LDLT<Mat> ldlt(m);
    require(ldlt.info() == Eigen::Success && ldlt.isPositive(), ErrorCode::Degenerate,
            "MVEE point set does not span the space");
    minv = ldlt.solve(Mat::Identity(d, d));
    int jmax = 0, jmin = -1;
    for (int i = 0; i < n; ++i) {
      g[i] = pts[i].dot(minv * pts[i]);
      if (g[i] > g[jmax]) jmax = i;
      if (u[i] > 0.0 && (jmin < 0 || g[i] < g[jmin])) jmin = i;
    }
    out.iterations = it + polish_iters;
    if (g[jmax] <= d * (1.0 + tol)) {
      out.converged = true;
      break;
    }
    if (g[jmax] <= d * 1.01 && it >= next_polish) {
      if (detail::mvee_newton_polish(pts, u, tol, polish_iters)) continue;
      next_polish = it + 100;
    }
    if (it + polish_iters >= max_iter) break;
    // Wolfe-Atwood: either move weight toward the most violated point or
    // away from the least useful supported point.
    int j = jmax;
    double step = (g[jmax] / d - 1.0) / (g[jmax] - 1.0);
    if (jmin >= 0 && d - g[jmin] > g[jmax] - d && u[jmin] < 1.0) {
      j = jmin;
      step = std::max(-u[jmin] / (1.0 - u[jmin]), (g[jmin] / d - 1.0) / (g[jmin] - 1.0));
    }
    for (auto& w : u) w *= (1.0 - step);
    u[j] += step;
    if (u[j] < 1e-300) u[j] = 0.0;
  }
  m.setZero();
  for (int i = 0; i < n; ++i) m.noalias() += u[i] * pts[i] * pts[i].transpose();
  minv = m.ldlt().solve(Mat::Identity(d, d));
  double gmax = 0.0;
  for (const auto& p : pts) gmax = std::max(gmax, p.dot(minv * p));
  require(gmax > 0.0 && std::isfinite(gmax), ErrorCode::Degenerate, "MVEE degenerate");
  out.shape = minv / gmax;
  out.shape = 0.5 * (out.shape + out.shape.transpose()).eval();
  out.weights = std::move(u);
  return out;
}

struct GeneralMvee {
  Ellipsoid ellipsoid;
  int iterations = 0;
  bool converged = false;
};

// Khachiyan's algorithm for the minimum-volume enclosing ellipsoid of an
// arbitrary point set (lifted to homogeneous coordinates). The final
// ellipsoid is dilated so that every input point is covered.
inline GeneralMvee mvee_general(std::span<const Vec> pts, double tol = 1e-7, int max_iter = 10000) {
  require(!pts.empty(), ErrorCode::Degenerate, "MVEE of empty point set");
  const int d = static_cast<int>(pts[0].size());
  const int n = static_cast<int>(pts.size());
  require(n >= d + 1, ErrorCode::Degenerate, "MVEE needs at least d+1 points");
  std::vector<double> u(n, 1.0 / n);
  GeneralMvee out;
  Mat x(d + 1, d + 1);
  Vec q(d + 1);
  for (int it = 0; it < max_iter; ++it) {
    x.setZero();
    for (int i = 0; i < n; ++i) {
      q.head(d) = pts[i];
      q[d] = 1.0;
      x.noalias() += u[i] * q * q.transpose();
    }
    Eigen::LDLT<Mat> ldlt(x);
    require(ldlt.info() == Eigen::Success && ldlt.isPositive() &&
                ldlt.vectorD().minCoeff() > 1e-300,
            ErrorCode::Degenerate, "MVEE point set is rank deficient");
    int jmax = 0, jmin = -1;
    double mmax = -1.0, mmin = 0.0;
    for (int i = 0; i < n; ++i) {
      q.head(d) = pts[i];
      q[d] = 1.0;
      const double m = q.dot(ldlt.solve(q));
      if (m > mmax) {
        mmax = m;
        jmax = i;
      }
      if (u[i] > 0.0 && (jmin < 0 || m < mmin)) {
        mmin = m;
        jmin = i;
      }
    }
    out.iterations = it;
    if (mmax <= (d + 1) * (1.0 + tol)) {
      out.converged = true;
      break;
    }
    const double dd = d + 1.0;
    int j = jmax;
    double step = (mmax / dd - 1.0) / (mmax - 1.0);
    if (jmin >= 0 && dd - mmin > mmax - dd && u[jmin] < 1.0) {
      j = jmin;
      step = std::max(-u[jmin] / (1.0 - u[jmin]), (mmin / dd - 1.0) / (mmin - 1.0));
    }
    for (auto& w : u) w *= (1.0 - step);
    u[j] += step;
    if (u[j] < 1e-300) u[j] = 0.0;
  }
  Vec c = Vec::Zero(d);
  for (int i = 0; i < n; ++i) c += u[i] * pts[i];
  Mat cov = Mat::Zero(d, d);
  for (int i = 0; i < n; ++i) cov.noalias() += u[i] * (pts[i] - c) * (pts[i] - c).transpose();
  Eigen::LDLT<Mat> cl(cov);
  require(cl.info() == Eigen::Success && cl.isPositive() && cl.vectorD().minCoeff() > 1e-300,
          ErrorCode::Degenerate, "MVEE point set is rank deficient");
  Mat a = cl.solve(Mat::Identity(d, d)) / d;
  double fmax = 0.0;
  for (const auto& p : pts) fmax = std::max(fmax, (p - c).dot(a * (p - c)));
  if (fmax > 1.0) a /= fmax;
  a = 0.5 * (a + a.transpose()).eval();
  out.ellipsoid = {c, a};
  return out;
}

}  // namespace apm
