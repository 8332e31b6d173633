#pragma once

// Dense linear programming for small dimension and many constraints.
//
//   maximize  c . y   subject to  a_j . y <= b_j
//
// The solver runs the primal simplex method on the dual problem
//
//   minimize  b . lambda  subject to  sum_j lambda_j a_j = c,  lambda >= 0,
//
// whose bases have exactly d columns. A basis is a set of d constraints whose
// normals positively span c; its multipliers y solve the d tight equations and
// form a vertex of the primal arrangement. Pricing picks the most violated
// constraint at that vertex, so the walk stops at the first primal-feasible
// vertex, which is then optimal. The start basis is a far bounding box; a box
// facet that is still tight with positive weight at the end certifies
// unboundedness. Bland's rule takes over after a run of degenerate pivots.

#include "apm/halfspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace apm {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vec optimum;                   // maximizer (valid when Optimal)
  double value = 0.0;            // objective at optimum
  std::vector<int> active;       // basis constraints with positive multiplier
  std::vector<double> weights;   // their multipliers, same order as active
  int iterations = 0;
};

struct LpOptions {
  double box = 1e7;              // artificial bound used for the start basis
  double feas_tol = 1e-12;       // absolute slack tolerance (unit normals)
  int max_iterations = 0;        // 0 = automatic
};

namespace detail {

struct LpRow {
  const Vec* normal;
  double offset;
};

inline LpResult solve_lp_rows(const Vec& c, int n, const auto& row_normal, const auto& row_offset,
                              const LpOptions& opt) {
  const int d = static_cast<int>(c.size());
  require(d >= 1 && d <= kMaxDim, ErrorCode::Input, "LP dimension out of range");
  const double cnorm = std::max(c.norm(), 1e-300);
  const int total = n + d;  // indices >= n are box facets sign_i * e_i . y <= box

  Vec box_sign(d);
  for (int i = 0; i < d; ++i) box_sign[i] = c[i] >= 0.0 ? 1.0 : -1.0;

  auto column = [&](int j, Vec& out) {
    if (j < n) {
      out = row_normal(j);
    } else {
      out = Vec::Zero(d);
      out[j - n] = box_sign[j - n];
    }
  };
  auto offset_of = [&](int j) { return j < n ? row_offset(j) : opt.box; };

  std::vector<int> basis(d);
  for (int i = 0; i < d; ++i) basis[i] = n + i;

  Mat m(d, d), minv(d, d);
  Vec lambda(d), y(d), dir(d), col(d);
  const int max_iter = opt.max_iterations > 0 ? opt.max_iterations : 200 * (total + 10);
  int degenerate_run = 0;
  bool bland = false;
  LpResult res;

  for (int iter = 0;; ++iter) {
    if (iter > max_iter) throw Error(ErrorCode::Numeric, "LP iteration limit exceeded");
    for (int i = 0; i < d; ++i) {
      column(basis[i], col);
      m.col(i) = col;
    }
    Eigen::PartialPivLU<Mat> lu(m);
    minv = lu.inverse();
    lambda = minv * c;
    Vec bb(d);
    for (int i = 0; i < d; ++i) bb[i] = offset_of(basis[i]);
    y = minv.transpose() * bb;

    // pricing: most violated constraint (or lowest index under Bland)
    int enter = -1;
    double worst = 0.0;
    const double ynorm = y.lpNorm<Eigen::Infinity>();
    for (int j = 0; j < total; ++j) {
      double s;
      if (j < n) {
        s = row_offset(j) - row_normal(j).dot(y);
      } else {
        s = opt.box - box_sign[j - n] * y[j - n];
      }
      const double tol = opt.feas_tol * (1.0 + std::abs(offset_of(j)) + ynorm * 1e-3);
      if (s < -tol) {
        if (bland) {
          if (std::find(basis.begin(), basis.end(), j) == basis.end()) {
            enter = j;
            break;
          }
        } else if (s < worst) {
          if (std::find(basis.begin(), basis.end(), j) == basis.end()) {
            worst = s;
            enter = j;
          }
        }
      }
    }
    if (enter < 0) {
      res.iterations = iter;
      for (int i = 0; i < d; ++i) {
        if (basis[i] >= n && lambda[i] > 1e-12 * cnorm) {
          res.status = LpStatus::Unbounded;
          return res;
        }
      }
      res.status = LpStatus::Optimal;
      res.optimum = y;
      res.value = c.dot(y);
      std::vector<std::pair<int, double>> act;
      for (int i = 0; i < d; ++i)
        if (basis[i] < n && lambda[i] > 0.0) act.emplace_back(basis[i], lambda[i]);
      std::sort(act.begin(), act.end());
      for (auto& [j, w] : act) {
        res.active.push_back(j);
        res.weights.push_back(w);
      }
      return res;
    }

    column(enter, col);
    dir = minv * col;
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    const double piv_tol = 1e-11 * std::max(1.0, dir.lpNorm<Eigen::Infinity>());
    for (int i = 0; i < d; ++i) {
      if (dir[i] > piv_tol) {
        const double r = std::max(lambda[i], 0.0) / dir[i];
        if (r < best - 1e-15 || (std::abs(r - best) <= 1e-15 && leave >= 0 && basis[i] < basis[leave])) {
          best = r;
          leave = i;
        }
      }
    }
    if (leave < 0) {
      res.status = LpStatus::Infeasible;
      res.iterations = iter;
      return res;
    }
    if (best <= 1e-14) {
      if (++degenerate_run > 2 * d + 5) bland = true;
    } else {
      degenerate_run = 0;
    }
    basis[leave] = enter;
  }
}

}  // namespace detail

// Maximize objective . y over the given halfspaces.
inline LpResult solve_lp(const Vec& objective, std::span<const Halfspace> constraints,
                         const LpOptions& opt = {}) {
  for (const auto& h : constraints)
    require(h.normal.size() == objective.size(), ErrorCode::Input, "LP dimension mismatch");
  return detail::solve_lp_rows(
      objective, static_cast<int>(constraints.size()),
      [&](int j) -> const Vec& { return constraints[j].normal; },
      [&](int j) { return constraints[j].offset; }, opt);
}

inline LpResult solve_lp(const Vec& objective, const std::vector<Halfspace>& constraints,
                         const LpOptions& opt = {}) {
  return solve_lp(objective, std::span<const Halfspace>(constraints), opt);
}

// True when the halfspaces have a common point (within tolerance).
inline bool lp_feasible(std::span<const Halfspace> constraints, const Vec& hint_direction) {
  Vec c = hint_direction;
  if (c.norm() == 0.0) c = unit_vec(static_cast<int>(c.size()), 0);
  const auto r = solve_lp(c, constraints);
  return r.status != LpStatus::Infeasible;
}

}  // namespace apm
