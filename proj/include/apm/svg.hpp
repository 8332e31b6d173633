#pragma once

// Planar figure: the body, its erosions K(Delta_i) and every node ellipsoid
// colored by level.

#include "apm/canonical.hpp"
#include "apm/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace apm {

namespace detail {

inline std::vector<Vec> polygon_ccw(const HPolytope& p) {
  auto v = enumerate_vertices(p);
  Vec c = Vec::Zero(2);
  for (const auto& x : v) c += x;
  c /= static_cast<double>(std::max<std::size_t>(1, v.size()));
  std::sort(v.begin(), v.end(), [&](const Vec& a, const Vec& b) {
    return std::atan2(a[1] - c[1], a[0] - c[0]) < std::atan2(b[1] - c[1], b[0] - c[0]);
  });
  return v;
}

inline std::string level_color(int level, int levels) {
  const double t = levels > 1 ? static_cast<double>(level) / (levels - 1) : 0.0;
  const int r = static_cast<int>(std::lround(40 + 200 * t));
  const int g = static_cast<int>(std::lround(90 + 60 * (1.0 - std::abs(2.0 * t - 1.0))));
  const int b = static_cast<int>(std::lround(220 - 180 * t));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace detail

inline std::string dag_svg(const CanonicalBody& k, const LayeredDag& dag, int size = 800) {
  require(k.dim() == 2, ErrorCode::Input, "plot needs a planar body");
  const double scale = 0.95 * size;
  const double mid = 0.5 * size;
  auto px = [&](double x) { return mid + scale * x; };
  auto py = [&](double y) { return mid - scale * y; };
  std::ostringstream os;
  char buf[256];
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
     << size << " " << size << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  auto polygon = [&](const HPolytope& p, const char* stroke, double width, const char* dash) {
    os << "<polygon fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << width << "\"";
    if (dash) os << " stroke-dasharray=\"" << dash << "\"";
    os << " points=\"";
    bool first = true;
    for (const auto& v : detail::polygon_ccw(p)) {
      std::snprintf(buf, sizeof buf, "%s%.4f,%.4f", first ? "" : " ", px(v[0]), py(v[1]));
      os << buf;
      first = false;
    }
    os << "\"/>\n";
  };
  polygon(k.body, "black", 1.5, nullptr);
  const int levels = static_cast<int>(dag.levels.size());
  for (int i = 0; i < levels; ++i) polygon(erode(k.body, dag.params.delta(i)), "#999999", 0.5, "3,2");
  for (int i = 0; i < levels; ++i) {
    const std::string color = detail::level_color(i, levels);
    os << "<g class=\"level\" data-level=\"" << i << "\" stroke=\"" << color << "\" fill=\"none\" stroke-width=\"0.6\">\n";
    for (const auto& n : dag.levels[i]) {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(n.ellipsoid.shape.topLeftCorner(2, 2));
      const Eigen::Vector2d ev = es.eigenvalues();
      const Eigen::Matrix2d vec = es.eigenvectors();
      const double rx = 1.0 / std::sqrt(ev[0]), ry = 1.0 / std::sqrt(ev[1]);
      const double angle = -std::atan2(vec(1, 0), vec(0, 0)) * 180.0 / M_PI;
      std::snprintf(buf, sizeof buf,
                    "<ellipse cx=\"%.4f\" cy=\"%.4f\" rx=\"%.5f\" ry=\"%.5f\" transform=\"rotate(%.4f %.4f %.4f)\"/>\n",
                    px(n.center[0]), py(n.center[1]), scale * rx, scale * ry, angle, px(n.center[0]), py(n.center[1]));
      os << buf;
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace apm
