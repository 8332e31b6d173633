#pragma once

#include "apm/types.hpp"

#include <cmath>

namespace apm {

// The set {y : normal . y <= offset}. Normals are unit length once built
// through make(); downstream code relies on that so that offset shifts are
// Euclidean translations.
struct Halfspace {
  Vec normal;
  double offset = 0.0;

  static Halfspace make(const Vec& normal, double offset) {
    const double len = normal.norm();
    require(std::isfinite(len) && len > 0.0 && std::isfinite(offset), ErrorCode::Input,
            "halfspace normal must be finite and nonzero");
    return Halfspace{normal / len, offset / len};
  }

  int dim() const { return static_cast<int>(normal.size()); }
  double slack(const Vec& y) const { return offset - normal.dot(y); }
  bool operator==(const Halfspace& o) const { return normal == o.normal && offset == o.offset; }
};

struct Ray {
  Vec origin;
  Vec direction;

  static Ray make(const Vec& origin, const Vec& direction) {
    const double len = direction.norm();
    require(origin.size() == direction.size(), ErrorCode::Input, "ray dimension mismatch");
    require(std::isfinite(len) && len > 0.0, ErrorCode::Input, "ray direction must be nonzero");
    return Ray{origin, direction / len};
  }

  Vec at(double t) const { return origin + t * direction; }
};

}  // namespace apm
