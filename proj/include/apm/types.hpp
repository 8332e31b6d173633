#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace apm {

// Largest ambient dimension handled anywhere. Polytopes live in d <= 8; the
// nearest-neighbor reduction lifts to d + 1 and the Chebyshev LP adds one more
// variable on top of that.
inline constexpr int kMaxDim = 10;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

enum class ErrorCode {
  Input,               // malformed or inconsistent input
  Precondition,        // caller violated a documented precondition
  Unbounded,           // LP or polytope unbounded
  Infeasible,          // LP infeasible
  ErosionTooLarge,     // erosion leaves no interior
  Numeric,             // iteration failed to converge
  OutOfRegime,         // point too deep for near-boundary guarantees
  ProjectiveDegenerate,
  Degenerate,          // rank-deficient or duplicate input
  Construction,        // data structure build failed
  Internal,            // invariant broken
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::Input: return "input error";
    case ErrorCode::Precondition: return "precondition error";
    case ErrorCode::Unbounded: return "unbounded";
    case ErrorCode::Infeasible: return "infeasible";
    case ErrorCode::ErosionTooLarge: return "erosion too large";
    case ErrorCode::Numeric: return "numeric error";
    case ErrorCode::OutOfRegime: return "out of regime";
    case ErrorCode::ProjectiveDegenerate: return "projective degenerate";
    case ErrorCode::Degenerate: return "degenerate input";
    case ErrorCode::Construction: return "construction error";
    case ErrorCode::Internal: return "internal invariant violation";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const char* what) {
  if (!cond) [[unlikely]] throw Error(code, what);
}
inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) [[unlikely]] throw Error(code, what);
}

inline Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline Vec unit_vec(int dim, int axis, double sign = 1.0) {
  Vec v = Vec::Zero(dim);
  v[axis] = sign;
  return v;
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace apm
