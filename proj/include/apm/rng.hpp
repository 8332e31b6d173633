#pragma once

#include "apm/types.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <cstdint>
#include <random>

namespace apm {

// Seeded generator. Every randomized routine takes one of these (or a seed)
// so that results are reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  std::uint64_t bits() { return eng_(); }
  int index(int n) { return std::uniform_int_distribution<int>(0, n - 1)(eng_); }

  Vec unit(int d) {
    Vec v(d);
    double len = 0.0;
    do {
      for (int i = 0; i < d; ++i) v[i] = normal();
      len = v.norm();
    } while (len < 1e-12);
    return v / len;
  }

  Vec in_ball(int d, double r) {
    return unit(d) * (r * std::pow(uniform(), 1.0 / d));
  }

 private:
  std::mt19937_64 eng_;
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic low-discrepancy directions on the unit sphere. d = 2 uses
// the van der Corput sequence on angles; higher d maps a Halton point through
// the inverse normal CDF.
class DirectionStream {
 public:
  DirectionStream(int dim, std::uint64_t offset = 0) : d_(dim), k_(offset + 1) {}

  Vec next() {
    Vec v(d_);
    if (d_ == 1) {
      v[0] = (k_++ % 2) ? 1.0 : -1.0;
      return v;
    }
    if (d_ == 2) {
      const double a = 2.0 * M_PI * radical_inverse(k_++, 2);
      v[0] = std::cos(a);
      v[1] = std::sin(a);
      return v;
    }
    static constexpr int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
    for (;;) {
      const std::uint64_t k = k_++;
      bool ok = true;
      for (int i = 0; i < d_; ++i) {
        const double u = radical_inverse(k, primes[i]);
        if (u <= 0.0 || u >= 1.0) {
          ok = false;
          break;
        }
        v[i] = std::sqrt(2.0) * boost::math::erf_inv(2.0 * u - 1.0);
      }
      const double len = v.norm();
      if (ok && len > 1e-12) return v / len;
    }
  }

  static double radical_inverse(std::uint64_t k, int base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (k > 0) {
      r += f * static_cast<double>(k % base);
      k /= base;
      f *= inv;
    }
    return r;
  }

 private:
  int d_;
  std::uint64_t k_;
};

}  // namespace apm
