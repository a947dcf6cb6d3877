#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "skillspace/geometry.hpp"

namespace skillspace {

/// Seeded generator with platform-independent variates. std distributions are
/// implementation-defined, so uniforms and normals are derived here directly
/// from the 64-bit engine output.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (no cached second variate).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Vec3 normal3() { return {normal(), normal(), normal()}; }

  /// Haar-uniform rotation (Shoemake).
  Rotation rotation() {
    const double u1 = uniform(), u2 = uniform(), u3 = uniform();
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    const double t1 = 2.0 * std::numbers::pi * u2, t2 = 2.0 * std::numbers::pi * u3;
    return Rotation::from_wxyz(b * std::cos(t2), a * std::sin(t1), a * std::cos(t1), b * std::sin(t2));
  }

  UnitVec3 direction() {
    Vec3 v = normal3();
    while (v.norm() < 1e-12) v = normal3();
    return UnitVec3::normalized(v);
  }

  std::uint64_t next() { return engine_(); }

private:
  std::mt19937_64 engine_;
};

}  // namespace skillspace
