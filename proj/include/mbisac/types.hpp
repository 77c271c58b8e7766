#pragma once

#include <complex>
#include <cstdint>
#include <numbers>

#include <Eigen/Dense>

namespace mbisac {

using cdouble = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using Position = Eigen::Vector2d;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = std::numbers::pi;
inline constexpr cdouble kJ{0.0, 1.0};

constexpr double degToRad(double deg) { return deg * kPi / 180.0; }
constexpr double radToDeg(double rad) { return rad * 180.0 / kPi; }

/// Closed interval [lo, hi]. Used for angular sectors (radians) and range sectors (meters).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double span() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool operator==(const Interval&) const = default;
};

}  // namespace mbisac
