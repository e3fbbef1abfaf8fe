#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "otp/errors.hpp"
#include "otp/space.hpp"

namespace otp {

// The single admitted infinity. Potentials live in (-inf, +inf]; -inf and NaN
// are rejected at construction.
inline constexpr double kPlusInfinity = std::numeric_limits<double>::infinity();

// Equality on (-inf, +inf]: +inf matches +inf, finite values match within eps.
inline bool extended_equal(double a, double b, double eps) {
  if (std::isinf(a) || std::isinf(b)) return std::isinf(a) && std::isinf(b);
  return std::abs(a - b) <= eps;
}

// A proper extended-real function on a finite space, stored densely.
class ExtendedPotential {
 public:
  ExtendedPotential() = default;

  ExtendedPotential(FiniteSpace space, std::vector<double> values)
      : space_(std::move(space)), values_(std::move(values)) {
    if (values_.size() != space_.size())
      throw Error(ErrorKind::SpaceMismatch, "potential length does not match space");
    bool any_finite = false;
    for (double v : values_) {
      if (std::isnan(v) || v == -kPlusInfinity)
        throw Error(ErrorKind::ValidationError,
                    "potential values must lie in (-inf, +inf]");
      any_finite = any_finite || std::isfinite(v);
    }
    if (!any_finite)
      throw Error(ErrorKind::ImproperFunction, "potential has no finite value");
  }

  // The indicator-style potential: value at one point, +inf elsewhere.
  static ExtendedPotential spike(const FiniteSpace& space, std::size_t at,
                                 double value = 0.0) {
    std::vector<double> v(space.size(), kPlusInfinity);
    v.at(at) = value;
    return ExtendedPotential(space, std::move(v));
  }

  static ExtendedPotential constant(const FiniteSpace& space, double value) {
    return ExtendedPotential(space, std::vector<double>(space.size(), value));
  }

  const FiniteSpace& space() const { return space_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

  bool is_finite_at(std::size_t i) const { return std::isfinite(values_[i]); }

  bool is_finite_everywhere() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  // Pointwise comparison treating +inf = +inf as equal.
  bool approx_equal(const ExtendedPotential& other, double eps) const {
    if (other.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i)
      if (!extended_equal(values_[i], other.values_[i], eps)) return false;
    return true;
  }

  // Largest |difference| over points where both are finite; +inf mismatches
  // count as infinite deviation.
  double max_deviation(const ExtendedPotential& other) const {
    double dev = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      double a = values_[i], b = other.values_[i];
      if (std::isinf(a) != std::isinf(b)) return kPlusInfinity;
      if (std::isinf(a)) continue;
      dev = std::max(dev, std::abs(a - b));
    }
    return dev;
  }

 private:
  FiniteSpace space_;
  std::vector<double> values_;
};

}  // namespace otp
