#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "otp/errors.hpp"
#include "otp/matrix.hpp"

namespace otp {

// Comparison band for floating-point equality and feasibility tests. All
// identities in this library are exact in real arithmetic; the band only
// absorbs rounding. Absolute tolerances, intended for data normalized so
// |coupling| stays below about 1e6.
struct Tolerance {
  double eps_eq = 1e-9;    // equality of values
  double eps_feas = 1e-9;  // feasibility / mass bookkeeping slack

  static Tolerance with(double eps) { return Tolerance{eps, eps}; }

  void validate() const {
    if (!(eps_eq > 0.0) || !(eps_feas > 0.0))
      throw Error(ErrorKind::ValidationError, "tolerances must be positive");
  }
};

// A finite labeled ground set. Labels are arbitrary distinct tokens; indices
// into the label list are the working representation everywhere else.
class FiniteSpace {
 public:
  FiniteSpace() = default;

  explicit FiniteSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty())
      throw Error(ErrorKind::ValidationError, "space must contain at least one point");
    std::unordered_set<std::string> seen;
    for (const auto& l : labels_)
      if (!seen.insert(l).second)
        throw Error(ErrorKind::ValidationError, "duplicate label '" + l + "'");
  }

  // n points labeled prefix0, prefix1, ...
  static FiniteSpace indexed(std::size_t n, const std::string& prefix = "p") {
    std::vector<std::string> labels;
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) labels.push_back(prefix + std::to_string(i));
    return FiniteSpace(std::move(labels));
  }

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }

  std::optional<std::size_t> find(const std::string& label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
      if (labels_[i] == label) return i;
    return std::nullopt;
  }

  bool operator==(const FiniteSpace& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
};

// Two finite spaces and a finite real coupling between them. Depending on
// context the matrix is read as the coupling of conjugation theory or as a
// transport cost; the pricing layer passes the negated cost through the same
// type.
struct CouplingInstance {
  FiniteSpace space_x;
  FiniteSpace space_y;
  Matrix coupling;  // shape (|X|, |Y|), every entry finite

  CouplingInstance() = default;

  CouplingInstance(FiniteSpace x, FiniteSpace y, Matrix c)
      : space_x(std::move(x)), space_y(std::move(y)), coupling(std::move(c)) {
    if (coupling.rows() != space_x.size() || coupling.cols() != space_y.size())
      throw Error(ErrorKind::SpaceMismatch, "coupling shape does not match spaces");
    if (!coupling.all_finite())
      throw Error(ErrorKind::ValidationError, "coupling entries must be finite");
  }

  std::size_t nx() const { return space_x.size(); }
  std::size_t ny() const { return space_y.size(); }

  // Same instance with the roles of X and Y exchanged.
  CouplingInstance transposed() const {
    return CouplingInstance(space_y, space_x, coupling.transposed());
  }

  // Same spaces under the sign-flipped coupling.
  CouplingInstance negated() const {
    return CouplingInstance(space_x, space_y, coupling.negated());
  }
};

}  // namespace otp
