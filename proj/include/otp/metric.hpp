#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "otp/antider.hpp"
#include "otp/core.hpp"
#include "otp/errors.hpp"
#include "otp/space.hpp"

namespace otp {

// A finite (pseudo)metric: symmetric, zero diagonal, triangle inequality
// within the feasibility band. Off-diagonal zeros are allowed.
struct FiniteMetric {
  FiniteSpace space;
  Matrix dist;

  FiniteMetric() = default;

  FiniteMetric(FiniteSpace sp, Matrix d, const Tolerance& tol = {})
      : space(std::move(sp)), dist(std::move(d)) {
    const std::size_t n = space.size();
    if (dist.rows() != n || dist.cols() != n)
      throw Error(ErrorKind::SpaceMismatch, "distance matrix shape mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      if (dist(i, i) != 0.0)
        throw Error(ErrorKind::ValidationError, "distance matrix diagonal must be 0");
      for (std::size_t j = 0; j < n; ++j) {
        if (!(dist(i, j) >= 0.0) || !std::isfinite(dist(i, j)))
          throw Error(ErrorKind::ValidationError, "distances must be finite and >= 0");
        if (dist(i, j) != dist(j, i))
          throw Error(ErrorKind::ValidationError, "distance matrix must be symmetric");
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          if (dist(i, k) > dist(i, j) + dist(j, k) + tol.eps_feas)
            throw Error(ErrorKind::ValidationError, "triangle inequality violated");
  }

  std::size_t size() const { return space.size(); }

  // The coupling instance the conjugation machinery works with: X paired
  // with itself under -d.
  CouplingInstance negated_instance() const {
    return CouplingInstance(space, space, dist.negated());
  }
};

struct WeightedEdge {
  std::size_t u = 0;
  std::size_t v = 0;
  double weight = 0.0;
};

// Shortest-path metric of a connected weighted graph (Floyd-Warshall).
inline FiniteMetric metric_from_graph(const std::vector<WeightedEdge>& edges,
                                      const FiniteSpace& space,
                                      const Tolerance& tol = {}) {
  const std::size_t n = space.size();
  Matrix d(n, n, kPlusInfinity);
  for (std::size_t i = 0; i < n; ++i) d(i, i) = 0.0;
  for (const auto& e : edges) {
    if (e.u >= n || e.v >= n)
      throw Error(ErrorKind::ValidationError, "edge endpoint out of range");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      throw Error(ErrorKind::ValidationError, "edge weights must be positive");
    d(e.u, e.v) = std::min(d(e.u, e.v), e.weight);
    d(e.v, e.u) = d(e.u, e.v);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!std::isfinite(d(i, j)))
        throw Error(ErrorKind::DisconnectedGraph, "graph is not connected");
  return FiniteMetric(space, std::move(d), tol);
}

inline FiniteMetric metric_from_graph(const std::vector<WeightedEdge>& edges,
                                      std::size_t n, const Tolerance& tol = {}) {
  return metric_from_graph(edges, FiniteSpace::indexed(n), tol);
}

// K * d^alpha is again a metric for 0 < alpha <= 1, K > 0; rescaling reduces
// Holder-continuous data to the 1-Lipschitz machinery.
inline FiniteMetric holder_transform(const FiniteMetric& metric, double k,
                                     double alpha, const Tolerance& tol = {}) {
  if (!(k > 0.0) || !(alpha > 0.0) || !(alpha <= 1.0))
    throw Error(ErrorKind::ValidationError,
                "holder transform needs K > 0 and 0 < alpha <= 1");
  Matrix d(metric.size(), metric.size());
  for (std::size_t i = 0; i < metric.size(); ++i)
    for (std::size_t j = 0; j < metric.size(); ++j)
      d(i, j) = i == j ? 0.0 : k * std::pow(metric.dist(i, j), alpha);
  return FiniteMetric(metric.space, std::move(d), tol);
}

// The four equivalent descriptions of 1-Lipschitz functions on a finite
// metric space. They agree in exact arithmetic; the verdict carries each
// clause for diagnostics.
struct LipschitzEquivalences {
  bool one_lipschitz = false;             // |f(x)-f(y)| <= d(x,y)
  bool conjugate_negation = false;        // f^{-d} = -f
  bool neg_d_convex = false;              // f = f^{-d-d}
  bool identity_in_subdifferential = false;  // (x,x) pairs all tight
  bool all_agree = false;
};

inline LipschitzEquivalences lipconv_check(const ExtendedPotential& f,
                                           const FiniteMetric& metric,
                                           const Tolerance& tol = {}) {
  if (!f.is_finite_everywhere())
    throw Error(ErrorKind::ImproperFunction,
                "Lipschitz candidates must be finite everywhere");
  const std::size_t n = metric.size();
  CouplingInstance neg = metric.negated_instance();

  LipschitzEquivalences out;
  out.one_lipschitz = true;
  for (std::size_t i = 0; i < n && out.one_lipschitz; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(f[i] - f[j]) > metric.dist(i, j) + tol.eps_eq) {
        out.one_lipschitz = false;
        break;
      }

  ExtendedPotential conj = c_transform(f, neg);
  out.conjugate_negation = true;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(conj[i] + f[i]) > tol.eps_eq) {
      out.conjugate_negation = false;
      break;
    }

  out.neg_d_convex = is_c_convex(f, neg, tol);

  out.identity_in_subdifferential = true;
  for (std::size_t i = 0; i < n; ++i)
    if (!in_subdifferential(f, conj, neg, i, i, tol.eps_eq)) {
      out.identity_in_subdifferential = false;
      break;
    }

  out.all_agree = out.one_lipschitz == out.conjugate_negation &&
                  out.one_lipschitz == out.neg_d_convex &&
                  out.one_lipschitz == out.identity_in_subdifferential;
  return out;
}

namespace detail {

inline void require_lipschitz_on_subset(const std::vector<std::size_t>& subset,
                                        const std::vector<double>& values,
                                        const FiniteMetric& metric,
                                        const Tolerance& tol) {
  for (std::size_t a = 0; a < subset.size(); ++a)
    for (std::size_t b = 0; b < subset.size(); ++b)
      if (std::abs(values[a] - values[b]) >
          metric.dist(subset[a], subset[b]) + tol.eps_eq)
        throw Error(ErrorKind::NotLipschitzOnS,
                    "data is not 1-Lipschitz on the given subset");
}

}  // namespace detail

// Largest 1-Lipschitz extension pointwise below any other:
// mcshane(x) = max_s f(s) - d(x,s).
inline ExtendedPotential mcshane(const std::vector<std::size_t>& subset,
                                 const std::vector<double>& values,
                                 const FiniteMetric& metric,
                                 const Tolerance& tol = {}) {
  if (subset.empty() || subset.size() != values.size())
    throw Error(ErrorKind::ValidationError, "subset and values must match, nonempty");
  detail::require_lipschitz_on_subset(subset, values, metric, tol);
  std::vector<double> out(metric.size(), -kPlusInfinity);
  for (std::size_t x = 0; x < metric.size(); ++x)
    for (std::size_t k = 0; k < subset.size(); ++k)
      out[x] = std::max(out[x], values[k] - metric.dist(x, subset[k]));
  return ExtendedPotential(metric.space, std::move(out));
}

// whitney(x) = min_s f(s) + d(x,s), the maximal 1-Lipschitz extension.
inline ExtendedPotential whitney(const std::vector<std::size_t>& subset,
                                 const std::vector<double>& values,
                                 const FiniteMetric& metric,
                                 const Tolerance& tol = {}) {
  if (subset.empty() || subset.size() != values.size())
    throw Error(ErrorKind::ValidationError, "subset and values must match, nonempty");
  detail::require_lipschitz_on_subset(subset, values, metric, tol);
  std::vector<double> out(metric.size(), kPlusInfinity);
  for (std::size_t x = 0; x < metric.size(); ++x)
    for (std::size_t k = 0; k < subset.size(); ++k)
      out[x] = std::min(out[x], values[k] + metric.dist(x, subset[k]));
  return ExtendedPotential(metric.space, std::move(out));
}

// Distance-preservation constraints for an extension: for every graph pair
// (x,y) and every base point x',
//
//   h(x) - h(x') <= d(x',y) - d(x,y).
//
// With x' = x this pins h(y) - h(x) = d(x,y) (through the pair (x,y)); the
// general form is what the envelope machinery preserves.
inline bool satisfies_extension_constraint(const ExtendedPotential& h,
                                           const Relation& rel,
                                           const FiniteMetric& metric,
                                           const Tolerance& tol = {}) {
  for (const auto& [x, y] : rel.pairs())
    for (std::size_t xp = 0; xp < metric.size(); ++xp) {
      if (!h.is_finite_at(x) || !h.is_finite_at(xp)) return false;
      if (h[x] - h[xp] > metric.dist(xp, y) - metric.dist(x, y) + tol.eps_eq)
        return false;
    }
  return true;
}

using LipschitzConstraint = ConstraintSet;

// Minimal and maximal 1-Lipschitz extensions of f|_S that keep every frozen
// pair distance-preserving, via the envelope machinery under -d.
inline EnvelopePair constrained_lipschitz(const LipschitzConstraint& cons,
                                          const FiniteMetric& metric,
                                          const Tolerance& tol = {}) {
  // Check the hypothesis wherever the data makes it checkable: fixed points
  // against fixed points.
  for (const auto& [x, y] : cons.rel.pairs()) {
    if (!cons.is_fixed(x)) continue;
    for (std::size_t k = 0; k < cons.fixed_set.size(); ++k) {
      std::size_t xp = cons.fixed_set[k];
      if (cons.value_at(x) - cons.fixed_values[k] >
          metric.dist(xp, y) - metric.dist(x, y) + tol.eps_eq)
        throw Error(ErrorKind::ConstraintViolation,
                    "fixed values violate the distance-preservation constraint");
    }
  }

  // Values forced on M(S) by f(t) = f(s) + d(s,t); any clash means the data
  // cannot extend.
  std::vector<double> forced(metric.size(), kPlusInfinity);
  std::vector<char> has(metric.size(), 0);
  for (const auto& [s, t] : cons.rel.pairs()) {
    if (!cons.is_fixed(s)) continue;
    double v = cons.value_at(s) + metric.dist(s, t);
    if (has[t] && std::abs(forced[t] - v) > tol.eps_eq)
      throw Error(ErrorKind::ConstraintViolation,
                  "fixed values force conflicting values on the image of S");
    if (cons.is_fixed(t) && std::abs(cons.value_at(t) - v) > tol.eps_eq)
      throw Error(ErrorKind::ConstraintViolation,
                  "fixed value on the image of S contradicts the forced value");
    forced[t] = v;
    has[t] = 1;
  }

  CouplingInstance neg = metric.negated_instance();
  EnvelopePair out{alpha_envelope(neg, cons, tol), gamma_envelope(neg, cons, tol)};
  return out;
}

}  // namespace otp
