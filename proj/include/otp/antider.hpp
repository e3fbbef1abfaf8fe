#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "otp/core.hpp"
#include "otp/errors.hpp"
#include "otp/monotone.hpp"
#include "otp/potential.hpp"
#include "otp/relation.hpp"
#include "otp/space.hpp"

namespace otp {

// Frozen data for the antiderivative family: a mapping M (as its graph), a
// nonempty subset S of dom(M), and finite prescribed values on S.
struct ConstraintSet {
  Relation rel;                        // G(M)
  std::vector<std::size_t> fixed_set;  // S, sorted indices into X
  std::vector<double> fixed_values;    // f|_S, parallel to fixed_set

  ConstraintSet() = default;

  ConstraintSet(Relation r, std::vector<std::size_t> s, std::vector<double> v)
      : rel(std::move(r)), fixed_set(std::move(s)), fixed_values(std::move(v)) {
    if (fixed_set.empty())
      throw Error(ErrorKind::ValidationError, "fixed set S must be nonempty");
    if (fixed_set.size() != fixed_values.size())
      throw Error(ErrorKind::ValidationError, "fixed set and values differ in length");
    std::vector<std::size_t> order(fixed_set.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fixed_set[a] < fixed_set[b]; });
    std::vector<std::size_t> s_sorted(fixed_set.size());
    std::vector<double> v_sorted(fixed_set.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
      s_sorted[k] = fixed_set[order[k]];
      v_sorted[k] = fixed_values[order[k]];
    }
    fixed_set = std::move(s_sorted);
    fixed_values = std::move(v_sorted);
    for (std::size_t k = 1; k < fixed_set.size(); ++k)
      if (fixed_set[k] == fixed_set[k - 1])
        throw Error(ErrorKind::ValidationError, "duplicate index in fixed set");
    auto dom = rel.domain();
    for (std::size_t s : fixed_set)
      if (!std::binary_search(dom.begin(), dom.end(), s))
        throw Error(ErrorKind::ValidationError,
                    "fixed set must lie inside the domain of the mapping");
    for (double v : fixed_values)
      if (!std::isfinite(v))
        throw Error(ErrorKind::ValidationError, "fixed values must be finite");
  }

  bool is_fixed(std::size_t i) const {
    return std::binary_search(fixed_set.begin(), fixed_set.end(), i);
  }

  double value_at(std::size_t i) const {
    auto it = std::lower_bound(fixed_set.begin(), fixed_set.end(), i);
    return fixed_values[static_cast<std::size_t>(it - fixed_set.begin())];
  }

  bool covers_domain() const { return fixed_set == rel.domain(); }
};

// Lower and upper envelopes of the constrained family.
struct EnvelopePair {
  ExtendedPotential alpha;
  ExtendedPotential gamma;
};

namespace detail {

// Best achievable chain value ending at each pair of the relation. A chain
// starts at a seeded pair with the seed's value and accumulates
// c(x_next, y) - c(x, y) per hop; monotonicity (pre-checked by callers)
// keeps every cycle nonpositive in this orientation, so n relaxation rounds
// converge. The same margin gating as the monotonicity checker keeps
// rounding noise from circulating.
inline std::vector<double> best_chain_values(const CouplingInstance& inst,
                                             const Relation& rel,
                                             const std::vector<double>& seeds,
                                             double eps_feas) {
  const auto& pairs = rel.pairs();
  const std::size_t n = pairs.size();
  const double margin = eps_feas / (2.0 * static_cast<double>(n + 1));

  std::vector<double> value = seeds;
  for (std::size_t round = 0; round < n; ++round) {
    bool changed = false;
    for (std::size_t a = 0; a < n; ++a) {
      if (value[a] == -kPlusInfinity) continue;
      const auto& [xa, ya] = pairs[a];
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b) continue;
        double cand = value[a] + inst.coupling(pairs[b].first, ya) -
                      inst.coupling(xa, ya);
        if (cand > value[b] + margin) {
          value[b] = cand;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  return value;
}

// Close every chain with the hop to the evaluation point and take the best:
// out(x) = max_p [ value(p) + c(x, y_p) - c(x_p, y_p) ].
inline ExtendedPotential close_chains(const CouplingInstance& inst,
                                      const Relation& rel,
                                      const std::vector<double>& value) {
  const auto& pairs = rel.pairs();
  std::vector<double> out(inst.nx(), -kPlusInfinity);
  for (std::size_t x = 0; x < inst.nx(); ++x) {
    double best = -kPlusInfinity;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      if (value[p] == -kPlusInfinity) continue;
      const auto& [xp, yp] = pairs[p];
      best = std::max(best, value[p] + inst.coupling(x, yp) - inst.coupling(xp, yp));
    }
    out[x] = best;
  }
  return ExtendedPotential(inst.space_x, std::move(out));
}

inline void require_monotone(const Relation& rel, const CouplingInstance& inst,
                             const Tolerance& tol) {
  MonotoneVerdict verdict = check_cyclic_monotone(rel, inst, tol);
  if (!verdict.is_monotone) {
    std::ostringstream msg;
    msg << "relation admits a violating cycle (sum " << verdict.witness->cycle_sum
        << " over " << verdict.witness->cycle.size() << " pairs)";
    throw MonotoneError(*verdict.witness, msg.str());
  }
}

}  // namespace detail

// Rockafellar's antiderivative R(x): the supremum over chains from s through
// pairs of the relation of the accumulated coupling increments, so that
// R(s) = 0 and the relation's graph sits inside the subdifferential of R.
inline ExtendedPotential rockafellar(const CouplingInstance& inst, const Relation& rel,
                                     std::size_t s, const Tolerance& tol = {}) {
  if (rel.empty()) throw Error(ErrorKind::EmptyRelation, "relation has no pairs");
  detail::require_monotone(rel, inst, tol);

  const auto& pairs = rel.pairs();
  std::vector<double> seeds(pairs.size(), -kPlusInfinity);
  bool found = false;
  for (std::size_t p = 0; p < pairs.size(); ++p)
    if (pairs[p].first == s) {
      seeds[p] = 0.0;
      found = true;
    }
  if (!found)
    throw Error(ErrorKind::IndexNotInDomain,
                "base point is not in the domain of the mapping");

  auto value = detail::best_chain_values(inst, rel, seeds, tol.eps_feas);
  return detail::close_chains(inst, rel, value);
}

// Minimal member of the family: alpha(x) = max over s in S of
// f(s) + R_s(x). All base points are seeded into one chain computation.
inline ExtendedPotential alpha_envelope(const CouplingInstance& inst,
                                        const ConstraintSet& cons,
                                        const Tolerance& tol = {}) {
  detail::require_monotone(cons.rel, inst, tol);

  const auto& pairs = cons.rel.pairs();
  std::vector<double> seeds(pairs.size(), -kPlusInfinity);
  for (std::size_t p = 0; p < pairs.size(); ++p)
    if (cons.is_fixed(pairs[p].first))
      seeds[p] = std::max(seeds[p], cons.value_at(pairs[p].first));

  auto value = detail::best_chain_values(inst, cons.rel, seeds, tol.eps_feas);
  ExtendedPotential alpha = detail::close_chains(inst, cons.rel, value);

  for (std::size_t k = 0; k < cons.fixed_set.size(); ++k)
    if (std::abs(alpha[cons.fixed_set[k]] - cons.fixed_values[k]) > tol.eps_eq)
      throw Error(ErrorKind::InconsistentConstraints,
                  "fixed values are not attained by the lower envelope; the seed "
                  "function is not an antiderivative of the mapping on S");
  return alpha;
}

// The conjugate-side constraint data: inverted mapping over the transposed
// instance, values on M(S) forced by c(s,t) = f(s) + f^c(t) on the graph.
inline std::pair<CouplingInstance, ConstraintSet> dual_constraints(
    const CouplingInstance& inst, const ConstraintSet& cons,
    const Tolerance& tol = {}) {
  std::vector<double> forced(inst.ny(), kPlusInfinity);
  std::vector<char> has(inst.ny(), 0);
  for (const auto& [i, j] : cons.rel.pairs()) {
    if (!cons.is_fixed(i)) continue;
    double v = inst.coupling(i, j) - cons.value_at(i);
    if (has[j] && std::abs(forced[j] - v) > tol.eps_eq) {
      std::ostringstream msg;
      msg << "two fixed points force different dual values at y-index " << j << " ("
          << forced[j] << " vs " << v << "); the fixed values are not consistent "
          << "with a single antiderivative";
      throw Error(ErrorKind::DualInconsistent, msg.str());
    }
    forced[j] = v;
    has[j] = 1;
  }

  std::vector<std::size_t> dual_fixed;
  std::vector<double> dual_values;
  for (std::size_t j = 0; j < inst.ny(); ++j)
    if (has[j]) {
      dual_fixed.push_back(j);
      dual_values.push_back(forced[j]);
    }

  CouplingInstance dual_inst = inst.transposed();
  Relation dual_rel = cons.rel.inverted(inst.ny(), inst.nx());
  return {std::move(dual_inst),
          ConstraintSet(std::move(dual_rel), std::move(dual_fixed),
                        std::move(dual_values))};
}

// Maximal member of the family, computed by the conjugation route: build the
// lower envelope of the dual data and c-transform it back.
inline ExtendedPotential gamma_envelope(const CouplingInstance& inst,
                                        const ConstraintSet& cons,
                                        const Tolerance& tol = {}) {
  auto [dual_inst, dual_cons] = dual_constraints(inst, cons, tol);
  ExtendedPotential dual_alpha = alpha_envelope(dual_inst, dual_cons, tol);
  ExtendedPotential gamma = c_transform(dual_alpha, dual_inst);

  for (std::size_t k = 0; k < cons.fixed_set.size(); ++k)
    if (std::abs(gamma[cons.fixed_set[k]] - cons.fixed_values[k]) > tol.eps_eq)
      throw Error(ErrorKind::InconsistentConstraints,
                  "fixed values are not attained by the upper envelope; the seed "
                  "function is not an antiderivative of the mapping on S");
  return gamma;
}

// Closed form available when every domain point carries a fixed value:
// alpha(x) = max over graph pairs (s,t) of f(s) + c(x,t) - c(s,t).
inline ExtendedPotential alpha_fulldomain(const CouplingInstance& inst,
                                          const ConstraintSet& cons,
                                          const Tolerance& tol = {}) {
  if (!cons.covers_domain())
    throw Error(ErrorKind::ConstraintNotFullDomain,
                "closed form requires S = dom(M)");
  std::vector<double> out(inst.nx(), -kPlusInfinity);
  for (std::size_t x = 0; x < inst.nx(); ++x) {
    double best = -kPlusInfinity;
    for (const auto& [s, t] : cons.rel.pairs())
      best = std::max(best,
                      cons.value_at(s) + inst.coupling(x, t) - inst.coupling(s, t));
    out[x] = best;
  }
  ExtendedPotential alpha(inst.space_x, std::move(out));
  for (std::size_t k = 0; k < cons.fixed_set.size(); ++k)
    if (std::abs(alpha[cons.fixed_set[k]] - cons.fixed_values[k]) > tol.eps_eq)
      throw Error(ErrorKind::InconsistentConstraints,
                  "fixed values are not attained by the closed-form lower envelope");
  return alpha;
}

// Closed form for the upper envelope with S = dom(M): the double conjugate
// of f extended by +inf off the domain.
inline ExtendedPotential gamma_fulldomain(const CouplingInstance& inst,
                                          const ConstraintSet& cons,
                                          const Tolerance& tol = {}) {
  if (!cons.covers_domain())
    throw Error(ErrorKind::ConstraintNotFullDomain,
                "closed form requires S = dom(M)");
  std::vector<double> seed(inst.nx(), kPlusInfinity);
  for (std::size_t k = 0; k < cons.fixed_set.size(); ++k)
    seed[cons.fixed_set[k]] = cons.fixed_values[k];
  ExtendedPotential gamma =
      c_convexify(ExtendedPotential(inst.space_x, std::move(seed)), inst);
  for (std::size_t k = 0; k < cons.fixed_set.size(); ++k)
    if (std::abs(gamma[cons.fixed_set[k]] - cons.fixed_values[k]) > tol.eps_eq)
      throw Error(ErrorKind::InconsistentConstraints,
                  "fixed values are not attained by the closed-form upper envelope");
  return gamma;
}

// Membership test for the family, with a structured verdict. Clause numbering
// follows the family definition: (1) c-convexity, (2) the mapping's graph is
// contained in the subdifferential, (3) the fixed values are attained.
struct MembershipReport {
  bool member = false;
  bool clause_c_convex = false;        // clause 1
  bool clause_antiderivative = false;  // clause 2
  bool clause_fixed_values = false;    // clause 3
  int failed_clause = 0;               // 0 when member; else 1, 2 or 3
  std::optional<IndexPair> missing_pair;     // first graph pair outside the
                                             // subdifferential (clause 2)
  std::optional<std::size_t> mismatch_index;  // first S-index with wrong value
};

inline MembershipReport is_member(const ExtendedPotential& h,
                                  const CouplingInstance& inst,
                                  const ConstraintSet& cons,
                                  const Tolerance& tol = {}) {
  MembershipReport rep;
  rep.clause_c_convex = is_c_convex(h, inst, tol);

  ExtendedPotential conj = c_transform(h, inst);
  rep.clause_antiderivative = true;
  for (const auto& [i, j] : cons.rel.pairs()) {
    if (!in_subdifferential(h, conj, inst, i, j, tol.eps_eq)) {
      rep.clause_antiderivative = false;
      rep.missing_pair = IndexPair{i, j};
      break;
    }
  }

  rep.clause_fixed_values = true;
  for (std::size_t k = 0; k < cons.fixed_set.size(); ++k) {
    if (!extended_equal(h[cons.fixed_set[k]], cons.fixed_values[k], tol.eps_eq)) {
      rep.clause_fixed_values = false;
      rep.mismatch_index = cons.fixed_set[k];
      break;
    }
  }

  rep.member =
      rep.clause_c_convex && rep.clause_antiderivative && rep.clause_fixed_values;
  // Diagnosis order puts the antiderivative property first: a function that
  // fails to absorb the frozen graph is reported as such even when its
  // convexity fails too.
  if (!rep.clause_antiderivative)
    rep.failed_clause = 2;
  else if (!rep.clause_fixed_values)
    rep.failed_clause = 3;
  else if (!rep.clause_c_convex)
    rep.failed_clause = 1;
  return rep;
}

}  // namespace otp
