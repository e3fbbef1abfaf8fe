#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

#include "otp/core.hpp"
#include "otp/errors.hpp"
#include "otp/relation.hpp"
#include "otp/space.hpp"

namespace otp {

// A directed cycle of relation pairs certifying a monotonicity violation.
struct MonotoneWitness {
  std::vector<IndexPair> cycle;  // pairs visited in cycle order
  double cycle_sum = 0.0;        // sum of c(x_i,y_i) - c(x_{i+1},y_i), below -eps_feas
};

struct MonotoneVerdict {
  bool is_monotone = true;
  std::optional<MonotoneWitness> witness;  // present exactly when not monotone
};

// Thrown by operations whose hypotheses require a cyclically monotone
// relation; carries the violating cycle.
class MonotoneError : public Error {
 public:
  MonotoneError(MonotoneWitness w, const std::string& message)
      : Error(ErrorKind::NotCyclicallyMonotone, message), witness_(std::move(w)) {}

  const MonotoneWitness& witness() const { return witness_; }

 private:
  MonotoneWitness witness_;
};

// Sum of c(x_i,y_i) - c(x_{i+1},y_i) around a closed chain of pairs
// (x_{n+1} = x_1). Nonnegative for every cycle iff the relation is
// cyclically monotone with respect to the coupling.
inline double cycle_weight(const std::vector<IndexPair>& cycle,
                           const CouplingInstance& inst) {
  double sum = 0.0;
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    const auto& [xi, yi] = cycle[k];
    const auto& [xn, yn] = cycle[(k + 1) % cycle.size()];
    sum += inst.coupling(xi, yi) - inst.coupling(xn, yi);
  }
  return sum;
}

namespace detail {

// Bellman-Ford over the complete digraph on the relation's pairs, edge
// weight w(a -> b) = c(x_a,y_a) - c(x_b,y_a), seeded from a virtual source
// at distance 0 everywhere. A cycle below -eps_feas keeps relaxing forever;
// cycles at exact zero (ubiquitous, e.g. any pair revisited) must not
// trigger, so relaxations are gated by a margin well below the tolerance
// but well above rounding noise.
inline std::optional<MonotoneWitness> find_violating_cycle(
    const Relation& rel, const CouplingInstance& inst, double eps_feas) {
  const auto& pairs = rel.pairs();
  const std::size_t n = pairs.size();
  const double margin = eps_feas / (2.0 * static_cast<double>(n + 1));

  auto w = [&](std::size_t a, std::size_t b) {
    return inst.coupling(pairs[a].first, pairs[a].second) -
           inst.coupling(pairs[b].first, pairs[a].second);
  };

  std::vector<double> dist(n, 0.0);
  std::vector<std::size_t> pred(n, n);  // n = no predecessor

  const std::size_t max_batches = 3;
  for (std::size_t batch = 0; batch < max_batches; ++batch) {
    bool changed = false;
    for (std::size_t round = 0; round < n; ++round) {
      changed = false;
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
          if (a == b) continue;
          double cand = dist[a] + w(a, b);
          if (cand < dist[b] - margin) {
            dist[b] = cand;
            pred[b] = a;
            changed = true;
          }
        }
      }
      if (!changed) return std::nullopt;  // converged: no violating cycle
    }

    // Still relaxing after n rounds: extract predecessor-graph cycles and
    // keep the worst one that genuinely violates the tolerance.
    std::optional<MonotoneWitness> best;
    std::vector<char> mark(n, 0);
    for (std::size_t start = 0; start < n; ++start) {
      std::size_t cur = start;
      for (std::size_t step = 0; step <= n && cur != n; ++step) cur = pred[cur];
      if (cur == n) continue;  // ran off the virtual source: no cycle here
      // cur now lies on a predecessor cycle; collect it.
      std::vector<std::size_t> nodes;
      std::size_t walk = cur;
      do {
        nodes.push_back(walk);
        walk = pred[walk];
      } while (walk != cur);
      if (mark[cur]) continue;
      for (std::size_t v : nodes) mark[v] = 1;
      // pred points backwards along the cycle; reverse into forward order.
      std::reverse(nodes.begin(), nodes.end());
      std::vector<IndexPair> cycle;
      cycle.reserve(nodes.size());
      for (std::size_t v : nodes) cycle.push_back(pairs[v]);
      double sum = cycle_weight(cycle, inst);
      if (sum < -eps_feas && (!best || sum < best->cycle_sum))
        best = MonotoneWitness{std::move(cycle), sum};
    }
    if (best) return best;
    // Only noise-level cycles extracted so far; let a genuine violation, if
    // any, keep pumping and try again.
  }
  return std::nullopt;
}

}  // namespace detail

// Cycle-sum definition of cyclic monotonicity, checked by negative-cycle
// detection on the pair graph. O(|rel|^3) worst case.
inline MonotoneVerdict check_cyclic_monotone(const Relation& rel,
                                             const CouplingInstance& inst,
                                             const Tolerance& tol = {}) {
  if (rel.empty()) throw Error(ErrorKind::EmptyRelation, "relation has no pairs");
  for (const auto& [i, j] : rel.pairs())
    if (i >= inst.nx() || j >= inst.ny())
      throw Error(ErrorKind::SpaceMismatch, "relation does not fit the instance");
  auto witness = detail::find_violating_cycle(rel, inst, tol.eps_feas);
  if (witness) return MonotoneVerdict{false, std::move(witness)};
  return MonotoneVerdict{true, std::nullopt};
}

// Permutation characterization: the relation is monotone iff for every
// finite pair selection, the as-given assignment has the highest total
// coupling among all rearrangements,
//
//   sum_i c(x_i, y_sigma(i)) <= sum_i c(x_i, y_i)   for all sigma.
//
// A violating permutation is reduced to the worst cycle of its cycle
// decomposition so the witness matches the cycle-sum checker's.
inline MonotoneVerdict check_n_monotone_permutations(const Relation& rel,
                                                     const CouplingInstance& inst,
                                                     std::size_t n_max,
                                                     const Tolerance& tol = {}) {
  if (rel.empty()) throw Error(ErrorKind::EmptyRelation, "relation has no pairs");
  if (n_max > 8)
    throw Error(ErrorKind::LimitExceeded,
                "permutation check limited to subsets of at most 8 pairs");
  const auto& pairs = rel.pairs();
  const std::size_t n = pairs.size();
  const std::size_t k_top = std::min(n_max, n);

  std::optional<MonotoneWitness> best;

  for (std::size_t k = 2; k <= k_top; ++k) {
    // Enumerate k-subsets via a sorted index selector.
    std::vector<std::size_t> sel(k);
    std::iota(sel.begin(), sel.end(), 0);
    while (true) {
      double identity_total = 0.0;
      for (std::size_t t = 0; t < k; ++t)
        identity_total += inst.coupling(pairs[sel[t]].first, pairs[sel[t]].second);

      std::vector<std::size_t> perm(k);
      std::iota(perm.begin(), perm.end(), 0);
      while (std::next_permutation(perm.begin(), perm.end())) {
        double permuted_total = 0.0;
        for (std::size_t t = 0; t < k; ++t)
          permuted_total +=
              inst.coupling(pairs[sel[t]].first, pairs[sel[perm[t]]].second);
        if (permuted_total <= identity_total + tol.eps_feas) continue;

        // Violation: pull out the worst cycle of sigma's decomposition.
        std::vector<char> seen(k, 0);
        for (std::size_t t0 = 0; t0 < k; ++t0) {
          if (seen[t0] || perm[t0] == t0) continue;
          std::vector<std::size_t> orbit;
          std::size_t t = t0;
          do {
            orbit.push_back(t);
            seen[t] = 1;
            t = perm[t];
          } while (t != t0);
          // The cycle-sum orientation walks the orbit in reverse.
          std::vector<IndexPair> cycle;
          cycle.reserve(orbit.size());
          for (auto it = orbit.rbegin(); it != orbit.rend(); ++it)
            cycle.push_back(pairs[sel[*it]]);
          double sum = cycle_weight(cycle, inst);
          if (sum < -tol.eps_feas && (!best || sum < best->cycle_sum))
            best = MonotoneWitness{std::move(cycle), sum};
        }
      }

      // Next k-subset in lexicographic order.
      std::size_t pos = k;
      while (pos > 0 && sel[pos - 1] == n - k + pos - 1) --pos;
      if (pos == 0) break;
      ++sel[pos - 1];
      for (std::size_t t = pos; t < k; ++t) sel[t] = sel[t - 1] + 1;
    }
  }

  if (best) return MonotoneVerdict{false, std::move(best)};
  return MonotoneVerdict{true, std::nullopt};
}

}  // namespace otp
