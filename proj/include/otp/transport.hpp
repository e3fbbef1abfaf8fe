#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "otp/core.hpp"
#include "otp/errors.hpp"
#include "otp/monotone.hpp"
#include "otp/potential.hpp"
#include "otp/relation.hpp"
#include "otp/space.hpp"

namespace otp {

// A probability weight vector over a finite space.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  DiscreteMeasure(FiniteSpace space, std::vector<double> weights,
                  const Tolerance& tol = {})
      : space_(std::move(space)), weights_(std::move(weights)) {
    if (weights_.size() != space_.size())
      throw Error(ErrorKind::SpaceMismatch, "weight count does not match space");
    double total = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0) || !std::isfinite(w))
        throw Error(ErrorKind::ValidationError, "weights must be finite and >= 0");
      total += w;
    }
    if (std::abs(total - 1.0) > tol.eps_feas)
      throw Error(ErrorKind::InfeasibleMarginals,
                  "weights sum to " + std::to_string(total) + ", expected 1");
  }

  static DiscreteMeasure uniform(const FiniteSpace& space) {
    return DiscreteMeasure(
        space, std::vector<double>(space.size(), 1.0 / static_cast<double>(space.size())));
  }

  const FiniteSpace& space() const { return space_; }
  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  FiniteSpace space_;
  std::vector<double> weights_;
};

struct PlanEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  double mass = 0.0;
};

// Sparse nonnegative coupling matrix with prescribed marginals.
struct TransportPlan {
  FiniteSpace space_x;
  FiniteSpace space_y;
  std::vector<PlanEntry> entries;  // sorted by (i, j); all masses > 0

  double total_mass() const {
    double t = 0.0;
    for (const auto& e : entries) t += e.mass;
    return t;
  }

  std::vector<double> row_sums() const {
    std::vector<double> r(space_x.size(), 0.0);
    for (const auto& e : entries) r[e.i] += e.mass;
    return r;
  }

  std::vector<double> col_sums() const {
    std::vector<double> c(space_y.size(), 0.0);
    for (const auto& e : entries) c[e.j] += e.mass;
    return c;
  }

  double cost_against(const Matrix& cost) const {
    double t = 0.0;
    for (const auto& e : entries) t += e.mass * cost(e.i, e.j);
    return t;
  }
};

// Buy price f on X and sell price g on Y with g - f <= c everywhere and
// equality on the plan's support.
struct DualPair {
  ExtendedPotential f;
  ExtendedPotential g;
};

struct SolveResult {
  TransportPlan plan;
  double primal_value = 0.0;
  DualPair duals;
  double dual_value = 0.0;
};

namespace detail {

// Smallest denominator q <= q_max with |w - p/q| <= tol, via continued
// fractions; 0 when none exists.
inline std::int64_t rational_denominator(double w, std::int64_t q_max, double tol) {
  double frac = w;
  std::int64_t p_prev = 1, q_prev = 0;
  std::int64_t p_cur = static_cast<std::int64_t>(std::floor(frac)), q_cur = 1;
  double rem = frac - std::floor(frac);
  for (int iter = 0; iter < 64; ++iter) {
    if (std::abs(w - static_cast<double>(p_cur) / static_cast<double>(q_cur)) <= tol)
      return q_cur;
    if (rem <= 0.0) break;
    double inv = 1.0 / rem;
    double a_f = std::floor(inv);
    if (a_f > 9.0e18) break;
    std::int64_t a = static_cast<std::int64_t>(a_f);
    rem = inv - a_f;
    std::int64_t p_next = a * p_cur + p_prev;
    std::int64_t q_next = a * q_cur + q_prev;
    if (q_next > q_max || q_next <= 0) break;
    p_prev = p_cur;
    q_prev = q_cur;
    p_cur = p_next;
    q_cur = q_next;
  }
  return 0;
}

// Common denominator for both weight vectors, or 0 when none fits the cap.
inline std::int64_t common_denominator(const std::vector<double>& mu,
                                       const std::vector<double>& nu,
                                       std::int64_t cap) {
  std::int64_t d = 1;
  auto fold = [&](const std::vector<double>& ws) {
    for (double w : ws) {
      if (d == 0) return;
      std::int64_t q = rational_denominator(w, cap, 1e-11);
      if (q == 0) {
        d = 0;
        return;
      }
      std::int64_t g = std::gcd(d, q);
      if (d / g > cap / q) {
        d = 0;
        return;
      }
      d = d / g * q;
    }
  };
  fold(mu);
  fold(nu);
  return d;
}

struct QuantizedMasses {
  std::int64_t denom = 1;
  std::vector<std::int64_t> supply;
  std::vector<std::int64_t> demand;
  bool exact = false;  // true when the weights were recognized as rationals
};

// Convert the two weight vectors to integer numerators over a common
// denominator. Rational weights are represented exactly; otherwise masses
// are quantized at 2^-40, with the largest entry absorbing the rounding
// drift so that total supply equals total demand.
inline QuantizedMasses quantize(const std::vector<double>& mu,
                                const std::vector<double>& nu) {
  QuantizedMasses q;
  std::int64_t d = common_denominator(mu, nu, 10'000'000);
  q.exact = d != 0;
  q.denom = q.exact ? d : (std::int64_t{1} << 40);

  auto convert = [&](const std::vector<double>& ws) {
    std::vector<std::int64_t> out(ws.size());
    for (std::size_t k = 0; k < ws.size(); ++k)
      out[k] = std::llround(ws[k] * static_cast<double>(q.denom));
    return out;
  };
  q.supply = convert(mu);
  q.demand = convert(nu);

  std::int64_t s = std::accumulate(q.supply.begin(), q.supply.end(), std::int64_t{0});
  std::int64_t t = std::accumulate(q.demand.begin(), q.demand.end(), std::int64_t{0});
  if (s != t) {
    // Drift can only come from rounding non-rational weights; park the
    // difference on the largest entry of the lighter side.
    auto& side = (s < t) ? q.supply : q.demand;
    std::int64_t diff = std::abs(t - s);
    auto it = std::max_element(side.begin(), side.end());
    *it += diff;
  }
  return q;
}

}  // namespace detail

// Exact discrete Kantorovich solver: minimum-cost flow on the complete
// bipartite network by successive shortest augmenting paths with node
// potentials. Masses are integers over a common denominator, so mass
// bookkeeping is exact; costs and potentials are doubles. Path selection
// breaks ties toward lower indices, making the returned plan reproducible
// bit for bit.
inline SolveResult solve_kantorovich(const DiscreteMeasure& mu,
                                     const DiscreteMeasure& nu,
                                     const CouplingInstance& cost,
                                     const Tolerance& tol = {}) {
  const std::size_t n = cost.nx();
  const std::size_t m = cost.ny();
  if (mu.size() != n || nu.size() != m)
    throw Error(ErrorKind::SpaceMismatch, "measures do not match the cost spaces");
  double mu_total = std::accumulate(mu.weights().begin(), mu.weights().end(), 0.0);
  double nu_total = std::accumulate(nu.weights().begin(), nu.weights().end(), 0.0);
  if (std::abs(mu_total - nu_total) > tol.eps_feas)
    throw Error(ErrorKind::InfeasibleMarginals,
                "marginal totals differ beyond tolerance");

  auto masses = detail::quantize(mu.weights(), nu.weights());
  std::vector<std::int64_t> remaining_supply = masses.supply;
  std::vector<std::int64_t> remaining_demand = masses.demand;

  std::vector<char> src_active(n, 0), snk_active(m, 0);
  for (std::size_t i = 0; i < n; ++i) src_active[i] = masses.supply[i] > 0;
  for (std::size_t j = 0; j < m; ++j) snk_active[j] = masses.demand[j] > 0;

  // Node potentials. Initially no arc carries flow, so setting the sink
  // potential to the cheapest incoming cost makes every reduced cost
  // nonnegative.
  std::vector<double> pot_x(n, 0.0), pot_y(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    if (!snk_active[j]) continue;
    double best = kPlusInfinity;
    for (std::size_t i = 0; i < n; ++i)
      if (src_active[i]) best = std::min(best, cost.coupling(i, j));
    pot_y[j] = best;
  }

  std::vector<std::vector<std::int64_t>> flow(n, std::vector<std::int64_t>(m, 0));

  const double inf = kPlusInfinity;
  std::int64_t outstanding =
      std::accumulate(remaining_supply.begin(), remaining_supply.end(), std::int64_t{0});

  // Node ids: sources are 0..n-1, sinks are n..n+m-1.
  std::vector<double> dist(n + m);
  std::vector<std::size_t> parent(n + m);
  std::vector<char> done(n + m);

  while (outstanding > 0) {
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(parent.begin(), parent.end(), n + m);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < n; ++i)
      if (src_active[i] && remaining_supply[i] > 0) dist[i] = 0.0;

    // Array Dijkstra over the residual network with reduced costs.
    for (std::size_t iter = 0; iter < n + m; ++iter) {
      std::size_t u = n + m;
      double best = inf;
      for (std::size_t v = 0; v < n + m; ++v)
        if (!done[v] && dist[v] < best) {
          best = dist[v];
          u = v;
        }
      if (u == n + m) break;
      done[u] = 1;
      if (u < n) {
        std::size_t i = u;
        for (std::size_t j = 0; j < m; ++j) {
          if (!snk_active[j]) continue;
          double rc = cost.coupling(i, j) + pot_x[i] - pot_y[j];
          rc = std::max(rc, 0.0);
          if (dist[i] + rc < dist[n + j]) {
            dist[n + j] = dist[i] + rc;
            parent[n + j] = i;
          }
        }
      } else {
        std::size_t j = u - n;
        for (std::size_t i = 0; i < n; ++i) {
          if (!src_active[i] || flow[i][j] <= 0) continue;
          double rc = -cost.coupling(i, j) + pot_y[j] - pot_x[i];
          rc = std::max(rc, 0.0);
          if (dist[n + j] + rc < dist[i]) {
            dist[i] = dist[n + j] + rc;
            parent[i] = n + j;
          }
        }
      }
    }

    // Cheapest sink still in demand; lowest index on ties.
    std::size_t target = m;
    double best = inf;
    for (std::size_t j = 0; j < m; ++j)
      if (remaining_demand[j] > 0 && dist[n + j] < best) {
        best = dist[n + j];
        target = j;
      }
    if (target == m)
      throw Error(ErrorKind::ValidationError,
                  "transport network lost connectivity (internal failure)");

    // Walk the augmenting path backwards to find the bottleneck.
    std::int64_t bottleneck = remaining_demand[target];
    std::size_t node = n + target;
    while (true) {
      std::size_t par = parent[node];
      if (par == n + m) break;
      if (node >= n && par < n) {
        // forward arc par -> node adds flow; no capacity bound
      } else {
        // backward arc: node is a source fed by sink par
        bottleneck = std::min(bottleneck, flow[node][par - n]);
      }
      node = par;
    }
    bottleneck = std::min(bottleneck, remaining_supply[node]);
    std::size_t path_source = node;

    node = n + target;
    while (true) {
      std::size_t par = parent[node];
      if (par == n + m) break;
      if (node >= n && par < n)
        flow[par][node - n] += bottleneck;
      else
        flow[node][par - n] -= bottleneck;
      node = par;
    }
    remaining_supply[path_source] -= bottleneck;
    remaining_demand[target] -= bottleneck;
    outstanding -= bottleneck;

    double d_target = dist[n + target];
    for (std::size_t i = 0; i < n; ++i)
      if (dist[i] < inf) pot_x[i] += std::min(dist[i], d_target);
    for (std::size_t j = 0; j < m; ++j)
      if (dist[n + j] < inf) pot_y[j] += std::min(dist[n + j], d_target);
  }

  // Duals for zero-weight points are fixed by conjugation against the
  // active side, preserving g - f <= c everywhere.
  std::vector<double> f_vals(n), g_vals(m);
  for (std::size_t i = 0; i < n; ++i) f_vals[i] = pot_x[i];
  for (std::size_t j = 0; j < m; ++j) g_vals[j] = pot_y[j];
  for (std::size_t j = 0; j < m; ++j) {
    if (snk_active[j]) continue;
    double best = kPlusInfinity;
    for (std::size_t i = 0; i < n; ++i)
      if (src_active[i]) best = std::min(best, f_vals[i] + cost.coupling(i, j));
    g_vals[j] = best;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (src_active[i]) continue;
    double best = -kPlusInfinity;
    for (std::size_t j = 0; j < m; ++j)
      best = std::max(best, g_vals[j] - cost.coupling(i, j));
    f_vals[i] = best;
  }

  // Duals are unique up to a common shift; pin min f = 0.
  double shift = *std::min_element(f_vals.begin(), f_vals.end());
  for (double& v : f_vals) v -= shift;
  for (double& v : g_vals) v -= shift;

  SolveResult result;
  result.plan.space_x = cost.space_x;
  result.plan.space_y = cost.space_y;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (flow[i][j] > 0)
        result.plan.entries.push_back(
            {i, j,
             static_cast<double>(flow[i][j]) / static_cast<double>(masses.denom)});

  // With a small exact denominator, accumulate numerator * cost and divide
  // once, so instances with exact data produce bit-exact optima.
  if (masses.exact) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (flow[i][j] > 0)
          acc += static_cast<double>(flow[i][j]) * cost.coupling(i, j);
    result.primal_value = acc / static_cast<double>(masses.denom);
  } else {
    result.primal_value = result.plan.cost_against(cost.coupling);
  }

  result.duals.f = ExtendedPotential(cost.space_x, f_vals);
  result.duals.g = ExtendedPotential(cost.space_y, g_vals);
  double dual_total = 0.0;
  for (std::size_t j = 0; j < m; ++j) dual_total += g_vals[j] * nu[j];
  for (std::size_t i = 0; i < n; ++i) dual_total -= f_vals[i] * mu[i];
  result.dual_value = dual_total;

  if (std::abs(result.primal_value - result.dual_value) > tol.eps_feas)
    throw Error(ErrorKind::ValidationError,
                "solver produced a duality gap beyond tolerance (internal failure)");
  return result;
}

// All pairs carrying mass above the feasibility band.
inline Relation support(const TransportPlan& plan, const Tolerance& tol = {}) {
  std::vector<IndexPair> pairs;
  for (const auto& e : plan.entries)
    if (e.mass > tol.eps_feas) pairs.emplace_back(e.i, e.j);
  return Relation(std::move(pairs), plan.space_x.size(), plan.space_y.size());
}

// Optimality test via cyclic monotonicity of the support under the negated
// cost: on finite spaces a plan is optimal exactly when its support is
// monotone for -cost.
inline MonotoneVerdict verify_optimality(const TransportPlan& plan,
                                         const CouplingInstance& cost,
                                         const Tolerance& tol = {}) {
  return check_cyclic_monotone(support(plan, tol), cost.negated(), tol);
}

// Diagnostics of a primal/dual pair against the duality theorem.
struct DualityReport {
  double primal_value = 0.0;
  double dual_total = 0.0;  // sum g dnu - sum f dmu over the plan's marginals
  double gap = 0.0;
  std::size_t feasibility_violations = 0;  // pairs with g - f > c beyond slack
  double max_feasibility_excess = 0.0;
  std::size_t support_violations = 0;  // support pairs with g - f != c
  double max_support_gap = 0.0;
  std::optional<IndexPair> worst_feasibility_pair;
};

inline DualityReport check_duality(const SolveResult& result,
                                   const CouplingInstance& cost,
                                   const Tolerance& tol = {}) {
  DualityReport rep;
  const auto& f = result.duals.f;
  const auto& g = result.duals.g;
  rep.primal_value = result.plan.cost_against(cost.coupling);

  auto mu_w = result.plan.row_sums();
  auto nu_w = result.plan.col_sums();
  double total = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j)
    if (nu_w[j] > 0.0) total += g[j] * nu_w[j];
  for (std::size_t i = 0; i < f.size(); ++i)
    if (mu_w[i] > 0.0) total -= f[i] * mu_w[i];
  rep.dual_total = total;
  rep.gap = std::abs(rep.primal_value - rep.dual_total);

  for (std::size_t i = 0; i < cost.nx(); ++i) {
    if (!f.is_finite_at(i)) continue;
    for (std::size_t j = 0; j < cost.ny(); ++j) {
      if (!g.is_finite_at(j)) continue;
      double excess = g[j] - f[i] - cost.coupling(i, j);
      if (excess > tol.eps_feas) {
        ++rep.feasibility_violations;
        if (excess > rep.max_feasibility_excess) {
          rep.max_feasibility_excess = excess;
          rep.worst_feasibility_pair = IndexPair{i, j};
        }
      }
    }
  }

  for (const auto& e : result.plan.entries) {
    if (e.mass <= tol.eps_feas) continue;
    double d = std::abs(g[e.j] - f[e.i] - cost.coupling(e.i, e.j));
    if (d > tol.eps_eq) {
      ++rep.support_violations;
      rep.max_support_gap = std::max(rep.max_support_gap, d);
    }
  }
  return rep;
}

// Restriction of a plan to a pair set, renormalized to a probability plan.
struct RestrictedPlan {
  TransportPlan plan;        // renormalized sub-plan
  double zeta = 0.0;         // retained mass before renormalization
  DiscreteMeasure mu_prime;  // marginals of the renormalized plan
  DiscreteMeasure nu_prime;
};

inline RestrictedPlan restrict_plan(const TransportPlan& plan, const Relation& subset,
                                    const Tolerance& tol = {}) {
  std::vector<PlanEntry> kept;
  double zeta = 0.0;
  for (const auto& e : plan.entries)
    if (subset.contains(e.i, e.j)) {
      kept.push_back(e);
      zeta += e.mass;
    }
  if (zeta <= tol.eps_feas)
    throw Error(ErrorKind::EmptyRestriction,
                "restriction retains no mass within tolerance");
  for (auto& e : kept) e.mass /= zeta;

  RestrictedPlan out;
  out.plan = TransportPlan{plan.space_x, plan.space_y, std::move(kept)};
  out.zeta = zeta;
  out.mu_prime = DiscreteMeasure(plan.space_x, out.plan.row_sums(), tol);
  out.nu_prime = DiscreteMeasure(plan.space_y, out.plan.col_sums(), tol);
  return out;
}

}  // namespace otp
