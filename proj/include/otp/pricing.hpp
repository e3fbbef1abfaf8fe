#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "otp/antider.hpp"
#include "otp/core.hpp"
#include "otp/errors.hpp"
#include "otp/transport.hpp"

namespace otp {

// A solved transport instance together with the frozen sub-plan M and the
// frozen prices on S. The cost here is the transport cost; the pricing
// computations pass the negated coupling internally.
struct PricingProblem {
  CouplingInstance cost;
  SolveResult solve;
  ConstraintSet frozen;
};

// The corridor of compatible buy prices and the matching sell prices.
// alpha_dual and gamma_dual are the (-cost)-transforms of the respective
// envelopes; the sell price paired with a buy price h is -h-transform, and
// transforming swaps the roles of lowest and highest on the dual side.
struct PriceCorridor {
  ExtendedPotential alpha_price;  // lowest compatible buy price, on X
  ExtendedPotential gamma_price;  // highest compatible buy price, on X
  ExtendedPotential alpha_dual;   // transform of alpha_price, on Y
  ExtendedPotential gamma_dual;   // transform of gamma_price, on Y
  double width = 0.0;             // max over X of gamma - alpha

  // Support pairs of the original plan that the envelopes no longer price
  // tightly (only possible when M is a strict subset of the support).
  std::vector<IndexPair> alpha_unsupported;
  std::vector<IndexPair> gamma_unsupported;
};

// The restriction seed: f kept on dom(M), +inf elsewhere. Whenever f was an
// antiderivative of M, so is the seed, which is all the envelope
// construction needs.
inline ExtendedPotential seed_antiderivative(const FiniteSpace& space,
                                             const std::vector<double>& values,
                                             const std::vector<std::size_t>& dom) {
  if (dom.empty())
    throw Error(ErrorKind::ImproperFunction, "empty domain leaves no finite value");
  std::vector<double> out(space.size(), kPlusInfinity);
  for (std::size_t i : dom) {
    if (i >= space.size())
      throw Error(ErrorKind::ValidationError, "domain index out of range");
    out[i] = values.at(i);
  }
  return ExtendedPotential(space, std::move(out));
}

// Lowest and highest price functions compatible with the frozen sub-plan and
// the frozen prices, with their sell-side transforms.
inline PriceCorridor price_bounds(const PricingProblem& prob,
                                  const Tolerance& tol = {}) {
  Relation plan_support = support(prob.solve.plan, tol);
  if (!prob.frozen.rel.is_subset_of(plan_support))
    throw Error(ErrorKind::FrozenPairsNotInSupport,
                "frozen pairs must lie inside the support of the solved plan");

  CouplingInstance neg = prob.cost.negated();

  PriceCorridor corridor;
  corridor.alpha_price = alpha_envelope(neg, prob.frozen, tol);
  corridor.gamma_price = gamma_envelope(neg, prob.frozen, tol);
  corridor.alpha_dual = c_transform(corridor.alpha_price, neg);
  corridor.gamma_dual = c_transform(corridor.gamma_price, neg);

  double width = 0.0;
  for (std::size_t i = 0; i < neg.nx(); ++i)
    width = std::max(width, corridor.gamma_price[i] - corridor.alpha_price[i]);
  corridor.width = width;

  // When only part of the support was frozen, the rest of the plan need not
  // stay tight under the new prices; report the pairs that fall out.
  for (const auto& [i, j] : plan_support.pairs()) {
    if (prob.frozen.rel.contains(i, j)) continue;
    if (!in_subdifferential(corridor.alpha_price, corridor.alpha_dual, neg, i, j,
                            tol.eps_eq))
      corridor.alpha_unsupported.emplace_back(i, j);
    if (!in_subdifferential(corridor.gamma_price, corridor.gamma_dual, neg, i, j,
                            tol.eps_eq))
      corridor.gamma_unsupported.emplace_back(i, j);
  }
  return corridor;
}

// Diagnostics for a proposed buy price h against a pricing problem.
struct PricingReport {
  MembershipReport membership;    // against the family under -cost
  ExtendedPotential sell_price;   // g forced by tightness on the plan support
  std::size_t forcing_conflicts = 0;   // support pairs forcing conflicting g
  std::size_t feasibility_violations = 0;  // pairs with g - h > c beyond slack
  double max_feasibility_excess = 0.0;
  double total_difference = 0.0;  // sum g dnu - sum h dmu
  double primal_value = 0.0;
  bool attains_primal = false;
};

// The sell price is pinned by equality g(y) = h(x) + c(x,y) across the
// plan's support (the distributor keeps the transported pairs tight);
// targets carrying no plan mass fall back to the conjugate bound. For
// members of the family the two rules coincide.
inline PricingReport validate_pricing(const ExtendedPotential& h,
                                      const PricingProblem& prob,
                                      const Tolerance& tol = {}) {
  const CouplingInstance& cost = prob.cost;
  CouplingInstance neg = cost.negated();

  PricingReport rep{.membership = is_member(h, neg, prob.frozen, tol),
                    .sell_price = ExtendedPotential()};

  std::vector<double> g(cost.ny(), kPlusInfinity);
  std::vector<char> forced(cost.ny(), 0);
  for (const auto& e : prob.solve.plan.entries) {
    if (e.mass <= tol.eps_feas || !h.is_finite_at(e.i)) continue;
    double v = h[e.i] + cost.coupling(e.i, e.j);
    if (forced[e.j]) {
      if (std::abs(g[e.j] - v) > tol.eps_eq) ++rep.forcing_conflicts;
    } else {
      g[e.j] = v;
      forced[e.j] = 1;
    }
  }
  ExtendedPotential conj = c_transform(h, neg);  // h^{-c}
  for (std::size_t j = 0; j < cost.ny(); ++j)
    if (!forced[j]) g[j] = -conj[j];
  rep.sell_price = ExtendedPotential(cost.space_y, std::move(g));

  for (std::size_t i = 0; i < cost.nx(); ++i) {
    if (!h.is_finite_at(i)) continue;
    for (std::size_t j = 0; j < cost.ny(); ++j) {
      double excess = rep.sell_price[j] - h[i] - cost.coupling(i, j);
      if (excess > tol.eps_feas) {
        ++rep.feasibility_violations;
        rep.max_feasibility_excess = std::max(rep.max_feasibility_excess, excess);
      }
    }
  }

  rep.primal_value = prob.solve.plan.cost_against(cost.coupling);
  auto mu_w = prob.solve.plan.row_sums();
  auto nu_w = prob.solve.plan.col_sums();
  double total = 0.0;
  for (std::size_t j = 0; j < cost.ny(); ++j)
    if (nu_w[j] > 0.0) total += rep.sell_price[j] * nu_w[j];
  for (std::size_t i = 0; i < cost.nx(); ++i)
    if (mu_w[i] > 0.0) total -= h[i] * mu_w[i];
  rep.total_difference = total;
  rep.attains_primal = std::abs(total - rep.primal_value) <= tol.eps_feas;
  return rep;
}

}  // namespace otp
