#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "otp/antider.hpp"
#include "otp/errors.hpp"
#include "otp/metric.hpp"
#include "otp/monotone.hpp"
#include "otp/pricing.hpp"
#include "otp/problem.hpp"
#include "otp/report.hpp"
#include "otp/transport.hpp"

namespace otp {

struct RunOptions {
  Tolerance tol;
  std::optional<std::string> csv_path;
  bool witness = false;
  bool quiet = false;
};

struct RunResult {
  int exit_code = 0;  // 0 ok, 1 validation error, 2 mathematical error
  std::string report;
};

namespace detail {

inline void describe_witness(Report& rep, const MonotoneWitness& w,
                             const FiniteSpace& sx, const FiniteSpace& sy,
                             bool include_cycle) {
  rep.kv("witness cycle sum", w.cycle_sum);
  rep.kv("witness cycle length", w.cycle.size());
  if (include_cycle)
    for (const auto& [i, j] : w.cycle)
      rep.row({"  pair", sx.label(i), sy.label(j)});
}

inline void describe_plan(Report& rep, const TransportPlan& plan) {
  rep.section("plan");
  for (const auto& e : plan.entries)
    rep.row({plan.space_x.label(e.i), "->", plan.space_y.label(e.j),
             format_value(e.mass)});
}

inline ConstraintSet frozen_constraints(const ProblemFile& pf,
                                        const Relation& plan_support) {
  Relation m = pf.frozen_from_support
                   ? plan_support
                   : Relation(pf.frozen_pairs.value_or(std::vector<IndexPair>{}),
                              pf.space_x.size(), pf.space_y.size());
  if (m.empty())
    throw Error(ErrorKind::ValidationError,
                "pricing needs frozen_pairs (explicit or 'support')");
  if (pf.fixed_prices.empty())
    throw Error(ErrorKind::ValidationError, "pricing needs fixed_prices");
  std::vector<std::size_t> s;
  std::vector<double> v;
  for (const auto& [i, price] : pf.fixed_prices) {
    s.push_back(i);
    v.push_back(price);
  }
  return ConstraintSet(std::move(m), std::move(s), std::move(v));
}

inline RunResult run_solve(const ProblemFile& pf, const RunOptions& opt,
                           bool duals_only) {
  auto cost = problem_cost(pf);
  auto result = solve_kantorovich(problem_mu(pf, opt.tol), problem_nu(pf, opt.tol),
                                  cost, opt.tol);
  Report rep;
  rep.section(duals_only ? "duals" : "solve");
  rep.kv("points x", cost.nx());
  rep.kv("points y", cost.ny());
  rep.kv("primal value", result.primal_value);
  rep.kv("dual value", result.dual_value);
  rep.kv("duality gap", std::abs(result.primal_value - result.dual_value));
  if (duals_only) {
    rep.section("buy price f");
    for (std::size_t i = 0; i < cost.nx(); ++i)
      rep.row({cost.space_x.label(i), format_value(result.duals.f[i])});
    rep.section("sell price g");
    for (std::size_t j = 0; j < cost.ny(); ++j)
      rep.row({cost.space_y.label(j), format_value(result.duals.g[j])});
  } else {
    rep.kv("plan entries", result.plan.entries.size());
    if (!opt.quiet) describe_plan(rep, result.plan);
  }
  return {0, rep.str()};
}

inline RunResult run_check_monotone(const ProblemFile& pf, const RunOptions& opt) {
  auto cost = problem_cost(pf);
  Report rep;
  MonotoneVerdict verdict;
  if (pf.frozen_pairs && !pf.frozen_from_support) {
    // Explicit pairs are checked against the coupling exactly as given.
    Relation rel(*pf.frozen_pairs, cost.nx(), cost.ny());
    verdict = check_cyclic_monotone(rel, cost, opt.tol);
    rep.section("check-monotone");
    rep.kv("pairs", rel.size());
    rep.kv("coupling", std::string("as given"));
  } else {
    // No explicit relation: solve and test the optimal support under -cost.
    auto result = solve_kantorovich(problem_mu(pf, opt.tol), problem_nu(pf, opt.tol),
                                    cost, opt.tol);
    Relation rel = support(result.plan, opt.tol);
    verdict = check_cyclic_monotone(rel, cost.negated(), opt.tol);
    rep.section("check-monotone");
    rep.kv("pairs", rel.size());
    rep.kv("coupling", std::string("negated cost (plan support)"));
  }
  rep.kv("cyclically monotone", std::string(verdict.is_monotone ? "yes" : "no"));
  if (!verdict.is_monotone)
    describe_witness(rep, *verdict.witness, pf.space_x, pf.space_y, opt.witness);
  return {verdict.is_monotone ? 0 : 2, rep.str()};
}

inline RunResult run_price_bounds(const ProblemFile& pf, const RunOptions& opt) {
  auto cost = problem_cost(pf);
  auto result = solve_kantorovich(problem_mu(pf, opt.tol), problem_nu(pf, opt.tol),
                                  cost, opt.tol);
  Relation plan_support = support(result.plan, opt.tol);
  ConstraintSet frozen = frozen_constraints(pf, plan_support);

  PricingProblem prob{cost, result, frozen};
  PriceCorridor corridor = price_bounds(prob, opt.tol);

  Report rep;
  rep.section("price-bounds");
  rep.kv("primal value", result.primal_value);
  rep.kv("frozen pairs", frozen.rel.size());
  rep.kv("fixed prices", frozen.fixed_set.size());
  rep.kv("corridor width", corridor.width);
  rep.kv("support pairs outside lowest-price subdifferential",
         corridor.alpha_unsupported.size());
  rep.kv("support pairs outside highest-price subdifferential",
         corridor.gamma_unsupported.size());
  if (!opt.quiet) {
    rep.section("buy price corridor");
    rep.row({"label", "alpha", "gamma", "fixed"});
    for (std::size_t i = 0; i < cost.nx(); ++i)
      rep.row({cost.space_x.label(i), format_value(corridor.alpha_price[i]),
               format_value(corridor.gamma_price[i]),
               frozen.is_fixed(i) ? "1" : "0"});
    rep.section("sell price transforms");
    rep.row({"label", "alpha_dual", "gamma_dual"});
    for (std::size_t j = 0; j < cost.ny(); ++j)
      rep.row({cost.space_y.label(j), format_value(corridor.alpha_dual[j]),
               format_value(corridor.gamma_dual[j])});
  }
  if (opt.witness) {
    for (const auto& [i, j] : corridor.alpha_unsupported)
      rep.row({"alpha loses", cost.space_x.label(i), cost.space_y.label(j)});
    for (const auto& [i, j] : corridor.gamma_unsupported)
      rep.row({"gamma loses", cost.space_x.label(i), cost.space_y.label(j)});
  }

  if (opt.csv_path) {
    std::vector<char> fixed(cost.nx(), 0);
    for (std::size_t i = 0; i < cost.nx(); ++i) fixed[i] = frozen.is_fixed(i);
    write_corridor_csv(*opt.csv_path, cost.space_x.labels(), corridor.alpha_price,
                       corridor.gamma_price, fixed);
  }
  return {0, rep.str()};
}

inline RunResult run_lipschitz_extend(const ProblemFile& pf, const RunOptions& opt) {
  FiniteMetric metric = problem_metric(pf, opt.tol);
  if (pf.fixed_prices.empty())
    throw Error(ErrorKind::ValidationError, "lipschitz-extend needs fixed_prices");
  if (pf.frozen_from_support)
    throw Error(ErrorKind::ValidationError,
                "'frozen_pairs support' needs a transport plan; give explicit pairs");

  std::vector<std::size_t> s;
  std::vector<double> v;
  for (const auto& [i, price] : pf.fixed_prices) {
    s.push_back(i);
    v.push_back(price);
  }
  Relation m = pf.frozen_pairs
                   ? Relation(*pf.frozen_pairs, metric.size(), metric.size())
                   : Relation::identity_on(s, metric.size());
  ConstraintSet cons(std::move(m), s, v);

  EnvelopePair env = constrained_lipschitz(cons, metric, opt.tol);

  Report rep;
  rep.section("lipschitz-extend");
  rep.kv("points", metric.size());
  rep.kv("frozen pairs", cons.rel.size());
  rep.kv("fixed values", cons.fixed_set.size());
  double width = 0.0;
  for (std::size_t i = 0; i < metric.size(); ++i)
    width = std::max(width, env.gamma[i] - env.alpha[i]);
  rep.kv("envelope width", width);
  if (!opt.quiet) {
    rep.section("extensions");
    rep.row({"label", "alpha", "gamma", "fixed"});
    for (std::size_t i = 0; i < metric.size(); ++i)
      rep.row({metric.space.label(i), format_value(env.alpha[i]),
               format_value(env.gamma[i]), cons.is_fixed(i) ? "1" : "0"});
  }
  if (opt.csv_path) {
    std::vector<char> fixed(metric.size(), 0);
    for (std::size_t i = 0; i < metric.size(); ++i) fixed[i] = cons.is_fixed(i);
    write_corridor_csv(*opt.csv_path, metric.space.labels(), env.alpha, env.gamma,
                       fixed);
  }
  return {0, rep.str()};
}

inline RunResult run_verify(const ProblemFile& pf, const RunOptions& opt) {
  auto cost = problem_cost(pf);
  auto result = solve_kantorovich(problem_mu(pf, opt.tol), problem_nu(pf, opt.tol),
                                  cost, opt.tol);
  DualityReport duality = check_duality(result, cost, opt.tol);
  MonotoneVerdict verdict = verify_optimality(result.plan, cost, opt.tol);

  Report rep;
  rep.section("verify");
  rep.kv("primal value", duality.primal_value);
  rep.kv("dual total", duality.dual_total);
  rep.kv("duality gap", duality.gap);
  rep.kv("feasibility violations", duality.feasibility_violations);
  rep.kv("support equality violations", duality.support_violations);
  rep.kv("support cyclically monotone",
         std::string(verdict.is_monotone ? "yes" : "no"));
  if (!verdict.is_monotone)
    describe_witness(rep, *verdict.witness, pf.space_x, pf.space_y, opt.witness);

  bool ok = verdict.is_monotone && duality.gap <= opt.tol.eps_feas &&
            duality.feasibility_violations == 0;
  return {ok ? 0 : 2, rep.str()};
}

}  // namespace detail

// Dispatch a command against a parsed problem. Exit code 0 on success, 1 on
// validation errors, 2 on mathematical failures (including a negative
// monotonicity verdict from check-monotone).
inline RunResult run_command(const std::string& command, const ProblemFile& pf,
                             const RunOptions& opt = {}) {
  try {
    opt.tol.validate();
    if (command == "solve") return detail::run_solve(pf, opt, false);
    if (command == "duals") return detail::run_solve(pf, opt, true);
    if (command == "check-monotone") return detail::run_check_monotone(pf, opt);
    if (command == "price-bounds") return detail::run_price_bounds(pf, opt);
    if (command == "lipschitz-extend") return detail::run_lipschitz_extend(pf, opt);
    if (command == "verify") return detail::run_verify(pf, opt);
    return {1, "error: unknown command '" + command + "'\n"};
  } catch (const Error& e) {
    Report rep;
    rep.kv("error", std::string(e.what()));
    return {is_mathematical_error(e.kind()) ? 2 : 1, rep.str()};
  }
}

}  // namespace otp
