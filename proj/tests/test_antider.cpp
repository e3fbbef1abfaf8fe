#include <catch2/catch_amalgamated.hpp>

#include "otp/otp.hpp"
#include "testutil.hpp"

using namespace otp;

namespace {

// Product coupling on the labeled integers {0, 1, 2}.
CouplingInstance integer_product() {
  FiniteSpace s({"0", "1", "2"});
  Matrix c(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c(i, j) = static_cast<double>(i * j);
  return CouplingInstance(s, s, std::move(c));
}

ExtendedPotential convexified_midpoint(const ExtendedPotential& a,
                                       const ExtendedPotential& b,
                                       const CouplingInstance& inst) {
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = 0.5 * (a[i] + b[i]);
  return c_convexify(ExtendedPotential(a.space(), std::move(v)), inst);
}

}  // namespace

TEST_CASE("rockafellar: base-point normalization and the two-pair hand case") {
  auto inst = integer_product();
  Relation rel({{0, 0}, {1, 1}}, 3, 3);
  auto r = rockafellar(inst, rel, 0);
  CHECK(r[0] == 0.0);  // exactly, not within tolerance
  CHECK(r[1] == 0.0);  // max(0, x-1) at x=1
  CHECK(r[2] == 1.0);  // max(0, x-1) at x=2

  CHECK_THROWS_AS(rockafellar(inst, rel, 2), Error);  // 2 not in dom(M)
}

TEST_CASE("rockafellar on the two-segment instance") {
  auto ts = testutil::make_two_segment(3);  // grid -1.5 -1.25 -1 | 1 1.25 1.5
  CouplingInstance neg = ts.cost.negated();
  Relation m = c_subdifferential(ts.abs_potential(), neg);
  REQUIRE(m.size() == 6);

  auto r = rockafellar(neg, m, 3);  // s = leftmost right point, x = 1
  CHECK(r[3] == 0.0);
  CHECK(r[1] == Catch::Approx(-1.75).margin(1e-12));  // x = -1.25

  // Oracle: exhaustive chain enumeration agrees everywhere.
  std::vector<double> seeds(m.size(), -kPlusInfinity);
  for (std::size_t p = 0; p < m.size(); ++p)
    if (m.pairs()[p].first == 3) seeds[p] = 0.0;
  for (std::size_t x = 0; x < ts.xs.size(); ++x)
    CHECK(r[x] ==
          Catch::Approx(testutil::oracle_chain_sup(neg, m, seeds, x)).margin(1e-9));
}

TEST_CASE("rockafellar refuses relations with violating cycles") {
  FiniteSpace s({"1", "2"});
  Matrix c(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) c(i, j) = (i + 1.0) * (j + 1.0);
  CouplingInstance inst(s, s, std::move(c));
  Relation rel({{0, 1}, {1, 0}}, 2, 2);
  try {
    rockafellar(inst, rel, 0);
    FAIL("expected MonotoneError");
  } catch (const MonotoneError& e) {
    CHECK(e.kind() == ErrorKind::NotCyclicallyMonotone);
    CHECK(e.witness().cycle_sum < -1e-9);
    CHECK(cycle_weight(e.witness().cycle, inst) ==
          Catch::Approx(e.witness().cycle_sum).margin(1e-12));
  }
}

TEST_CASE("lower envelope: two-segment values and the seeded hand case") {
  auto ts = testutil::make_two_segment(3);
  CouplingInstance neg = ts.cost.negated();
  Relation m = c_subdifferential(ts.abs_potential(), neg);
  auto s_idx = ts.right_indices();
  std::vector<double> f_s;
  for (std::size_t i : s_idx) f_s.push_back(ts.xs[i]);
  ConstraintSet cons(m, s_idx, f_s);

  auto alpha = alpha_envelope(neg, cons);
  for (std::size_t i = 0; i < 3; ++i)  // left segment: -x - 2
    CHECK(alpha[i] == Catch::Approx(-ts.xs[i] - 2.0).margin(1e-12));
  CHECK(alpha[1] == Catch::Approx(-0.75).margin(1e-12));
  for (std::size_t k = 0; k < s_idx.size(); ++k)  // alpha attains f on S
    CHECK(alpha[s_idx[k]] == Catch::Approx(f_s[k]).margin(1e-12));

  auto inst = integer_product();
  Relation rel({{0, 0}, {1, 1}}, 3, 3);
  ConstraintSet single(rel, {0}, {0.0});
  auto a2 = alpha_envelope(inst, single);
  CHECK(a2[2] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("lower envelope rejects inconsistent fixed values") {
  auto inst = integer_product();
  Relation rel({{0, 0}, {1, 1}}, 3, 3);
  // f = (0 at 0, 5 at 1) is not an antiderivative of the mapping on S.
  ConstraintSet cons(rel, {0, 1}, {0.0, 5.0});
  CHECK_THROWS_AS(alpha_envelope(inst, cons), Error);
  try {
    alpha_envelope(inst, cons);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InconsistentConstraints);
  }
}

TEST_CASE("upper envelope: two-segment values via the conjugation route") {
  auto ts = testutil::make_two_segment(3);
  CouplingInstance neg = ts.cost.negated();
  Relation m = c_subdifferential(ts.abs_potential(), neg);
  auto s_idx = ts.right_indices();
  std::vector<double> f_s;
  for (std::size_t i : s_idx) f_s.push_back(ts.xs[i]);
  ConstraintSet cons(m, s_idx, f_s);

  auto gamma = gamma_envelope(neg, cons);
  for (std::size_t i = 0; i < 3; ++i)  // left segment: -x + 2
    CHECK(gamma[i] == Catch::Approx(-ts.xs[i] + 2.0).margin(1e-12));
  CHECK(gamma[1] == Catch::Approx(3.25).margin(1e-12));
  for (std::size_t k = 0; k < s_idx.size(); ++k)
    CHECK(gamma[s_idx[k]] == Catch::Approx(f_s[k]).margin(1e-12));
}

TEST_CASE("upper envelope under a negated metric is the nearest-value form") {
  // d = |.| on {0,1,2}, identity mapping on S = {0,2}, f = (0, ., 1).
  FiniteSpace s({"0", "1", "2"});
  Matrix nd(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) nd(i, j) = -std::abs(i - j);
  CouplingInstance neg(s, s, std::move(nd));
  ConstraintSet cons(Relation({{0, 0}, {2, 2}}, 3, 3), {0, 2}, {0.0, 1.0});

  auto gamma = gamma_envelope(neg, cons);
  CHECK(gamma[0] == Catch::Approx(0.0).margin(1e-12));
  CHECK(gamma[1] == Catch::Approx(1.0).margin(1e-12));  // min(0+1, 1+1)
  CHECK(gamma[2] == Catch::Approx(1.0).margin(1e-12));

  auto alpha = alpha_envelope(neg, cons);
  CHECK(alpha[1] == Catch::Approx(0.0).margin(1e-12));  // max(0-1, 1-1)
}

TEST_CASE("conflicting forced dual values raise DualInconsistent") {
  FiniteSpace x({"a", "b"}), y({"t"});
  CouplingInstance inst(x, y, Matrix(2, 1, 0.0));
  ConstraintSet cons(Relation({{0, 0}, {1, 0}}, 2, 1), {0, 1}, {0.0, 1.0});
  try {
    gamma_envelope(inst, cons);
    FAIL("expected DualInconsistent");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DualInconsistent);
  }
}

TEST_CASE("closed forms: single pair, right-segment mapping, convex fixed point") {
  testutil::Rng rng(4242);

  // One graph pair: alpha(x) = f(s) + c(x,t) - c(s,t).
  for (int rep = 0; rep < 10; ++rep) {
    auto inst = testutil::random_instance(rng, 5, 4);
    ConstraintSet cons(Relation({{2, 1}}, 5, 4), {2}, {0.75});
    auto a = alpha_fulldomain(inst, cons);
    for (std::size_t xi = 0; xi < 5; ++xi)
      CHECK(a[xi] == Catch::Approx(0.75 + inst.coupling(xi, 1) -
                                   inst.coupling(2, 1))
                         .margin(1e-12));
  }

  // Two-segment instance, mapping = right pairs only, S = dom(M): the upper
  // closed form is the p = 2 family member; the lower one is x itself.
  auto ts = testutil::make_two_segment(3);
  CouplingInstance neg = ts.cost.negated();
  std::vector<IndexPair> right_pairs;
  for (std::size_t i = 3; i < 6; ++i) right_pairs.emplace_back(i, 0);
  std::vector<double> f_s = {1.0, 1.25, 1.5};
  ConstraintSet cons(Relation(right_pairs, 6, 2), {3, 4, 5}, f_s);
  auto gamma = gamma_fulldomain(neg, cons);
  auto alpha = alpha_fulldomain(neg, cons);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(gamma[i] == Catch::Approx(-ts.xs[i] + 2.0).margin(1e-12));
    CHECK(alpha[i] == Catch::Approx(ts.xs[i]).margin(1e-12));
  }
  for (std::size_t i = 3; i < 6; ++i) {
    CHECK(gamma[i] == Catch::Approx(ts.xs[i]).margin(1e-12));
    CHECK(alpha[i] == Catch::Approx(ts.xs[i]).margin(1e-12));
  }

  // dom(M) = X with c-convex f: the upper closed form returns f.
  for (int rep = 0; rep < 10; ++rep) {
    auto inst = testutil::random_instance(rng, 5, 5);
    auto f = c_convexify(testutil::random_potential(rng, inst.space_x, 2.0, 0.0), inst);
    auto sub = c_subdifferential(f, inst);
    std::vector<IndexPair> cover;
    for (std::size_t i = 0; i < 5; ++i)
      for (const auto& p : sub.pairs())
        if (p.first == i) {
          cover.push_back(p);
          break;
        }
    REQUIRE(cover.size() == 5);
    std::vector<std::size_t> s_all = {0, 1, 2, 3, 4};
    std::vector<double> vals(f.values());
    ConstraintSet full(Relation(cover, 5, 5), s_all, vals);
    CHECK(gamma_fulldomain(inst, full).approx_equal(f, 1e-9));
  }
}

TEST_CASE("closed forms require S = dom(M)") {
  auto inst = integer_product();
  ConstraintSet cons(Relation({{0, 0}, {1, 1}}, 3, 3), {0}, {0.0});
  CHECK_THROWS_AS(alpha_fulldomain(inst, cons), Error);
  CHECK_THROWS_AS(gamma_fulldomain(inst, cons), Error);
}

TEST_CASE("chain route equals closed forms whenever S covers the domain") {
  testutil::Rng rng(1618);
  for (int rep = 0; rep < 40; ++rep) {
    auto vc = testutil::random_valid_constraint(rng, 7);
    // Extend the fixed data to all of dom(M).
    auto dom = vc.cons.rel.domain();
    std::vector<double> vals;
    for (std::size_t i : dom) vals.push_back(vc.f[i]);
    ConstraintSet full(vc.cons.rel, dom, vals);

    CHECK(alpha_envelope(vc.inst, full)
              .approx_equal(alpha_fulldomain(vc.inst, full), 1e-9));
    CHECK(gamma_envelope(vc.inst, full)
              .approx_equal(gamma_fulldomain(vc.inst, full), 1e-9));
  }
}

TEST_CASE("conjugation swaps the envelopes of the dual family") {
  testutil::Rng rng(121212);
  for (int rep = 0; rep < 40; ++rep) {
    auto vc = testutil::random_valid_constraint(rng, 8);
    auto [dual_inst, dual_cons] = dual_constraints(vc.inst, vc.cons);

    auto alpha = alpha_envelope(vc.inst, vc.cons);
    auto gamma = gamma_envelope(vc.inst, vc.cons);
    CHECK(c_transform(alpha, vc.inst)
              .approx_equal(gamma_envelope(dual_inst, dual_cons), 1e-8));
    CHECK(c_transform(gamma, vc.inst)
              .approx_equal(alpha_envelope(dual_inst, dual_cons), 1e-8));
  }
}

TEST_CASE("membership transfers to the conjugate family and back") {
  testutil::Rng rng(77);
  for (int rep = 0; rep < 30; ++rep) {
    auto vc = testutil::random_valid_constraint(rng, 6);
    auto [dual_inst, dual_cons] = dual_constraints(vc.inst, vc.cons);

    auto alpha = alpha_envelope(vc.inst, vc.cons);
    auto gamma = gamma_envelope(vc.inst, vc.cons);
    for (const auto& h : {vc.f, alpha, gamma,
                          convexified_midpoint(alpha, gamma, vc.inst)}) {
      CHECK(is_member(h, vc.inst, vc.cons).member);
      CHECK(is_member(c_transform(h, vc.inst), dual_inst, dual_cons).member);
    }

    // A constant shift breaks the fixed values on both sides.
    std::vector<double> off(vc.f.values());
    for (double& v : off)
      if (std::isfinite(v)) v -= 1.0;
    ExtendedPotential shifted(vc.inst.space_x, std::move(off));
    CHECK_FALSE(is_member(shifted, vc.inst, vc.cons).member);
    CHECK_FALSE(
        is_member(c_transform(shifted, vc.inst), dual_inst, dual_cons).member);
  }
}

TEST_CASE("envelopes sandwich every member") {
  testutil::Rng rng(9001);
  for (int rep = 0; rep < 40; ++rep) {
    auto vc = testutil::random_valid_constraint(rng, 8);
    auto alpha = alpha_envelope(vc.inst, vc.cons);
    auto gamma = gamma_envelope(vc.inst, vc.cons);

    CHECK(is_member(alpha, vc.inst, vc.cons).member);
    CHECK(is_member(gamma, vc.inst, vc.cons).member);

    auto mid = convexified_midpoint(alpha, gamma, vc.inst);
    CHECK(is_member(mid, vc.inst, vc.cons).member);

    for (std::size_t i = 0; i < vc.inst.nx(); ++i) {
      CHECK(alpha[i] <= gamma[i] + 1e-9);
      if (vc.f.is_finite_at(i)) {
        CHECK(alpha[i] <= vc.f[i] + 1e-9);
        CHECK(vc.f[i] <= gamma[i] + 1e-9);
      }
      CHECK(alpha[i] <= mid[i] + 1e-9);
      CHECK(mid[i] <= gamma[i] + 1e-9);
    }
  }
}

TEST_CASE("rockafellar output is c-convex and absorbs the relation") {
  testutil::Rng rng(246810);
  for (int rep = 0; rep < 25; ++rep) {
    auto vc = testutil::random_valid_constraint(rng, 6);
    std::size_t s = vc.cons.rel.domain().front();
    auto r = rockafellar(vc.inst, vc.cons.rel, s);
    CHECK(r[s] == 0.0);
    CHECK(is_c_convex(r, vc.inst));
    CHECK(vc.cons.rel.is_subset_of(c_subdifferential(r, vc.inst)));
  }
}

TEST_CASE("the upper envelope pins values on the saturated preimage of M(S)") {
  // Two sources share one target; fixing a price at one source forces the
  // other through the dual route, even though it is not in S.
  FiniteSpace x({"a", "b"}), y({"t"});
  CouplingInstance inst(x, y, Matrix(2, 1, 0.0));
  ConstraintSet cons(Relation({{0, 0}, {1, 0}}, 2, 1), {0}, {0.7});
  auto gamma = gamma_envelope(inst, cons);
  auto alpha = alpha_envelope(inst, cons);
  CHECK(gamma[1] == Catch::Approx(0.7).margin(1e-12));
  CHECK(alpha[1] == Catch::Approx(0.7).margin(1e-12));
  CHECK(is_member(gamma, inst, cons).member);
}

TEST_CASE("membership diagnosis on the two-segment family") {
  auto ts = testutil::make_two_segment(3);
  CouplingInstance neg = ts.cost.negated();
  Relation m = c_subdifferential(ts.abs_potential(), neg);
  auto s_idx = ts.right_indices();
  std::vector<double> f_s;
  for (std::size_t i : s_idx) f_s.push_back(ts.xs[i]);
  ConstraintSet cons(m, s_idx, f_s);

  auto inside = is_member(ts.member(0.0), neg, cons);
  CHECK(inside.member);
  CHECK(inside.failed_clause == 0);

  auto outside = is_member(ts.member(3.0), neg, cons);
  CHECK_FALSE(outside.member);
  CHECK(outside.failed_clause == 2);
  CHECK(outside.missing_pair.has_value());

  auto alpha = alpha_envelope(neg, cons);
  CHECK(is_member(alpha, neg, cons).member);
}

TEST_CASE("with S = dom(M), membership is exactly the envelope sandwich") {
  testutil::Rng rng(5151);
  for (int rep = 0; rep < 25; ++rep) {
    auto vc = testutil::random_valid_constraint(rng, 6);
    auto dom = vc.cons.rel.domain();
    std::vector<double> vals;
    for (std::size_t i : dom) vals.push_back(vc.f[i]);
    ConstraintSet full(vc.cons.rel, dom, vals);
    auto alpha = alpha_envelope(vc.inst, full);
    auto gamma = gamma_envelope(vc.inst, full);

    // Inward: convexifying anything clamped into the corridor lands a member.
    auto g = testutil::random_potential(rng, vc.inst.space_x, 2.0, 0.0);
    std::vector<double> clamped(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      clamped[i] = std::min(gamma[i], std::max(alpha[i], g[i]));
    auto h = c_convexify(ExtendedPotential(vc.inst.space_x, std::move(clamped)),
                         vc.inst);
    for (std::size_t i = 0; i < h.size(); ++i) {
      CHECK(h[i] >= alpha[i] - 1e-9);
      CHECK(h[i] <= gamma[i] + 1e-9);
    }
    CHECK(is_member(h, vc.inst, full).member);

    // Outward: a c-convex function escaping the corridor is no member.
    std::vector<double> above(gamma.values());
    for (double& v : above)
      if (std::isfinite(v)) v += 0.5;
    CHECK_FALSE(is_member(ExtendedPotential(vc.inst.space_x, std::move(above)),
                          vc.inst, full)
                    .member);
    std::vector<double> below(alpha.values());
    for (double& v : below)
      if (std::isfinite(v)) v -= 0.5;
    CHECK_FALSE(is_member(ExtendedPotential(vc.inst.space_x, std::move(below)),
                          vc.inst, full)
                    .member);
  }
}

TEST_CASE("an antiderivative with shifted values fails exactly the value clause") {
  testutil::Rng rng(8642);
  auto vc = testutil::random_valid_constraint(rng, 6);
  // Adding a constant preserves c-convexity and the subdifferential but moves
  // the values off f|_S.
  std::vector<double> up(vc.f.values());
  for (double& v : up)
    if (std::isfinite(v)) v += 1.0;
  auto rep = is_member(ExtendedPotential(vc.inst.space_x, std::move(up)), vc.inst,
                       vc.cons);
  CHECK_FALSE(rep.member);
  CHECK(rep.clause_c_convex);
  CHECK(rep.clause_antiderivative);
  CHECK_FALSE(rep.clause_fixed_values);
  CHECK(rep.failed_clause == 3);
  CHECK(rep.mismatch_index.has_value());
}

TEST_CASE("a non-convex seed antiderivative fails exactly the convexity clause") {
  auto inst = integer_product();
  Relation rel({{0, 0}, {1, 1}}, 3, 3);
  ConstraintSet cons(rel, {0}, {0.0});
  // f = 0 on dom(M) = {0,1}, +inf at 2: an antiderivative, but not c-convex.
  ExtendedPotential seed(inst.space_x, {0.0, 0.0, kPlusInfinity});
  auto rep = is_member(seed, inst, cons);
  CHECK_FALSE(rep.member);
  CHECK(rep.clause_antiderivative);
  CHECK(rep.clause_fixed_values);
  CHECK_FALSE(rep.clause_c_convex);
  CHECK(rep.failed_clause == 1);
}
