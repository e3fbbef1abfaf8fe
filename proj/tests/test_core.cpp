#include <catch2/catch_amalgamated.hpp>

#include "otp/otp.hpp"
#include "testutil.hpp"

using namespace otp;

namespace {

ExtendedPotential shifted(const ExtendedPotential& f, double c) {
  std::vector<double> v = f.values();
  for (double& x : v)
    if (std::isfinite(x)) x += c;
  return ExtendedPotential(f.space(), std::move(v));
}

}  // namespace

TEST_CASE("c-transform of an indicator is the coupling slice") {
  FiniteSpace X({"a", "b", "c"}), Y({"u", "v"});
  CouplingInstance inst(X, Y, Matrix{{1, -2}, {0.5, 3}, {-1, 0}});
  for (std::size_t x0 = 0; x0 < 3; ++x0) {
    auto fc = c_transform(ExtendedPotential::spike(X, x0), inst);
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(fc[j] == inst.coupling(x0, j));
  }
}

TEST_CASE("c-transform matches the two-segment dual values at p = 0") {
  auto ts = testutil::make_two_segment(50);
  CouplingInstance neg = ts.cost.negated();
  auto fc = c_transform(ts.abs_potential(), neg);
  CHECK(std::abs(fc[0]) <= 1e-12);  // y = -1
  CHECK(std::abs(fc[1]) <= 1e-12);  // y = 1
}

TEST_CASE("c-transform hand case on a 2x2 instance") {
  FiniteSpace X({"x1", "x2"}), Y({"y1", "y2"});
  CouplingInstance inst(X, Y, Matrix{{0, 1}, {1, 0}});
  auto fc = c_transform(ExtendedPotential(X, {0, 0}), inst);
  CHECK(fc[0] == 1.0);
  CHECK(fc[1] == 1.0);
}

TEST_CASE("c-transform rejects shape mismatches; potentials must be proper") {
  FiniteSpace X({"a", "b"}), Y({"u", "v", "w"});
  CouplingInstance inst(X, Y, Matrix(2, 3, 0.0));
  CHECK_THROWS_AS(c_transform(ExtendedPotential(Y, {0, 0, 0}), inst), Error);
  CHECK_THROWS_AS(ExtendedPotential(X, {kPlusInfinity, kPlusInfinity}), Error);
  CHECK_THROWS_AS(ExtendedPotential(X, {0.0, -kPlusInfinity}), Error);
}

TEST_CASE("c-convexification: fixed point, hand value, domination") {
  FiniteSpace X({"0", "1", "2"});
  Matrix prod(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) prod(i, j) = i * j;
  CouplingInstance inst(X, X, prod);

  ExtendedPotential f(X, {0, 2, 2});
  auto fcc = c_convexify(f, inst);
  CHECK(fcc[0] == Catch::Approx(0.0).margin(1e-12));
  CHECK(fcc[1] == Catch::Approx(1.0).margin(1e-12));
  CHECK(fcc[2] == Catch::Approx(2.0).margin(1e-12));
  CHECK_FALSE(is_c_convex(f, inst));

  // Convexification output is c-convex and idempotent.
  CHECK(is_c_convex(fcc, inst));
  CHECK(fcc.approx_equal(c_convexify(fcc, inst), 1e-12));

  // Coupling slices are c-convex.
  for (std::size_t j = 0; j < 3; ++j) {
    std::vector<double> slice(3);
    for (std::size_t i = 0; i < 3; ++i) slice[i] = inst.coupling(i, j);
    CHECK(is_c_convex(ExtendedPotential(X, std::move(slice)), inst));
  }
}

TEST_CASE("convexification is dominated by its input and idempotent (random)") {
  testutil::Rng rng(20240601);
  for (int rep = 0; rep < 60; ++rep) {
    std::uniform_int_distribution<std::size_t> side(1, 8);
    auto inst = testutil::random_instance(rng, side(rng), side(rng));
    auto f = testutil::random_potential(rng, inst.space_x);
    auto fcc = c_convexify(f, inst);
    for (std::size_t i = 0; i < f.size(); ++i)
      CHECK(fcc[i] <= f[i] + 1e-9);
    CHECK(fcc.approx_equal(c_convexify(fcc, inst), 1e-9));
    // Triple conjugate collapses: (f^cc)^c = f^c.
    CHECK(c_transform(fcc, inst).approx_equal(c_transform(f, inst), 1e-9));
  }
}

TEST_CASE("subdifferential of a 1-Lipschitz slope on the line") {
  FiniteSpace X({"0", "1"});
  CouplingInstance neg_dist(X, X, Matrix{{0, -1}, {-1, 0}});
  auto sub = c_subdifferential(ExtendedPotential(X, {0, 1}), neg_dist);
  REQUIRE(sub.size() == 3);
  CHECK(sub.contains(0, 0));
  CHECK(sub.contains(0, 1));
  CHECK(sub.contains(1, 1));
  CHECK_FALSE(sub.contains(1, 0));
}

TEST_CASE("subdifferential of an indicator touches every target") {
  FiniteSpace X({"a", "b", "c"}), Y({"u", "v"});
  CouplingInstance inst(X, Y, Matrix{{1, -2}, {0.5, 3}, {-1, 0}});
  auto sub = c_subdifferential(ExtendedPotential::spike(X, 1), inst);
  REQUIRE(sub.size() == 2);
  CHECK(sub.contains(1, 0));
  CHECK(sub.contains(1, 1));
}

TEST_CASE("subdifferential of |x| under the negated product cost is the plan map") {
  auto ts = testutil::make_two_segment(20);
  auto sub = c_subdifferential(ts.abs_potential(), ts.cost.negated());
  REQUIRE(sub.size() == ts.xs.size());
  for (std::size_t i = 0; i < ts.xs.size(); ++i)
    CHECK(sub.contains(i, ts.xs[i] < 0 ? 1 : 0));
}

TEST_CASE("subdifferential is invariant under constant shifts") {
  testutil::Rng rng(7);
  for (int rep = 0; rep < 40; ++rep) {
    std::uniform_int_distribution<std::size_t> side(1, 6);
    auto inst = testutil::random_instance(rng, side(rng), side(rng));
    auto f = testutil::random_potential(rng, inst.space_x);
    auto a = c_subdifferential(f, inst);
    auto b = c_subdifferential(shifted(f, 3.25), inst);
    CHECK(a == b);
  }
}

TEST_CASE("young-fenchel gap: nonnegative, zero on the subdifferential, hand case") {
  FiniteSpace X({"x1", "x2"}), Y({"y1", "y2"});
  CouplingInstance inst(X, Y, Matrix{{0, 1}, {1, 0}});
  auto gap = young_fenchel_gap(ExtendedPotential(X, {0, 0}), inst);
  CHECK(gap(0, 0) == 1.0);
  CHECK(gap(0, 1) == 0.0);
  CHECK(gap(1, 0) == 0.0);
  CHECK(gap(1, 1) == 1.0);

  testutil::Rng rng(99);
  for (int rep = 0; rep < 40; ++rep) {
    std::uniform_int_distribution<std::size_t> side(1, 7);
    auto rinst = testutil::random_instance(rng, side(rng), side(rng));
    auto f = testutil::random_potential(rng, rinst.space_x);
    auto g = young_fenchel_gap(f, rinst);
    auto sub = c_subdifferential(f, rinst);
    for (std::size_t i = 0; i < rinst.nx(); ++i)
      for (std::size_t j = 0; j < rinst.ny(); ++j) {
        if (std::isinf(g(i, j))) continue;
        CHECK(g(i, j) >= -1e-9);
        if (sub.contains(i, j)) CHECK(g(i, j) <= 1e-9);
      }
  }
}

TEST_CASE("both characterizations of the subdifferential agree for c-convex f") {
  testutil::Rng rng(31337);
  for (int rep = 0; rep < 40; ++rep) {
    std::uniform_int_distribution<std::size_t> side(2, 8);
    auto inst = testutil::random_instance(rng, side(rng), side(rng));
    auto f = c_convexify(testutil::random_potential(rng, inst.space_x), inst);
    auto sub = c_subdifferential(f, inst);
    for (std::size_t i = 0; i < inst.nx(); ++i) {
      if (!f.is_finite_at(i)) continue;
      for (std::size_t j = 0; j < inst.ny(); ++j) {
        // Inequality form: f(x) + c(x',y) <= f(x') + c(x,y) for all x'.
        double worst = kPlusInfinity;
        for (std::size_t xp = 0; xp < inst.nx(); ++xp) {
          if (!f.is_finite_at(xp)) continue;
          worst = std::min(worst,
                           f[xp] + inst.coupling(i, j) - f[i] - inst.coupling(xp, j));
        }
        CHECK((worst >= -1e-9) == sub.contains(i, j));
      }
    }
  }
}
