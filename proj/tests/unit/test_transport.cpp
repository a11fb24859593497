// Exact transport solver checked against brute-force vertex enumeration,
// dual certificates, and structural flow-plan invariants.
#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "errors.hpp"
#include "oracles.hpp"
#include "point_set.hpp"
#include "rng.hpp"
#include "transport.hpp"

using geoalign::EmdOptions;
using geoalign::Error;
using geoalign::FlowEntry;
using geoalign::FlowPlan;
using geoalign::SplitMix64;
using geoalign::WeightedPointSet;
using geoalign::solve_emd;

namespace {

WeightedPointSet make_set(std::vector<double> coords, std::vector<double> weights,
                          std::int64_t d) {
  const auto n = static_cast<std::int64_t>(weights.size());
  return WeightedPointSet(n, d, std::move(coords), std::move(weights));
}

void check_marginals(const FlowPlan& plan, const WeightedPointSet& a,
                     const WeightedPointSet& b) {
  std::vector<double> row(static_cast<std::size_t>(a.size()), 0.0);
  std::vector<double> col(static_cast<std::size_t>(b.size()), 0.0);
  for (const auto& e : plan.entries()) {
    REQUIRE(e.i >= 0);
    REQUIRE(e.i < a.size());
    REQUIRE(e.j >= 0);
    REQUIRE(e.j < b.size());
    REQUIRE(e.flow > 0.0);
    row[static_cast<std::size_t>(e.i)] += e.flow;
    col[static_cast<std::size_t>(e.j)] += e.flow;
  }
  const double m = std::min(a.total_weight(), b.total_weight());
  const double slack = geoalign::kMarginalSlack * m;
  for (std::int64_t i = 0; i < a.size(); ++i)
    CHECK(row[static_cast<std::size_t>(i)] <= a.weight(i) + slack);
  for (std::int64_t j = 0; j < b.size(); ++j)
    CHECK(col[static_cast<std::size_t>(j)] <= b.weight(j) + slack);
  CHECK(plan.total_flow() == doctest::Approx(m).epsilon(1e-12));
}

}  // namespace

TEST_CASE("flow plan normalizes, sorts and validates its entries") {
  FlowPlan p(2, 2, {{1, 1, 0.5}, {0, 0, 1.0}, {1, 0, 0.0}});
  REQUIRE(p.entries().size() == 2);  // zero entry dropped
  CHECK(p.entries()[0].i == 0);      // sorted by (i, j)
  CHECK(p.entries()[1].i == 1);
  CHECK(p.total_flow() == doctest::Approx(1.5).epsilon(1e-15));
  CHECK_THROWS_AS(FlowPlan(2, 2, {{0, 0, 1.0}, {0, 0, 1.0}}), Error);  // duplicate
  CHECK_THROWS_AS(FlowPlan(2, 2, {{0, 0, -1.0}}), Error);              // negative
  CHECK_THROWS_AS(FlowPlan(2, 2, {{2, 0, 1.0}}), Error);               // out of range
}

TEST_CASE("identical sets have distance exactly zero with a diagonal plan") {
  SplitMix64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = oracle::random_set(rng, 6, 3);
    const auto sol = solve_emd(a, a);
    CHECK(sol.value == 0.0);  // exact, not approximate
    for (const auto& e : sol.plan.entries()) CHECK(e.i == e.j);
  }
}

TEST_CASE("forced split: one source feeding two sinks") {
  // Source of mass 2 at origin; sinks of mass 1 at distance 1 and 2.
  const auto a = make_set({0.0}, {2.0}, 1);
  const auto b = make_set({1.0, 2.0}, {1.0, 1.0}, 1);
  const auto sol = solve_emd(a, b);
  // Cost = (1*1 + 1*4) / 2.
  CHECK(sol.value == doctest::Approx(2.5).epsilon(1e-14));
  REQUIRE(sol.plan.entries().size() == 2);
  CHECK(sol.plan.entries()[0].flow == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.plan.entries()[1].flow == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hand-checked 2x2 with an obvious optimal matching") {
  // Matching each source to its nearest sink is optimal here.
  const auto a = make_set({0.0, 10.0}, {1.0, 1.0}, 1);
  const auto b = make_set({1.0, 11.0}, {1.0, 1.0}, 1);
  const auto sol = solve_emd(a, b);
  CHECK(sol.value == doctest::Approx(1.0).epsilon(1e-14));  // (1 + 1) / 2
  CHECK(geoalign::emd_cost(sol.plan, a, b) ==
        doctest::Approx(sol.value).epsilon(1e-14));
}

TEST_CASE("solver matches vertex enumeration on small balanced instances") {
  SplitMix64 rng(42);
  for (int trial = 0; trial < 40; ++trial) {
    const auto n = static_cast<std::int64_t>(2 + rng.next_below(3));  // 2..4
    const auto d = static_cast<std::int64_t>(1 + rng.next_below(3));
    auto a = oracle::random_set(rng, n, d);
    // Rebuild b with the same total weight as a so the instance is balanced.
    auto b0 = oracle::random_set(rng, n, d);
    std::vector<double> w(b0.weights());
    const double scale = a.total_weight() / b0.total_weight();
    for (auto& x : w) x *= scale;
    const WeightedPointSet b(b0.size(), b0.dim(), std::vector<double>(b0.coords()),
                             std::move(w));
    const auto sol = solve_emd(a, b);
    const double brute = oracle::emd_by_enumeration(a, b);
    CHECK(sol.value == doctest::Approx(brute).epsilon(1e-9));
    check_marginals(sol.plan, a, b);
  }
}

TEST_CASE("solver matches vertex enumeration on unbalanced instances") {
  SplitMix64 rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const auto n1 = static_cast<std::int64_t>(1 + rng.next_below(4));  // 1..4
    const auto n2 = static_cast<std::int64_t>(1 + rng.next_below(4));
    const auto d = static_cast<std::int64_t>(1 + rng.next_below(3));
    const auto a = oracle::random_set(rng, n1, d);
    const auto b = oracle::random_set(rng, n2, d);
    const auto sol = solve_emd(a, b);
    const double brute = oracle::emd_by_enumeration(a, b);
    if (brute == 0.0)
      CHECK(sol.value <= 1e-12);
    else
      CHECK(sol.value == doctest::Approx(brute).epsilon(1e-9));
    check_marginals(sol.plan, a, b);
  }
}

TEST_CASE("integer-weight instances agree with enumeration") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto n1 = static_cast<std::int64_t>(2 + rng.next_below(3));
    const auto n2 = static_cast<std::int64_t>(2 + rng.next_below(3));
    auto a0 = oracle::random_set(rng, n1, 2);
    auto b0 = oracle::random_set(rng, n2, 2);
    const WeightedPointSet a(n1, 2, std::vector<double>(a0.coords()),
                             oracle::random_int_weights(rng, n1, 5));
    const WeightedPointSet b(n2, 2, std::vector<double>(b0.coords()),
                             oracle::random_int_weights(rng, n2, 5));
    const auto sol = solve_emd(a, b);
    CHECK(sol.value == doctest::Approx(oracle::emd_by_enumeration(a, b)).epsilon(1e-9));
  }
}

TEST_CASE("plan is basic: at most n1 + n2 - 1 entries") {
  SplitMix64 rng(1234);
  for (int trial = 0; trial < 15; ++trial) {
    const auto n1 = static_cast<std::int64_t>(2 + rng.next_below(14));
    const auto n2 = static_cast<std::int64_t>(2 + rng.next_below(14));
    const auto a = oracle::random_set(rng, n1, 4);
    const auto b = oracle::random_set(rng, n2, 4);
    const auto sol = solve_emd(a, b);
    CHECK(static_cast<std::int64_t>(sol.plan.entries().size()) <= n1 + n2 - 1);
    check_marginals(sol.plan, a, b);
  }
}

TEST_CASE("dual certificates: feasibility and complementary slackness") {
  SplitMix64 rng(88);
  for (int trial = 0; trial < 10; ++trial) {
    const auto n1 = static_cast<std::int64_t>(20 + rng.next_below(60));
    const auto n2 = static_cast<std::int64_t>(20 + rng.next_below(60));
    const auto a = oracle::random_set(rng, n1, 6);
    const auto b = oracle::random_set(rng, n2, 6);
    const auto sol = solve_emd(a, b);
    double max_cost = 0.0;
    for (std::int64_t i = 0; i < n1; ++i)
      for (std::int64_t j = 0; j < n2; ++j)
        max_cost = std::max(max_cost,
                            geoalign::squared_distance(a.point(i), b.point(j)));
    const auto gaps = geoalign::dual_gaps(sol, a, b);
    CHECK(gaps.feasibility <= 1e-7 * max_cost);
    CHECK(gaps.slackness <= 1e-7 * max_cost);
  }
}

TEST_CASE("balanced distance is symmetric") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = oracle::random_set(rng, 8, 3, 1.0, true);
    const auto b = oracle::random_set(rng, 8, 3, 1.0, true);
    const double ab = solve_emd(a, b).value;
    const double ba = solve_emd(b, a).value;
    CHECK(ab == doctest::Approx(ba).epsilon(1e-9));
  }
}

TEST_CASE("scaling all coordinates by s scales the distance by s^2") {
  SplitMix64 rng(19);
  const auto a = oracle::random_set(rng, 7, 3);
  const auto b = oracle::random_set(rng, 9, 3);
  const double base = solve_emd(a, b).value;
  const double s = 3.5;
  auto scale_coords = [&](const WeightedPointSet& p) {
    std::vector<double> c(p.coords());
    for (auto& v : c) v *= s;
    return WeightedPointSet(p.size(), p.dim(), std::move(c),
                            std::vector<double>(p.weights()));
  };
  const double scaled = solve_emd(scale_coords(a), scale_coords(b)).value;
  CHECK(scaled == doctest::Approx(s * s * base).epsilon(1e-9));
}

TEST_CASE("dense and on-demand cost evaluation produce identical results") {
  SplitMix64 rng(23);
  const auto a = oracle::random_set(rng, 12, 5);
  const auto b = oracle::random_set(rng, 15, 5);
  const auto dense = solve_emd(a, b);          // 180 entries fits the default
  EmdOptions tiny;
  tiny.dense_threshold = 1;                    // forces on-demand rows
  const auto lazy = solve_emd(a, b, tiny);
  CHECK(dense.value == lazy.value);            // bitwise identical path
  REQUIRE(dense.plan.entries().size() == lazy.plan.entries().size());
  for (std::size_t k = 0; k < dense.plan.entries().size(); ++k) {
    CHECK(dense.plan.entries()[k].i == lazy.plan.entries()[k].i);
    CHECK(dense.plan.entries()[k].j == lazy.plan.entries()[k].j);
    CHECK(dense.plan.entries()[k].flow == lazy.plan.entries()[k].flow);
  }
}

TEST_CASE("emd_cost agrees with a hand computation") {
  const auto a = make_set({0.0, 1.0}, {1.0, 1.0}, 1);
  const auto b = make_set({0.0, 3.0}, {1.0, 1.0}, 1);
  const FlowPlan plan(2, 2, {{0, 0, 1.0}, {1, 1, 1.0}});
  // (1*0 + 1*4) / 2 = 2.
  CHECK(geoalign::emd_cost(plan, a, b) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("check_flow reports which constraint a bad plan violates") {
  const auto a = make_set({0.0, 1.0}, {1.0, 1.0}, 1);
  const auto b = make_set({0.0, 3.0}, {1.0, 1.0}, 1);
  CHECK(geoalign::check_flow(FlowPlan(2, 2, {{0, 0, 1.0}, {1, 1, 1.0}}), a, b)
            .empty());
  // Row marginal exceeded.
  const auto over_row = geoalign::check_flow(
      FlowPlan(2, 2, {{0, 0, 1.5}, {1, 1, 0.5}}), a, b);
  CHECK(!over_row.empty());
  // Total flow short of min(W_A, W_B).
  const auto short_total =
      geoalign::check_flow(FlowPlan(2, 2, {{0, 0, 0.5}}), a, b);
  CHECK(!short_total.empty());
  // Plan shaped for different set sizes.
  const auto bad_shape = geoalign::check_flow(FlowPlan(3, 2, {{2, 0, 1.0}}), a, b);
  CHECK(!bad_shape.empty());
  // emd_cost throws on the same violations.
  CHECK_THROWS_AS(geoalign::emd_cost(FlowPlan(2, 2, {{0, 0, 0.5}}), a, b), Error);
}

TEST_CASE("flow serialization: header plus one line per entry") {
  const FlowPlan plan(2, 3, {{0, 2, 0.5}, {1, 0, 1.25}});
  std::ostringstream out;
  geoalign::write_flow(out, plan);
  std::istringstream in(out.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "2 3 1.75");
  REQUIRE(std::getline(in, line));
  CHECK(line == "0 2 0.5");
  REQUIRE(std::getline(in, line));
  CHECK(line == "1 0 1.25");
  CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("solver rejects mismatched dimensions") {
  const auto a = make_set({0.0}, {1.0}, 1);
  const auto b = make_set({0.0, 0.0}, {1.0}, 2);
  try {
    solve_emd(a, b);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == geoalign::ErrorKind::dimension_mismatch);
  }
}

TEST_CASE("collinear points transport in order (monotone optimal plan)") {
  // On a line with equal masses, the optimal plan never crosses.
  const auto a = make_set({0.0, 1.0, 2.0}, {1.0, 1.0, 1.0}, 1);
  const auto b = make_set({0.5, 1.5, 2.5}, {1.0, 1.0, 1.0}, 1);
  const auto sol = solve_emd(a, b);
  CHECK(sol.value == doctest::Approx(0.25).epsilon(1e-14));
  for (const auto& e : sol.plan.entries()) CHECK(e.i == e.j);
}
