// Weighted point sets, rigid transforms and the text format for both.
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "errors.hpp"
#include "oracles.hpp"
#include "point_set.hpp"
#include "point_set_io.hpp"
#include "rigid_transform.hpp"
#include "rng.hpp"

using geoalign::Error;
using geoalign::ErrorKind;
using geoalign::ParseError;
using geoalign::RigidTransform;
using geoalign::SplitMix64;
using geoalign::WeightedPointSet;

namespace {

WeightedPointSet make_set(std::vector<double> coords, std::vector<double> weights,
                          std::int64_t d) {
  const auto n = static_cast<std::int64_t>(weights.size());
  return WeightedPointSet(n, d, std::move(coords), std::move(weights));
}

}  // namespace

TEST_CASE("squared distance: exact small cases") {
  const std::vector<double> a{0.0, 0.0}, b{3.0, 4.0};
  CHECK(geoalign::squared_distance(a, a) == 0.0);
  CHECK(geoalign::squared_distance(a, b) == 25.0);
  CHECK(geoalign::squared_distance(b, a) == 25.0);
}

TEST_CASE("squared distance matches coordinate-wise summation in d=50") {
  SplitMix64 rng(11);
  std::vector<double> p(50), q(50);
  for (auto& v : p) v = 10.0 * rng.next_double() - 5.0;
  for (auto& v : q) v = 10.0 * rng.next_double() - 5.0;
  double expect = 0.0;
  for (std::size_t k = 0; k < 50; ++k) expect += (p[k] - q[k]) * (p[k] - q[k]);
  CHECK(geoalign::squared_distance(p, q) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("squared distance rejects mismatched dimensions") {
  const std::vector<double> a{1.0, 2.0}, b{1.0, 2.0, 3.0};
  try {
    geoalign::squared_distance(a, b);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dimension_mismatch);
    CHECK(std::string(e.what()).find("dimensions") != std::string::npos);
  }
}

TEST_CASE("construction rejects bad shapes, weights and non-finite values") {
  CHECK_THROWS_AS(WeightedPointSet(0, 2, {}, {}), Error);
  CHECK_THROWS_AS(WeightedPointSet(1, 0, {}, {1.0}), Error);
  CHECK_THROWS_AS(WeightedPointSet(2, 2, {1, 2, 3}, {1, 1}), Error);   // short coords
  CHECK_THROWS_AS(WeightedPointSet(2, 1, {1, 2}, {1}), Error);         // short weights
  CHECK_THROWS_AS(make_set({1, 2}, {0.0}, 2), Error);                  // zero weight
  CHECK_THROWS_AS(make_set({1, 2}, {-1.0}, 2), Error);                 // negative weight
  CHECK_THROWS_AS(make_set({1, 2}, {std::nan("")}, 2), Error);         // NaN weight
  CHECK_THROWS_AS(make_set({std::nan(""), 2}, {1.0}, 2), Error);       // NaN coord
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(make_set({inf, 2}, {1.0}, 2), Error);                // inf coord
  try {
    make_set({1, 2}, {-1.0}, 2);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
  }
}

TEST_CASE("total weight and weighted mean match direct summation") {
  const auto p = make_set({0, 0, 2, 0, 0, 4, 2, 4}, {1, 1, 1, 1}, 2);
  CHECK(p.total_weight() == 4.0);
  const auto mean = p.weighted_mean();
  CHECK(mean[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mean[1] == doctest::Approx(2.0).epsilon(1e-15));

  SplitMix64 rng(77);
  const auto q = oracle::random_set(rng, 40, 7);
  double total = 0.0;
  std::vector<double> m(7, 0.0);
  for (std::int64_t i = 0; i < q.size(); ++i) {
    total += q.weight(i);
    for (int k = 0; k < 7; ++k) m[k] += q.weight(i) * q.point(i)[k];
  }
  CHECK(q.total_weight() == doctest::Approx(total).epsilon(1e-13));
  const auto qm = q.weighted_mean();
  for (int k = 0; k < 7; ++k)
    CHECK(qm[k] == doctest::Approx(m[k] / total).epsilon(1e-12));
}

TEST_CASE("diameter: hand cases and exhaustive scan agreement") {
  CHECK(geoalign::diameter(make_set({5, 5}, {1}, 2)) == 0.0);
  CHECK(geoalign::diameter(make_set({0, 0, 0, 5}, {1, 1}, 2)) == 5.0);

  SplitMix64 rng(5);
  const auto p = oracle::random_set(rng, 100, 3);
  double best = 0.0;
  for (std::int64_t i = 0; i < p.size(); ++i)
    for (std::int64_t j = 0; j < p.size(); ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double diff = p.point(i)[k] - p.point(j)[k];
        s += diff * diff;
      }
      best = std::max(best, std::sqrt(s));
    }
  CHECK(geoalign::diameter(p) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("rigid transform constructor enforces orthogonality") {
  // Scaled identity: not orthogonal.
  CHECK_THROWS_AS(RigidTransform(2, {1.1, 0, 0, 1.1}, {0, 0}), Error);
  // Shear: not orthogonal.
  CHECK_THROWS_AS(RigidTransform(2, {1, 0.5, 0, 1}, {0, 0}), Error);
  // Wrong buffer sizes.
  CHECK_THROWS_AS(RigidTransform(2, {1, 0, 0}, {0, 0}), Error);
  CHECK_THROWS_AS(RigidTransform(2, {1, 0, 0, 1}, {0}), Error);
  // Rotation and reflection are both accepted.
  const RigidTransform rot(2, {0, -1, 1, 0}, {0, 0});
  CHECK(rot.is_proper());
  const RigidTransform refl(2, {1, 0, 0, -1}, {0, 0});
  CHECK_FALSE(refl.is_proper());
  CHECK(RigidTransform::identity(3).is_proper());
}

TEST_CASE("apply_point: quarter turn in the plane") {
  const RigidTransform rot(2, {0, -1, 1, 0}, {0, 0});  // 90 degrees CCW
  std::vector<double> out(2);
  rot.apply_point(std::vector<double>{1, 0}, out);
  CHECK(out[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("apply_transform preserves pairwise distances and weights") {
  SplitMix64 rng(123);
  const auto p = oracle::random_set(rng, 30, 5);
  const auto rot = oracle::random_rotation(rng, 5);
  std::vector<double> v(5);
  for (auto& x : v) x = rng.next_double() - 0.5;
  const RigidTransform t(5, rot, v);
  const auto q = apply_transform(t, p);
  REQUIRE(q.size() == p.size());
  REQUIRE(q.dim() == p.dim());
  CHECK(q.weights() == p.weights());
  for (std::int64_t i = 0; i < p.size(); ++i)
    for (std::int64_t j = i + 1; j < p.size(); ++j) {
      const double before = geoalign::squared_distance(p.point(i), p.point(j));
      const double after = geoalign::squared_distance(q.point(i), q.point(j));
      CHECK(after == doctest::Approx(before).epsilon(1e-9));
    }
}

TEST_CASE("transform then inverse is the identity on points") {
  SplitMix64 rng(9);
  const auto p = oracle::random_set(rng, 20, 4);
  const auto rot = oracle::random_rotation(rng, 4);
  std::vector<double> v{0.3, -1.2, 0.05, 2.0};
  const RigidTransform t(4, rot, v);
  const auto round_trip = apply_transform(t.inverse(), apply_transform(t, p));
  for (std::size_t i = 0; i < p.coords().size(); ++i)
    CHECK(round_trip.coords()[i] == doctest::Approx(p.coords()[i]).epsilon(1e-9));
}

TEST_CASE("then() composes in application order") {
  SplitMix64 rng(31);
  const RigidTransform t1(3, oracle::random_rotation(rng, 3), {1, 0, -2});
  const RigidTransform t2(3, oracle::random_rotation(rng, 3), {0.5, 0.5, 0.5});
  const auto p = oracle::random_set(rng, 10, 3);
  const auto sequential = apply_transform(t2, apply_transform(t1, p));
  const auto composed = apply_transform(t1.then(t2), p);
  for (std::size_t i = 0; i < sequential.coords().size(); ++i)
    CHECK(composed.coords()[i] ==
          doctest::Approx(sequential.coords()[i]).epsilon(1e-12));
}

TEST_CASE("transform commutes with the weighted mean") {
  SplitMix64 rng(41);
  const auto p = oracle::random_set(rng, 25, 3);
  const RigidTransform t(3, oracle::random_rotation(rng, 3), {2, -1, 0.25});
  const auto mean_then_map = [&] {
    std::vector<double> out(3);
    t.apply_point(p.weighted_mean(), out);
    return out;
  }();
  const auto map_then_mean = apply_transform(t, p).weighted_mean();
  for (int k = 0; k < 3; ++k)
    CHECK(map_then_mean[k] == doctest::Approx(mean_then_map[k]).epsilon(1e-12));
}

TEST_CASE("transform rejects dimension mismatch") {
  const RigidTransform t = RigidTransform::identity(3);
  const auto p = make_set({1, 2}, {1}, 2);
  CHECK_THROWS_AS(apply_transform(t, p), Error);
}

TEST_CASE("point set text round-trip is bitwise exact") {
  SplitMix64 rng(2026);
  const auto p = oracle::random_set(rng, 37, 6);
  std::ostringstream out;
  geoalign::write_point_set(out, p);
  std::istringstream in(out.str());
  const auto q = geoalign::read_point_set(in, "mem");
  REQUIRE(q.size() == p.size());
  REQUIRE(q.dim() == p.dim());
  CHECK(q.coords() == p.coords());
  CHECK(q.weights() == p.weights());
}

TEST_CASE("reader skips comments and blank lines") {
  std::istringstream in(
      "# a point set\n"
      "\n"
      "2 2\n"
      "  # interior comment\n"
      "1 0 0\n"
      "\n"
      "2.5 3 4\n");
  const auto p = geoalign::read_point_set(in, "mem");
  REQUIRE(p.size() == 2);
  CHECK(p.weight(1) == 2.5);
  CHECK(p.point(1)[0] == 3.0);
}

TEST_CASE("reader reports line and column for malformed input") {
  {
    std::istringstream in("2 2\n1 0 0\n1 x 4\n");
    try {
      geoalign::read_point_set(in, "bad");
      FAIL("expected parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(e.column() == 3);
      CHECK(std::string(e.what()).find("bad:3:3") != std::string::npos);
    }
  }
  {
    std::istringstream in("");
    CHECK_THROWS_AS(geoalign::read_point_set(in, "empty"), ParseError);
  }
  {  // nonpositive weight
    std::istringstream in("2 1\n0 1 2\n");
    try {
      geoalign::read_point_set(in, "w");
      FAIL("expected parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(std::string(e.what()).find("weight") != std::string::npos);
    }
  }
  {  // truncated file
    std::istringstream in("2 3\n1 0 0\n");
    try {
      geoalign::read_point_set(in, "short");
      FAIL("expected parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  {  // extra value on a point line
    std::istringstream in("2 1\n1 0 0 9\n");
    CHECK_THROWS_AS(geoalign::read_point_set(in, "extra"), ParseError);
  }
  {  // bad header token count
    std::istringstream in("2\n");
    CHECK_THROWS_AS(geoalign::read_point_set(in, "hdr"), ParseError);
  }
}

TEST_CASE("load reports a filesystem error for a missing path") {
  try {
    geoalign::load_point_set("/nonexistent/dir/file.pts");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
}
