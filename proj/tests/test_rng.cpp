#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "refinery/rng.hpp"

using refinery::RngStream;

TEST_CASE("identical (seed, stream) reproduce identical draws") {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct streams differ") {
  RngStream a(42, 0), b(42, 1), c(43, 0);
  int equal_ab = 0, equal_ac = 0;
  for (int i = 0; i < 64; ++i) {
    std::uint64_t va = a.next_u64();
    if (va == b.next_u64()) ++equal_ab;
    if (va == c.next_u64()) ++equal_ac;
  }
  CHECK(equal_ab == 0);
  CHECK(equal_ac == 0);
}

TEST_CASE("substreams are schedule independent") {
  // Deriving children in any order, or after consuming from the parent,
  // leaves each child's draws unchanged.
  RngStream parent(99, 3);
  std::vector<std::uint64_t> first;
  for (int k = 0; k < 8; ++k) first.push_back(parent.substream(k).next_u64());

  RngStream parent2(99, 3);
  parent2.next_u64();  // consume from the parent first
  for (int k = 7; k >= 0; --k) {
    RngStream child = parent2.substream(k);
    CHECK(child.next_u64() == first[k]);
  }
}

TEST_CASE("substream keys do not collide on small indices") {
  RngStream parent(1, 0);
  std::set<std::uint64_t> ids;
  for (int k = 0; k < 4096; ++k) ids.insert(parent.substream(k).stream_id());
  CHECK(ids.size() == 4096);
}

TEST_CASE("doubles live in [0,1) and pass a coarse moment check") {
  RngStream r(7, 0);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = r.next_double();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sumsq += u * u;
  }
  // CLT: sd of the mean is (1/sqrt(12))/sqrt(n) ~ 6.5e-4.
  CHECK(std::abs(sum / n - 0.5) < 4 * 0.288675 / std::sqrt(double(n)));
  CHECK(std::abs(sumsq / n - 1.0 / 3.0) < 0.005);
}

TEST_CASE("gaussian moments") {
  RngStream r(11, 5);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double g = r.next_gaussian();
    sum += g;
    sumsq += g * g;
  }
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(double(n)));
  CHECK(std::abs(sumsq / n - 1.0) < 0.02);
}

TEST_CASE("next_below is unbiased across the range") {
  RngStream r(3, 1);
  std::vector<int> counts(10, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[r.next_below(10)];
  for (int c : counts) CHECK(std::abs(c - n / 10) < 5 * std::sqrt(n * 0.1 * 0.9));
}
