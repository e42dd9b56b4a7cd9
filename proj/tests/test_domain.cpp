#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "refinery/domain.hpp"
#include "refinery/serialize.hpp"

using namespace refinery;

namespace {
Eigen::VectorXd vec1(double a) {
  Eigen::VectorXd v(1);
  v << a;
  return v;
}
}  // namespace

TEST_CASE("domain invariants are enforced") {
  CHECK_THROWS(Domain(vec1(1.0), vec1(1.0)));  // lower < upper
  CHECK_THROWS(Domain(Eigen::VectorXd::Zero(17), Eigen::VectorXd::Ones(17)));
  CHECK_THROWS(Domain(Eigen::VectorXd::Zero(0), Eigen::VectorXd::Ones(0)));
  Domain d = Domain::unit(3);
  CHECK(d.dim() == 3);
  CHECK(d.contains(Eigen::VectorXd::Constant(3, 0.5)));
  CHECK(d.contains(Eigen::VectorXd::Zero(3)));  // inclusive bounds
  CHECK_FALSE(d.contains(Eigen::VectorXd::Constant(3, 1.5)));
}

TEST_CASE("uniform_sample determinism and bounds in 1-D") {
  Domain d(vec1(0.0), vec1(1.0));
  auto a = uniform_sample(d, 3, RngStream(7));
  auto b = uniform_sample(d, 3, RngStream(7));
  REQUIRE(a.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(a[i][0] == b[i][0]);
    CHECK(a[i][0] >= 0.0);
    CHECK(a[i][0] <= 1.0);
  }
}

TEST_CASE("uniform_sample mean within the CLT bound") {
  // sd of the per-coordinate mean at n = 1e4 is (1/sqrt(12))/100 ~ 0.0029,
  // so 0.02 is a comfortable bound.
  Domain d = Domain::unit(2);
  auto pts = uniform_sample(d, 10000, RngStream(123));
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : pts) mean += p;
  mean /= 10000.0;
  CHECK(std::abs(mean[0] - 0.5) < 0.02);
  CHECK(std::abs(mean[1] - 0.5) < 0.02);
}

TEST_CASE("uniform_sample n=1 stays in bounds") {
  Domain d(vec1(-2.0), vec1(-1.0));
  auto pts = uniform_sample(d, 1, RngStream(5));
  REQUIRE(pts.size() == 1);
  CHECK(d.contains(pts[0]));
}

TEST_CASE("all samples stay in bounds across seeds") {
  Domain d(Eigen::Vector3d(-1.0, 0.0, 10.0).eval(),
           Eigen::Vector3d(1.0, 0.5, 11.0).eval());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const auto& p : uniform_sample(d, 200, RngStream(seed)))
      REQUIRE(d.contains(p));
  }
}

TEST_CASE("success_rate pools trials") {
  Domain d = Domain::unit(1);
  EvalDataset ds;
  ds.domain = d;
  ds.records.push_back({vec1(0.1), 10, 10});
  ds.records.push_back({vec1(0.9), 10, 0});
  CHECK(success_rate(ds) == doctest::Approx(0.5).epsilon(1e-15));

  EvalDataset one;
  one.domain = d;
  one.records.push_back({vec1(0.5), 1000, 835});
  CHECK(success_rate(one) == doctest::Approx(0.835).epsilon(1e-15));

  EvalDataset full;
  full.domain = d;
  full.records.push_back({vec1(0.2), 5, 5});
  full.records.push_back({vec1(0.8), 7, 7});
  CHECK(success_rate(full) == 1.0);
}

TEST_CASE("success_rate rejects an empty dataset") {
  EvalDataset ds;
  ds.domain = Domain::unit(1);
  CHECK_THROWS_WITH_AS(static_cast<void>(success_rate(ds)), "no trials",
                       std::invalid_argument);
}

TEST_CASE("success_rate is order invariant") {
  Domain d = Domain::unit(1);
  EvalDataset ds;
  ds.domain = d;
  RngStream r(9);
  for (int i = 0; i < 20; ++i) {
    std::int64_t trials = 1 + static_cast<std::int64_t>(r.next_below(30));
    std::int64_t succ = static_cast<std::int64_t>(r.next_below(trials + 1));
    ds.records.push_back({vec1(r.next_double()), trials, succ});
  }
  const double base = success_rate(ds);
  std::reverse(ds.records.begin(), ds.records.end());
  CHECK(success_rate(ds) == base);
}

TEST_CASE("dataset round-trips through JSON") {
  Domain d = Domain::unit(2);
  EvalDataset ds;
  ds.domain = d;
  ds.records.push_back({Eigen::Vector2d(0.25, 0.75).eval(), 20, 13});
  ds.records.push_back({Eigen::Vector2d(0.5, 0.5).eval(), 5, 0});
  json j = ds;
  auto back = j.get<EvalDataset>();
  REQUIRE(back.records.size() == 2);
  CHECK(back.records[0].state == ds.records[0].state);
  CHECK(back.records[0].trials == 20);
  CHECK(back.records[0].successes == 13);
  CHECK(back.domain.lower == d.lower);
  CHECK(json(back) == j);

  json bad = j;
  bad["records"][0]["successes"] = 21;  // more successes than trials
  CHECK_THROWS(static_cast<void>(bad.get<EvalDataset>()));
}
