#include <catch2/catch_amalgamated.hpp>

#include "fairmed/kmedian.hpp"
#include "fairmed/oracle.hpp"
#include "test_helpers.hpp"

using namespace fairmed;
using namespace fairmed::testing;

TEST_CASE("brute fair assignment on the four-point fixture") {
  Instance inst = four_point_fixture();
  auto sol = oracle::brute_fair_assignment(inst, {0, 1},
                                           FairnessPolicy::exact({2, 2}));
  REQUIRE(sol.feasible);
  CHECK(sol.cost == 2.0);
}

TEST_CASE("brute assignment with a trivial policy matches voronoi") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Instance inst = random_consolidated_instance(rng, 6, 2, 3);
    std::vector<int> centers = occupied_locations(inst);
    if (centers.size() > 3) continue;
    auto sol =
        oracle::brute_fair_assignment(inst, centers, trivial_policy(2));
    REQUIRE(sol.feasible);
    auto voronoi = voronoi_assign(inst, centers);
    double vcost = 0;
    for (int i = 0; i < inst.num_points(); ++i)
      vcost += inst.metric.distance(inst.location_of[i], voronoi[i]);
    CHECK(sol.cost == vcost);
  }
}

TEST_CASE("single point cannot split fifty-fifty") {
  Instance inst = line_instance({0.0}, {0}, 2);
  auto policy = FairnessPolicy::alpha_beta({{1, 2}, {1, 2}}, {{1, 2}, {1, 2}});
  auto sol = oracle::brute_fair_assignment(inst, {0}, policy);
  CHECK_FALSE(sol.feasible);
}

TEST_CASE("brute fair clustering") {
  SECTION("k = n with a trivial policy costs 0") {
    Instance inst = line_instance({0, 3, 9}, {0, 1, 0}, 2);
    auto sol = oracle::brute_fair_clustering(inst, 3, trivial_policy(2));
    REQUIRE(sol.feasible);
    CHECK(sol.cost == 0.0);
  }
  SECTION("four-point line fixture, k=2, trivial policy") {
    Instance inst = line_instance({0, 1, 10, 11}, {0, 0, 0, 0}, 1);
    auto sol = oracle::brute_fair_clustering(inst, 2, trivial_policy(1));
    REQUIRE(sol.feasible);
    CHECK(sol.cost == 2.0);
  }
  SECTION("four-point fixture, k=2, exact policy") {
    Instance inst = four_point_fixture();
    auto sol = oracle::brute_fair_clustering(inst, 2,
                                             FairnessPolicy::exact({2, 2}));
    REQUIRE(sol.feasible);
    CHECK(sol.cost == 2.0);
  }
}

TEST_CASE("brute kmedian") {
  Instance a = line_instance({0, 1, 10, 11}, {0, 0, 0, 0}, 1);
  CHECK(oracle::brute_kmedian(a, 2).cost == 2.0);

  Instance b = line_instance({0, 2, 10}, {0, 0, 0}, 1);
  auto sol = oracle::brute_kmedian(b, 1);
  CHECK(sol.cost == 10.0);
  CHECK(sol.centers == std::vector<int>{1});

  oracle::OracleLimits wide;
  wide.max_centers = 4;
  CHECK(oracle::brute_kmedian(a, 4, wide).cost == 0.0);
}

TEST_CASE("oracle size limits") {
  Instance inst = line_instance({0, 1, 10, 11}, {0, 0, 0, 0}, 1);
  oracle::OracleLimits tight;
  tight.max_points = 3;
  CHECK_THROWS_AS(oracle::brute_kmedian(inst, 2, tight), SizeError);
  tight.max_points = 12;
  tight.max_centers = 1;
  CHECK_THROWS_AS(
      oracle::brute_fair_clustering(inst, 2, trivial_policy(1), tight),
      SizeError);
}

TEST_CASE("oracle determinism") {
  Rng rng(17);
  Instance inst = random_consolidated_instance(rng, 7, 2, 3);
  auto a = oracle::brute_fair_clustering(inst, 2, trivial_policy(2));
  auto b = oracle::brute_fair_clustering(inst, 2, trivial_policy(2));
  REQUIRE(a.feasible == b.feasible);
  CHECK(a.cost == b.cost);
  CHECK(a.centers == b.centers);
  CHECK(a.point_to_center == b.point_to_center);
}
