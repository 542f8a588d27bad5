#include <catch2/catch_amalgamated.hpp>

#include "fairmed/kmedian.hpp"
#include "fairmed/oracle.hpp"
#include "test_helpers.hpp"

using namespace fairmed;
using namespace fairmed::testing;

TEST_CASE("voronoi assignment") {
  Instance inst = line_instance({0, 5, 10}, {0, 0, 0}, 1);
  SECTION("coincident point goes to its own center") {
    auto v = voronoi_assign(inst, {0, 2});
    CHECK(v[0] == 0);
    CHECK(v[2] == 2);
  }
  SECTION("equidistant point breaks toward the lower center index") {
    auto v = voronoi_assign(inst, {0, 2});
    CHECK(v[1] == 0);  // location 1 sits exactly between 0 and 10
  }
  SECTION("single center takes everything") {
    auto v = voronoi_assign(inst, {1});
    CHECK(v == std::vector<int>{1, 1, 1});
  }
}

TEST_CASE("kmedian on the line fixtures") {
  SECTION("two pairs, k=2") {
    Instance inst = line_instance({0, 1, 10, 11}, {0, 0, 0, 0}, 1);
    auto sol = solve_kmedian(inst, 2, 42);
    CHECK(sol.cost == 2.0);
    CHECK(sol.voronoi.size() == 4);
  }
  SECTION("k = n costs zero") {
    Instance inst = line_instance({0, 1, 10, 11}, {0, 0, 0, 0}, 1);
    auto sol = solve_kmedian(inst, 4, 42);
    CHECK(sol.cost == 0.0);
  }
  SECTION("k = 1 picks the median point") {
    Instance inst = line_instance({0, 2, 10}, {0, 0, 0}, 1);
    auto sol = solve_kmedian(inst, 1, 42);
    CHECK(sol.cost == 10.0);
    CHECK(sol.centers == std::vector<int>{1});
  }
  SECTION("k above the number of distinct locations is infeasible") {
    Instance inst = line_instance({0, 1}, {0, 0}, 1);
    CHECK_THROWS_AS(solve_kmedian(inst, 3, 42), InfeasibleError);
  }
}

TEST_CASE("local search is a single-swap local optimum") {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 4 + static_cast<int>(rng.below(6));
    Instance inst = random_euclidean_instance(rng, n, 1, 12);
    int k = 1 + static_cast<int>(rng.below(3));
    auto sol = solve_kmedian(inst, k, 1000 + trial);
    CHECK_FALSE(best_kmedian_swap(inst, sol.centers).has_value());
  }
}

TEST_CASE("local search stays within the approximation contract") {
  Rng rng(32);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    int n = 3 + static_cast<int>(rng.below(8));  // n <= 10
    Instance inst = random_euclidean_instance(rng, n, 1, 10);
    int k = 1 + static_cast<int>(rng.below(3));
    if (static_cast<int>(occupied_locations(inst).size()) < k) continue;
    auto sol = solve_kmedian(inst, k, 7 * trial + 1);
    auto opt = oracle::brute_kmedian(inst, k);
    CHECK(sol.cost <= 5.01 * opt.cost + 1e-9);
    ++checked;
  }
  CHECK(checked >= 40);
}

TEST_CASE("kmedian determinism") {
  Rng rng(33);
  Instance inst = random_euclidean_instance(rng, 9, 1, 20, 2);
  auto a = solve_kmedian(inst, 3, 5);
  auto b = solve_kmedian(inst, 3, 5);
  CHECK(a.centers == b.centers);
  CHECK(a.cost == b.cost);
  CHECK(a.voronoi == b.voronoi);
}
