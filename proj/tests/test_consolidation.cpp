#include <catch2/catch_amalgamated.hpp>

#include "fairmed/consolidate.hpp"
#include "fairmed/oracle.hpp"
#include "test_helpers.hpp"

using namespace fairmed;
using namespace fairmed::testing;

TEST_CASE("consolidation moves points to seed centers") {
  SECTION("instance already on centers is untouched") {
    Instance inst = line_instance({0, 0, 7, 7}, {0, 1, 0, 1}, 2);
    auto seed = solve_kmedian(inst, 2, 3);
    REQUIRE(seed.cost == 0.0);
    auto red = consolidate(inst, seed);
    CHECK(red.relocation_cost == 0.0);
    CHECK(red.base.num_locations() == 2);
    Profile total_before = zero_profile(2), total_after = zero_profile(2);
    for (int g : inst.group_of) total_before[g]++;
    for (int g : red.base.group_of) total_after[g]++;
    CHECK(total_before == total_after);
  }
  SECTION("one point at distance 3 from its center") {
    Instance inst = line_instance({0, 3}, {0, 1}, 2);
    auto seed = solve_kmedian(inst, 1, 3);
    auto red = consolidate(inst, seed);
    CHECK(red.relocation_cost == 3.0);
    auto profiles = location_profiles(red.base);
    CHECK(profiles[0] == Profile{1, 1});
  }
  SECTION("four-point line, k=2: profiles add up") {
    Instance inst = line_instance({0, 1, 10, 11}, {0, 1, 0, 1}, 2);
    auto seed = solve_kmedian(inst, 2, 3);
    auto red = consolidate(inst, seed);
    CHECK(red.base.num_locations() == 2);
    auto profiles = location_profiles(red.base);
    CHECK(profile_add(profiles[0], profiles[1]) == Profile{2, 2});
    CHECK(red.relocation_cost == 2.0);
  }
}

TEST_CASE("lift re-costs the same assignment in the original space") {
  SECTION("zero relocation means identical costs") {
    Instance inst = line_instance({0, 0, 7, 7}, {0, 1, 0, 1}, 2);
    auto seed = solve_kmedian(inst, 2, 3);
    auto red = consolidate(inst, seed);
    Clustering reduced;
    reduced.point_to_center.assign(4, 0);
    reduced.plan = plan_from_point_assignment(red.base,
                                              reduced.point_to_center, {0, 1});
    reduced.cost = evaluate_cost(red.base, reduced.plan);
    auto lifted = lift_clustering(reduced, red);
    CHECK(lifted.cost == reduced.cost);
  }
  SECTION("claim bound holds on random instances and clusterings") {
    Rng rng(44);
    for (int trial = 0; trial < 100; ++trial) {
      int n = 3 + static_cast<int>(rng.below(6));
      Instance inst = random_euclidean_instance(rng, n, 2, 12);
      int k = 1 + static_cast<int>(rng.below(3));
      auto seed = solve_kmedian(inst, k, trial);
      auto red = consolidate(inst, seed);
      Clustering reduced;
      reduced.point_to_center.resize(n);
      for (auto& c : reduced.point_to_center)
        c = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
      std::vector<int> centers(k);
      for (int c = 0; c < k; ++c) centers[c] = c;
      reduced.plan =
          plan_from_point_assignment(red.base, reduced.point_to_center, centers);
      reduced.cost = evaluate_cost(red.base, reduced.plan);
      auto lifted = lift_clustering(reduced, red);
      CHECK(std::abs(lifted.cost - reduced.cost) <=
            red.relocation_cost + 1e-9);
    }
  }
}

TEST_CASE("reduced fair optimum lifts within the relocation budget") {
  // OPT_fair(reduced) <= OPT_fair(original) + relocation, and the lifted
  // optimum stays within relocation of the reduced optimum.
  Rng rng(45);
  int done = 0;
  for (int trial = 0; trial < 200 && done < 100; ++trial) {
    int n = 3 + static_cast<int>(rng.below(5));
    Instance inst = random_euclidean_instance(rng, n, 2, 10);
    int k = 1 + static_cast<int>(rng.below(2));
    auto policy = random_policy(rng, static_cast<int>(rng.below(3)), 2,
                                inst.group_sizes);
    auto seed = solve_kmedian(inst, k, trial);
    auto red = consolidate(inst, seed);

    std::vector<int> centers(k);
    for (int c = 0; c < k; ++c) centers[c] = c;
    auto reduced_opt = oracle::brute_fair_assignment(red.base, centers, policy);
    std::vector<int> orig_centers = red.center_location;
    auto original_opt =
        oracle::brute_fair_assignment(inst, orig_centers, policy);
    REQUIRE(reduced_opt.feasible == original_opt.feasible);
    if (!reduced_opt.feasible) continue;
    CHECK(reduced_opt.cost <= original_opt.cost + red.relocation_cost + 1e-9);

    Clustering reduced;
    reduced.point_to_center.resize(n);
    for (int i = 0; i < n; ++i) {
      // oracle returns center location ids of the reduced instance
      reduced.point_to_center[i] = reduced_opt.point_to_center[i];
    }
    reduced.plan =
        plan_from_point_assignment(red.base, reduced.point_to_center, centers);
    reduced.cost = evaluate_cost(red.base, reduced.plan);
    auto lifted = lift_clustering(reduced, red);
    CHECK(lifted.cost <= reduced.cost + red.relocation_cost + 1e-9);
    ++done;
  }
  CHECK(done >= 100);
}
