#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "fairmed/best_of.hpp"
#include "fairmed/hst.hpp"
#include "fairmed/oracle.hpp"
#include "test_helpers.hpp"

using namespace fairmed;
using namespace fairmed::testing;

namespace {

// Leaf locations under each internal node, for laminarity checks.
std::vector<std::vector<int>> node_location_sets(const HstTree& tree) {
  std::vector<std::vector<int>> sets(tree.nodes.size());
  // children are created after parents, so a reverse scan aggregates bottom-up
  for (std::size_t i = tree.nodes.size(); i-- > 0;) {
    if (tree.nodes[i].location >= 0) sets[i].push_back(tree.nodes[i].location);
    int p = tree.nodes[i].parent;
    if (p >= 0)
      sets[static_cast<std::size_t>(p)].insert(
          sets[static_cast<std::size_t>(p)].end(), sets[i].begin(),
          sets[i].end());
  }
  return sets;
}

}  // namespace

TEST_CASE("single location tree") {
  auto m = MetricSpace::euclidean({{5.0}});
  auto tree = sample_hst(m, 1);
  CHECK(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].location == 0);
}

TEST_CASE("two locations at distance 1") {
  auto m = line_metric({0, 1});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto tree = sample_hst(m, seed);
    auto tm = tree_metric(tree);
    double d = tm.distance(0, 1);
    CHECK(d >= 1.0);
    CHECK(d <= 4.0);  // 4 * diameter at this scale
  }
}

TEST_CASE("zero-distance locations share a position") {
  auto m = MetricSpace::explicit_matrix(
      {{0, 0, 5}, {0, 0, 5}, {5, 5, 0}});
  auto tree = sample_hst(m, 9);
  auto tm = tree_metric(tree);
  CHECK(tm.distance(0, 1) == 0.0);
  CHECK(tm.distance(0, 2) >= 5.0);
  CHECK(tm.distance(1, 2) == tm.distance(0, 2));
}

TEST_CASE("domination and laminarity on random metrics") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    int n = 2 + static_cast<int>(rng.below(15));
    Instance inst = random_euclidean_instance(rng, n, 1, 40, 2);
    auto tree = sample_hst(inst.metric, 777 + trial);
    auto tm = tree_metric(tree);
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        CHECK(tm.distance(u, v) >= inst.metric.distance(u, v));

    // every leaf is a distinct location
    std::vector<int> seen(static_cast<std::size_t>(n), 0);
    for (const auto& node : tree.nodes)
      if (node.location >= 0) seen[static_cast<std::size_t>(node.location)]++;
    for (int u = 0; u < n; ++u) CHECK(seen[static_cast<std::size_t>(u)] == 1);

    // children partition their parent's locations
    auto sets = node_location_sets(tree);
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      if (tree.nodes[i].children.empty()) continue;
      std::size_t child_total = 0;
      for (int c : tree.nodes[i].children)
        child_total += sets[static_cast<std::size_t>(c)].size();
      std::size_t own = tree.nodes[i].location >= 0 ? 1 : 0;
      CHECK(child_total + own == sets[i].size());
    }

    // positive-length edges halve level by level
    for (const auto& node : tree.nodes) {
      if (node.parent < 0 || node.edge_len == 0) continue;
      CHECK(node.edge_len ==
            std::ldexp(tree.scale, node.level + 1));
      CHECK(tree.nodes[static_cast<std::size_t>(node.parent)].level ==
            node.level + 1);
    }
  }
}

TEST_CASE("expected stretch on the uniform metric") {
  const int n = 8;
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 1.0));
  for (int i = 0; i < n; ++i) d[i][i] = 0;
  auto m = MetricSpace::explicit_matrix(d);
  const int samples = 2000;
  std::vector<double> sum(static_cast<std::size_t>(n * n), 0);
  for (int s = 0; s < samples; ++s) {
    auto tm = tree_metric(sample_hst(m, static_cast<std::uint64_t>(s)));
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        sum[static_cast<std::size_t>(u * n + v)] += tm.distance(u, v);
  }
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      double mean = sum[static_cast<std::size_t>(u * n + v)] / samples;
      CHECK(mean <= 8.0 * std::log(8.0));
    }
}

TEST_CASE("best_of_trees basics") {
  Instance inst = four_point_fixture();
  NodePolicies policies;
  policies.shared = FairnessPolicy::exact({2, 2});

  SECTION("one trial equals one DP run") {
    auto one = best_of_trees(inst, policies, 1, 99);
    auto solo = solve_one_tree(inst, policies,
                               mix_seed(99, kTreeSeedTag, 0));
    CHECK(one.clustering.cost == solo.true_cost);
    CHECK(one.trials == 1);
  }
  SECTION("already fair instance costs zero on any tree") {
    Instance fair = line_instance({0, 0, 9, 9}, {0, 1, 0, 1}, 2);
    NodePolicies p2;
    p2.shared = FairnessPolicy::exact({2, 2});
    auto best = best_of_trees(fair, p2, 3, 7);
    CHECK(best.clustering.cost == 0.0);
  }
  SECTION("fixture reaches the brute-force optimum") {
    for (int rep = 0; rep < 20; ++rep) {
      auto best = best_of_trees(inst, policies, 4, 1000 + rep);
      CHECK(best.clustering.cost == 2.0);
    }
  }
  SECTION("cost is non-increasing in trials") {
    Rng rng(55);
    for (int rep = 0; rep < 10; ++rep) {
      Instance rnd = random_consolidated_instance(rng, 7, 2, 3);
      NodePolicies tp;
      tp.shared = trivial_policy(2);
      double prev = -1;
      for (int trials = 1; trials <= 4; ++trials) {
        auto best = best_of_trees(rnd, tp, trials, 13 * rep);
        if (prev >= 0) CHECK(best.clustering.cost <= prev + 1e-12);
        prev = best.clustering.cost;
      }
    }
  }
  SECTION("threads do not change the winner") {
    Rng rng(56);
    Instance rnd = random_consolidated_instance(rng, 8, 2, 3);
    NodePolicies tp;
    tp.shared = FairnessPolicy::exact({rnd.group_sizes[0], rnd.group_sizes[1]});
    auto serial = best_of_trees(rnd, tp, 6, 21, 1);
    auto parallel = best_of_trees(rnd, tp, 6, 21, 4);
    CHECK(serial.clustering.cost == parallel.clustering.cost);
    CHECK(serial.winning_trial == parallel.winning_trial);
    CHECK(serial.clustering.point_to_center ==
          parallel.clustering.point_to_center);
  }
  SECTION("unsatisfiable policy is reported as infeasible") {
    Instance one = line_instance({0.0}, {0}, 2);
    NodePolicies p;
    p.shared = FairnessPolicy::alpha_beta({{1, 2}, {1, 2}}, {{1, 2}, {1, 2}});
    CHECK_THROWS_AS(best_of_trees(one, p, 2, 5), InfeasibleError);
  }
}
