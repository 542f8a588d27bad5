#include <catch2/catch_amalgamated.hpp>

#include "fairmed/oracle.hpp"
#include "fairmed/tree_dp.hpp"
#include "test_helpers.hpp"

using namespace fairmed;
using namespace fairmed::testing;

namespace {

HstTree fixture_tree() {
  // Locations 0 and 1 joined by an edge of length 1; the tree metric equals
  // the fixture's base metric.
  HstTree tree;
  tree.num_locations = 2;
  tree.node_of_location.assign(2, -1);
  tree.root = tree.add_node(-1, 0, 1, 0);
  int b = tree.add_node(tree.root, 1, 0, 1);
  tree.node_of_location[0] = tree.root;
  tree.node_of_location[1] = b;
  return tree;
}

BinaryTree leaf_only(bool steiner, const Profile& v) {
  BinaryTree bt;
  bt.num_groups = static_cast<int>(v.size());
  BinaryTree::Node node;
  node.steiner = steiner;
  node.location = steiner ? -1 : 0;
  node.v = v;
  bt.nodes.push_back(node);
  bt.root = 0;
  return bt;
}

}  // namespace

TEST_CASE("binarize reproduces the flattening of a four-child root") {
  HstTree tree;
  tree.num_locations = 5;
  tree.node_of_location.assign(5, -1);
  tree.root = tree.add_node(-1, 0, 1, 0);
  for (int loc = 1; loc <= 4; ++loc) {
    int node = tree.add_node(tree.root, static_cast<double>(loc), 0, loc);
    tree.node_of_location[static_cast<std::size_t>(loc)] = node;
  }
  std::vector<Profile> profiles(5, Profile{1});
  auto bt = binarize(tree, profiles);

  REQUIRE(bt.nodes.size() == 7);  // 5 original + 2 Steiner path nodes
  const auto& root = bt.nodes[static_cast<std::size_t>(bt.root)];
  REQUIRE_FALSE(root.steiner);
  // root keeps child 1 and gains a Steiner child on a zero-length edge
  const auto& s1 = bt.nodes[static_cast<std::size_t>(root.right)];
  CHECK(bt.nodes[static_cast<std::size_t>(root.left)].location == 1);
  CHECK(s1.steiner);
  CHECK(s1.edge_len == 0.0);
  CHECK(bt.nodes[static_cast<std::size_t>(s1.left)].location == 2);
  const auto& s2 = bt.nodes[static_cast<std::size_t>(s1.right)];
  CHECK(s2.steiner);
  CHECK(bt.nodes[static_cast<std::size_t>(s2.left)].location == 3);
  CHECK(bt.nodes[static_cast<std::size_t>(s2.right)].location == 4);
  // reattached children keep their original edge lengths
  CHECK(bt.nodes[static_cast<std::size_t>(s1.left)].edge_len == 2.0);
  CHECK(bt.nodes[static_cast<std::size_t>(s2.left)].edge_len == 3.0);
  CHECK(bt.nodes[static_cast<std::size_t>(s2.right)].edge_len == 4.0);
}

TEST_CASE("binarize leaves a proper binary tree unchanged") {
  HstTree tree;
  tree.num_locations = 3;
  tree.node_of_location.assign(3, -1);
  tree.root = tree.add_node(-1, 0, 1, 0);
  int b = tree.add_node(tree.root, 2, 0, 1);
  int c = tree.add_node(tree.root, 3, 0, 2);
  tree.node_of_location = {tree.root, b, c};
  std::vector<Profile> profiles(3, Profile{1});
  auto bt = binarize(tree, profiles);
  CHECK(bt.nodes.size() == 3);
  const auto& root = bt.nodes[static_cast<std::size_t>(bt.root)];
  CHECK(bt.nodes[static_cast<std::size_t>(root.left)].edge_len == 2.0);
  CHECK(bt.nodes[static_cast<std::size_t>(root.right)].edge_len == 3.0);
}

TEST_CASE("binarize preserves pairwise distances") {
  Rng rng(808);
  for (int trial = 0; trial < 100; ++trial) {
    int m = 2 + static_cast<int>(rng.below(7));
    auto rt = random_location_tree(rng, m);
    std::vector<Profile> profiles(static_cast<std::size_t>(m), Profile{0});
    auto bt = binarize(rt.tree, profiles);
    auto depths = binary_tree_depths(bt);
    for (std::size_t a = 0; a < rt.tree.nodes.size(); ++a)
      for (std::size_t b = a + 1; b < rt.tree.nodes.size(); ++b) {
        int la = rt.tree.nodes[a].location;
        int lb = rt.tree.nodes[b].location;
        REQUIRE(la >= 0);
        REQUIRE(lb >= 0);
        double original = rt.metric.distance(la, lb);
        double mapped = binary_tree_distance(
            bt, depths, bt.node_of_source[a], bt.node_of_source[b]);
        CHECK(mapped == original);
      }
    // every non-leaf has exactly two children
    for (const auto& node : bt.nodes)
      CHECK((node.left < 0) == (node.right < 0));
  }
}

TEST_CASE("leaf tables") {
  NodePolicies exact;
  exact.shared = FairnessPolicy::exact({2, 2});
  SECTION("steiner leaf admits only q = 0") {
    auto bt = leaf_only(true, {0, 0});
    auto dp = solve_dp(bt, exact);
    CHECK(dp.tables[0].size() == 1);
    CHECK(dp.tables[0].at({0, 0}).cost == 0.0);
    CHECK(dp.tables[0].find({1, 0}) == dp.tables[0].end());
  }
  SECTION("non-steiner leaf admits fair completions") {
    // The leaf must sit inside a larger tree for imports to be reachable.
    HstTree tree;
    tree.num_locations = 2;
    tree.node_of_location.assign(2, -1);
    tree.root = tree.add_node(-1, 0, 1, 0);
    int b = tree.add_node(tree.root, 1, 0, 1);
    tree.node_of_location = {tree.root, b};
    auto bt = binarize(tree, {{1, 1}, {1, 1}});
    auto dp = solve_dp(bt, exact);
    int leaf = -1;
    for (std::size_t i = 0; i < bt.nodes.size(); ++i)
      if (bt.nodes[i].location == 1) leaf = static_cast<int>(i);
    REQUIRE(leaf >= 0);
    const auto& table = dp.tables[static_cast<std::size_t>(leaf)];
    CHECK(table.at({0, 0}).cost == 0.0);
    CHECK(table.at({1, 1}).cost == 0.0);
    CHECK(table.find({1, 0}) == table.end());
    CHECK(table.at({-1, -1}).cost == 0.0);  // exporting everything
  }
}

TEST_CASE("four-point fixture solves to cost 2") {
  Instance inst = four_point_fixture();
  auto tree = fixture_tree();
  auto bt = binarize(tree, location_profiles(inst));
  NodePolicies policies;
  policies.shared = FairnessPolicy::exact({2, 2});
  auto dp = solve_dp(bt, policies);
  REQUIRE(dp.feasible(bt));
  auto rec = reconstruct(bt, policies, dp);
  CHECK(rec.tree_cost == 2.0);
  // Ties leave several optimal witnesses (both centers at (1,1), or one
  // center taking everything); any of them must be exactly fair and add up.
  Profile total = profile_add(center_profile(rec.plan, 0, 2),
                              center_profile(rec.plan, 1, 2));
  CHECK(total == Profile{2, 2});
  for (int c : rec.plan.centers)
    CHECK(policies.shared.admits(center_profile(rec.plan, c, 2)));
  CHECK(evaluate_cost(inst, rec.plan) == 2.0);
}

TEST_CASE("all-local optimum keeps flows on the diagonal") {
  // Each location is exactly fair on its own, so nothing should move.
  MetricSpace m = line_metric({0, 9});
  Instance inst = make_instance({0, 1, 0, 1}, {0, 0, 1, 1}, m, 2);
  auto tree = sample_hst(inst.metric, 12);
  auto bt = binarize(tree, location_profiles(inst));
  NodePolicies policies;
  policies.shared = FairnessPolicy::exact({2, 2});
  auto dp = solve_dp(bt, policies);
  auto rec = reconstruct(bt, policies, dp);
  CHECK(rec.tree_cost == 0.0);
  for (const auto& [key, p] : rec.plan.flows) CHECK(key.first == key.second);
}

TEST_CASE("zero-point instance is feasible at zero cost") {
  HstTree tree = fixture_tree();
  std::vector<Profile> profiles(2, Profile{0, 0});
  auto bt = binarize(tree, profiles);
  NodePolicies policies;
  policies.shared = FairnessPolicy::exact({0, 0});
  auto dp = solve_dp(bt, policies);
  REQUIRE(dp.feasible(bt));
  auto rec = reconstruct(bt, policies, dp);
  CHECK(rec.tree_cost == 0.0);
  CHECK(rec.plan.flows.empty());
}

TEST_CASE("dp matches the brute-force oracle") {
  Rng rng(90210);
  oracle::OracleLimits limits;
  limits.max_centers = 4;
  int feasible_seen = 0;
  for (int trial = 0; trial < 120; ++trial) {
    int m = 2 + static_cast<int>(rng.below(3));  // 2..4 locations
    int n = 2 + static_cast<int>(rng.below(7));  // 2..8 points
    auto rt = random_location_tree(rng, m);
    Instance inst = random_tree_instance(rng, rt, n, 2);
    auto policy =
        random_policy(rng, trial % 3, 2, inst.group_sizes);

    auto bt = binarize(rt.tree, location_profiles(inst));
    NodePolicies policies;
    policies.shared = policy;
    auto dp = solve_dp(bt, policies);

    std::vector<int> centers(static_cast<std::size_t>(m));
    for (int c = 0; c < m; ++c) centers[static_cast<std::size_t>(c)] = c;
    auto brute = oracle::brute_fair_assignment(inst, centers, policy, limits);

    REQUIRE(dp.feasible(bt) == brute.feasible);
    if (!brute.feasible) continue;
    ++feasible_seen;
    auto rec = reconstruct(bt, policies, dp);
    CHECK(rec.tree_cost == brute.cost);  // integer weights: bit-exact
    // reconstructed plan reproduces the DP value through the tree metric
    CHECK(evaluate_cost(inst, rec.plan) == rec.tree_cost);
    // zero violation at every center
    for (int c : rec.plan.centers)
      CHECK(policy.admits(center_profile(rec.plan, c, inst.num_groups)));
  }
  CHECK(feasible_seen >= 60);
}

TEST_CASE("admitting more profiles never raises the optimum") {
  Rng rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    int m = 2 + static_cast<int>(rng.below(3));
    int n = 2 + static_cast<int>(rng.below(6));
    auto rt = random_location_tree(rng, m);
    Instance inst = random_tree_instance(rng, rt, n, 2);

    long long a = static_cast<long long>(rng.below(4));
    long long b = a + static_cast<long long>(rng.below(11 - a));
    long long a2 = static_cast<long long>(rng.below(a + 1));       // a2 <= a
    long long b2 = b + static_cast<long long>(rng.below(11 - b));  // b2 >= b
    auto narrow = FairnessPolicy::alpha_beta({{a, 10}, {a, 10}},
                                             {{b, 10}, {b, 10}});
    auto wide = FairnessPolicy::alpha_beta({{a2, 10}, {a2, 10}},
                                           {{b2, 10}, {b2, 10}});

    auto bt = binarize(rt.tree, location_profiles(inst));
    NodePolicies pn, pw;
    pn.shared = narrow;
    pw.shared = wide;
    auto dpn = solve_dp(bt, pn);
    auto dpw = solve_dp(bt, pw);
    if (!dpn.feasible(bt)) continue;
    REQUIRE(dpw.feasible(bt));
    Profile zero = zero_profile(2);
    CHECK(dpw.tables[static_cast<std::size_t>(bt.root)].at(zero).cost <=
          dpn.tables[static_cast<std::size_t>(bt.root)].at(zero).cost);
  }
}

TEST_CASE("table sizes respect the reachability bound") {
  Rng rng(92);
  for (int trial = 0; trial < 20; ++trial) {
    int m = 2 + static_cast<int>(rng.below(3));
    int n = 2 + static_cast<int>(rng.below(7));
    auto rt = random_location_tree(rng, m);
    Instance inst = random_tree_instance(rng, rt, n, 2);
    auto bt = binarize(rt.tree, location_profiles(inst));
    NodePolicies policies;
    policies.shared = trivial_policy(2);
    auto dp = solve_dp(bt, policies);
    std::size_t cap = 1;
    for (long long t : dp.group_totals) cap *= static_cast<std::size_t>(t + 1);
    for (const auto& table : dp.tables) CHECK(table.size() <= cap);
  }
}

TEST_CASE("reconstruction cost is bit-exact on integer trees") {
  Rng rng(93);
  int solved = 0;
  for (int trial = 0; trial < 200; ++trial) {
    int m = 2 + static_cast<int>(rng.below(3));
    int n = 1 + static_cast<int>(rng.below(8));
    auto rt = random_location_tree(rng, m);
    Instance inst = random_tree_instance(rng, rt, n, 2);
    auto policy = random_policy(rng, trial % 3, 2, inst.group_sizes);
    auto bt = binarize(rt.tree, location_profiles(inst));
    NodePolicies policies;
    policies.shared = policy;
    auto dp = solve_dp(bt, policies);
    if (!dp.feasible(bt)) continue;
    auto rec = reconstruct(bt, policies, dp);
    CHECK(evaluate_cost(inst, rec.plan) == rec.tree_cost);
    ++solved;
  }
  CHECK(solved >= 100);
}

TEST_CASE("dp table dump is line-oriented and sorted") {
  Instance inst = four_point_fixture();
  auto tree = fixture_tree();
  auto bt = binarize(tree, location_profiles(inst));
  NodePolicies policies;
  policies.shared = FairnessPolicy::exact({2, 2});
  auto dp = solve_dp(bt, policies);
  std::ostringstream os;
  dump_dp(bt, dp, os);
  std::string text = os.str();
  CHECK(text.find("node=0") != std::string::npos);
  CHECK(text.find("q=(0,0)") != std::string::npos);
  std::ostringstream again;
  dump_dp(bt, dp, again);
  CHECK(text == again.str());
}
