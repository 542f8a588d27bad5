#include <catch2/catch_amalgamated.hpp>

#include "fairmed/metric.hpp"
#include "fairmed/hst.hpp"
#include "test_helpers.hpp"

using namespace fairmed;
using namespace fairmed::testing;

TEST_CASE("basic distances") {
  auto m = MetricSpace::euclidean({{0, 0}, {3, 4}});
  CHECK(m.distance(0, 1) == 5.0);
  CHECK(m.distance(0, 0) == 0.0);
  CHECK_THROWS_AS(m.distance(0, 7), PreconditionError);
}

TEST_CASE("explicit matrix validation") {
  CHECK_THROWS_AS(MetricSpace::explicit_matrix({{0.5, 1}, {1, 0}}),
                  IngestError);  // nonzero diagonal
  CHECK_THROWS_AS(MetricSpace::explicit_matrix({{0, 1}, {2, 0}}),
                  IngestError);  // asymmetric
  CHECK_THROWS_AS(MetricSpace::explicit_matrix({{0, -1}, {-1, 0}}),
                  IngestError);  // negative
  auto m = MetricSpace::explicit_matrix({{0, 1}, {1 + 1e-12, 0}});
  CHECK(m.distance(0, 1) == m.distance(1, 0));  // tiny asymmetry symmetrized
}

TEST_CASE("triangle audit") {
  auto uniform = MetricSpace::explicit_matrix(
      {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
  CHECK(audit_triangle(uniform).empty());

  auto broken = MetricSpace::explicit_matrix(
      {{0, 1, 10}, {1, 0, 1}, {10, 1, 0}});
  auto violations = audit_triangle(broken);
  REQUIRE_FALSE(violations.empty());
  CHECK(violations[0] == std::array<int, 3>{0, 1, 2});

  auto euclid = MetricSpace::euclidean({{0, 0}, {1, 7}, {4, 2}, {9, 9}});
  CHECK(audit_triangle(euclid).empty());

  CHECK(audit_triangle(broken, /*size_cap=*/2).empty());  // gated
}

TEST_CASE("restrict agrees with the base metric") {
  auto m = MetricSpace::euclidean({{0}, {1}, {5}, {9}});
  auto r = restrict(m, {1, 3});
  CHECK(r.distance(1, 3) == m.distance(1, 3));
  CHECK_THROWS_AS(r.distance(0, 1), PreconditionError);
  CHECK_THROWS_AS(restrict(m, {}), PreconditionError);

  SECTION("restriction of restriction") {
    auto rr = restrict(r, {3});
    CHECK(rr.distance(3, 3) == 0.0);
    CHECK_THROWS_AS(rr.distance(1, 3), PreconditionError);
  }
  SECTION("single location") {
    auto one = restrict(m, {2});
    CHECK(one.distance(2, 2) == 0.0);
  }
  SECTION("compact relabeling") {
    auto compact = restrict_compact(m, {1, 3});
    CHECK(compact.size() == 2);
    CHECK(compact.distance(0, 1) == 8.0);
  }
}

TEST_CASE("tree path metric matches explicit path sums") {
  // Root with leaf 0 at depth 2 and an interior node holding leaves 1 and 2.
  HstTree tree;
  tree.num_locations = 3;
  tree.node_of_location.assign(3, -1);
  tree.root = tree.add_node(-1, 0, 2, -1);
  int a = tree.add_node(tree.root, 2, 1, 0);
  int b = tree.add_node(tree.root, 1, 1, -1);
  int c = tree.add_node(b, 1, 0, 1);
  int d = tree.add_node(b, 4, 0, 2);
  tree.node_of_location[0] = a;
  tree.node_of_location[1] = c;
  tree.node_of_location[2] = d;
  auto m = tree_metric(tree);
  CHECK(m.distance(0, 0) == 0.0);
  CHECK(m.distance(0, 1) == 4.0);   // 2 + 1 + 1
  CHECK(m.distance(0, 2) == 7.0);   // 2 + 1 + 4
  CHECK(m.distance(1, 2) == 5.0);   // 1 + 4
}
