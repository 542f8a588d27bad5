#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "fairmed/errors.hpp"
#include "fairmed/metric.hpp"
#include "fairmed/rng.hpp"

namespace fairmed {

// Rooted edge-weighted tree whose leaves carry locations; interior nodes are
// hierarchy clusters (no points, no centers). Sampled trees are 2-HSTs whose
// path metric dominates the base metric.
struct HstTree {
  struct Node {
    int parent = -1;
    double edge_len = 0;  // to parent
    std::vector<int> children;
    int location = -1;  // >= 0 on location-bearing nodes
    int level = 0;
  };
  std::vector<Node> nodes;
  int root = 0;
  int num_locations = 0;
  std::vector<int> node_of_location;
  double scale = 1.0;  // minimum nonzero base distance used for level radii

  int add_node(int parent, double edge_len, int level, int location) {
    int id = static_cast<int>(nodes.size());
    nodes.push_back(Node{parent, edge_len, {}, location, level});
    if (parent >= 0) nodes[static_cast<std::size_t>(parent)].children.push_back(id);
    return id;
  }
};

namespace detail {

struct TreePathImpl final : MetricImpl {
  HstTree tree;
  std::vector<double> depth;  // root-path length per node
  std::vector<int> hops;      // root-path edge count per node

  void finalize() {
    depth.assign(tree.nodes.size(), 0);
    hops.assign(tree.nodes.size(), 0);
    // nodes are created parents-first
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      int p = tree.nodes[i].parent;
      if (p < 0) continue;
      depth[i] = depth[static_cast<std::size_t>(p)] + tree.nodes[i].edge_len;
      hops[i] = hops[static_cast<std::size_t>(p)] + 1;
    }
  }

  double distance(int u, int v) const override {
    int a = tree.node_of_location[static_cast<std::size_t>(u)];
    int b = tree.node_of_location[static_cast<std::size_t>(v)];
    double du = depth[static_cast<std::size_t>(a)];
    double dv = depth[static_cast<std::size_t>(b)];
    while (hops[static_cast<std::size_t>(a)] > hops[static_cast<std::size_t>(b)])
      a = tree.nodes[static_cast<std::size_t>(a)].parent;
    while (hops[static_cast<std::size_t>(b)] > hops[static_cast<std::size_t>(a)])
      b = tree.nodes[static_cast<std::size_t>(b)].parent;
    while (a != b) {
      a = tree.nodes[static_cast<std::size_t>(a)].parent;
      b = tree.nodes[static_cast<std::size_t>(b)].parent;
    }
    return du + dv - 2 * depth[static_cast<std::size_t>(a)];
  }
  int size() const override { return tree.num_locations; }
};

}  // namespace detail

inline MetricSpace tree_metric(const HstTree& tree) {
  auto impl = std::make_shared<detail::TreePathImpl>();
  impl->tree = tree;
  impl->finalize();
  return MetricSpace(impl);
}

// FRT sampler. A uniformly random permutation and a radius multiplier beta
// with density 1/(x ln 2) on [1,2) drive hierarchical ball-cutting at radii
// beta * 2^(i-1) per level i (distances rescaled so the minimum nonzero
// distance is 1). The laminar cluster family becomes the tree; the edge from
// a level-i cluster to its parent has length 2^(i+1) * scale, which makes the
// path metric dominate the base metric. Locations at distance zero are merged
// before cutting and reattached as zero-length leaves afterwards.
inline HstTree sample_hst(const MetricSpace& m, std::uint64_t seed) {
  const int L = m.size();
  if (L < 1) throw PreconditionError("need at least one location");
  for (int u = 0; u < L; ++u)
    for (int v = u + 1; v < L; ++v)
      if (!std::isfinite(m.distance(u, v)))
        throw IngestError("non-finite distance between locations " +
                          std::to_string(u) + " and " + std::to_string(v));

  HstTree tree;
  tree.num_locations = L;
  tree.node_of_location.assign(static_cast<std::size_t>(L), -1);
  if (L == 1) {
    int leaf = tree.add_node(-1, 0, 0, 0);
    tree.root = leaf;
    tree.node_of_location[0] = leaf;
    return tree;
  }

  // Merge zero-distance locations; representatives carry the cut.
  std::vector<int> rep(static_cast<std::size_t>(L));
  std::iota(rep.begin(), rep.end(), 0);
  for (int u = 0; u < L; ++u)
    for (int v = 0; v < u; ++v)
      if (m.distance(u, v) == 0.0 && rep[static_cast<std::size_t>(u)] == u)
        rep[static_cast<std::size_t>(u)] = rep[static_cast<std::size_t>(v)];
  std::vector<int> reps;
  std::vector<std::vector<int>> members(static_cast<std::size_t>(L));
  for (int u = 0; u < L; ++u) {
    if (rep[static_cast<std::size_t>(u)] == u) reps.push_back(u);
    members[static_cast<std::size_t>(rep[static_cast<std::size_t>(u)])].push_back(u);
  }

  auto attach_locations = [&](int node, int r) {
    const auto& group = members[static_cast<std::size_t>(r)];
    if (group.size() == 1) {
      tree.nodes[static_cast<std::size_t>(node)].location = r;
      tree.node_of_location[static_cast<std::size_t>(r)] = node;
      return;
    }
    for (int loc : group) {
      int leaf = tree.add_node(node, 0, 0, loc);
      tree.node_of_location[static_cast<std::size_t>(loc)] = leaf;
    }
  };

  if (reps.size() == 1) {
    tree.root = tree.add_node(-1, 0, 0, -1);
    attach_locations(tree.root, reps[0]);
    return tree;
  }

  double dmin = std::numeric_limits<double>::infinity();
  double dmax = 0;
  for (std::size_t i = 0; i < reps.size(); ++i)
    for (std::size_t j = i + 1; j < reps.size(); ++j) {
      double d = m.distance(reps[i], reps[j]);
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
  tree.scale = dmin;
  int delta = 1;
  while (std::ldexp(dmin, delta) < dmax) {
    ++delta;
    if (delta > 4096)
      throw IngestError("metric spread too large for tree embedding");
  }

  Rng rng(seed);
  double beta = rng.exp2_unit();
  std::vector<int> perm = reps;
  rng.shuffle(perm);

  struct Cluster {
    std::vector<int> members;
    int node;
  };
  std::vector<Cluster> current;
  tree.root = tree.add_node(-1, 0, delta, -1);
  current.push_back(Cluster{reps, tree.root});

  for (int level = delta - 1; level >= 0; --level) {
    double radius = beta * std::ldexp(dmin, level - 1);
    std::vector<Cluster> next;
    for (auto& cluster : current) {
      std::vector<int> remaining = cluster.members;
      for (int v : perm) {
        if (remaining.empty()) break;
        std::vector<int> inside, outside;
        for (int u : remaining) {
          if (m.distance(u, v) <= radius)
            inside.push_back(u);
          else
            outside.push_back(u);
        }
        if (inside.empty()) continue;
        int node = tree.add_node(cluster.node,
                                 std::ldexp(dmin, level + 1), level, -1);
        next.push_back(Cluster{std::move(inside), node});
        remaining = std::move(outside);
      }
      if (!remaining.empty())
        throw InternalError("ball cutting left locations unassigned");
    }
    current = std::move(next);
  }

  for (const auto& cluster : current) {
    if (cluster.members.size() != 1)
      throw InternalError("bottom-level cluster is not a singleton");
    attach_locations(cluster.node, cluster.members[0]);
  }
  return tree;
}

inline int default_trials(int num_points) {
  return static_cast<int>(
             std::ceil(4.0 * std::log2(static_cast<double>(num_points) + 1))) +
         1;
}

}  // namespace fairmed
