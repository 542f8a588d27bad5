#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fairmed/assignment.hpp"
#include "fairmed/errors.hpp"
#include "fairmed/hst.hpp"
#include "fairmed/policy.hpp"
#include "fairmed/profile.hpp"

namespace fairmed {

// Binary tree over locations: every non-leaf node has exactly two children.
// Steiner nodes carry no points and host no centers; each non-Steiner node is
// a center with the profile of its location.
struct BinaryTree {
  struct Node {
    int parent = -1;
    double edge_len = 0;  // to parent
    int left = -1;
    int right = -1;
    bool steiner = true;
    int location = -1;
    Profile v;
  };
  std::vector<Node> nodes;
  int root = 0;
  int num_groups = 0;
  std::vector<int> node_of_source;  // original tree node -> node here

  bool is_leaf(int u) const { return nodes[static_cast<std::size_t>(u)].left < 0; }
};

// The conversion of an arbitrary rooted location tree. A node with c > 2
// children is replaced by a path u = u_0, u_1, ..., u_{c-2} of zero-length
// edges through fresh Steiner nodes: child 1 stays at u, child j moves to
// u_{j-1}, and the last child moves to u_{c-2}, all keeping their original
// edge lengths. Nodes with a single child get a zero-profile Steiner leaf.
// Path distances between original nodes are unchanged.
inline BinaryTree binarize(const HstTree& tree,
                           const std::vector<Profile>& profiles) {
  BinaryTree bt;
  for (const auto& p : profiles)
    bt.num_groups = static_cast<int>(p.size());
  bt.node_of_source.assign(tree.nodes.size(), -1);

  auto new_node = [&](int parent, double edge, bool steiner, int location) {
    BinaryTree::Node node;
    node.parent = parent;
    node.edge_len = edge;
    node.steiner = steiner;
    node.location = location;
    node.v = steiner ? zero_profile(bt.num_groups)
                     : profiles[static_cast<std::size_t>(location)];
    bt.nodes.push_back(std::move(node));
    return static_cast<int>(bt.nodes.size()) - 1;
  };
  auto set_child = [&](int parent, bool left, int child) {
    if (parent < 0) return;
    auto& p = bt.nodes[static_cast<std::size_t>(parent)];
    (left ? p.left : p.right) = child;
  };

  struct Item {
    int src;
    int dst_parent;
    bool left_slot;
    double edge;
  };
  std::vector<Item> stack;
  stack.push_back({tree.root, -1, true, 0});
  while (!stack.empty()) {
    Item item = stack.back();
    stack.pop_back();
    const auto& src = tree.nodes[static_cast<std::size_t>(item.src)];
    int dst = new_node(item.dst_parent, item.edge, src.location < 0,
                       src.location);
    set_child(item.dst_parent, item.left_slot, dst);
    if (item.dst_parent < 0) bt.root = dst;
    bt.node_of_source[static_cast<std::size_t>(item.src)] = dst;

    const auto& kids = src.children;
    const std::size_t c = kids.size();
    auto child_edge = [&](std::size_t j) {
      return tree.nodes[static_cast<std::size_t>(kids[j])].edge_len;
    };
    if (c == 0) continue;
    if (c == 1) {
      int pad = new_node(dst, 0, true, -1);
      set_child(dst, false, pad);
      stack.push_back({kids[0], dst, true, child_edge(0)});
      continue;
    }
    if (c == 2) {
      stack.push_back({kids[1], dst, false, child_edge(1)});
      stack.push_back({kids[0], dst, true, child_edge(0)});
      continue;
    }
    // Path of c-2 Steiner nodes; children reattached in order.
    std::vector<int> path{dst};
    for (std::size_t t = 1; t + 1 < c; ++t) {
      int s = new_node(path.back(), 0, true, -1);
      set_child(path.back(), false, s);
      path.push_back(s);
    }
    for (std::size_t j = c; j-- > 0;) {
      int holder = path[std::min(j, c - 2)];
      bool left = j < c - 1;
      stack.push_back({kids[j], holder, left, child_edge(j)});
    }
  }
  return bt;
}

struct BTreeDepths {
  std::vector<double> len;
  std::vector<int> hops;
};

inline BTreeDepths binary_tree_depths(const BinaryTree& bt) {
  BTreeDepths d;
  d.len.assign(bt.nodes.size(), 0);
  d.hops.assign(bt.nodes.size(), 0);
  for (std::size_t i = 0; i < bt.nodes.size(); ++i) {
    int p = bt.nodes[i].parent;
    if (p < 0) continue;
    d.len[i] = d.len[static_cast<std::size_t>(p)] + bt.nodes[i].edge_len;
    d.hops[i] = d.hops[static_cast<std::size_t>(p)] + 1;
  }
  return d;
}

inline double binary_tree_distance(const BinaryTree& bt, const BTreeDepths& d,
                                   int a, int b) {
  double da = d.len[static_cast<std::size_t>(a)];
  double db = d.len[static_cast<std::size_t>(b)];
  while (d.hops[static_cast<std::size_t>(a)] > d.hops[static_cast<std::size_t>(b)])
    a = bt.nodes[static_cast<std::size_t>(a)].parent;
  while (d.hops[static_cast<std::size_t>(b)] > d.hops[static_cast<std::size_t>(a)])
    b = bt.nodes[static_cast<std::size_t>(b)].parent;
  while (a != b) {
    a = bt.nodes[static_cast<std::size_t>(a)].parent;
    b = bt.nodes[static_cast<std::size_t>(b)].parent;
  }
  return da + db - 2 * d.len[static_cast<std::size_t>(a)];
}

// Fairness policies for the DP: one shared policy, optionally overridden per
// location (the reduced exact-fairness run shifts each center's policy by
// its frozen profile).
struct NodePolicies {
  FairnessPolicy shared;
  std::unordered_map<int, FairnessPolicy> per_location;

  const FairnessPolicy& at(int location) const {
    auto it = per_location.find(location);
    return it == per_location.end() ? shared : it->second;
  }
};

struct DpEntry {
  double cost = 0;
  Profile qy, qz;  // child net-import split (empty on leaves)
};

using NodeTable = std::unordered_map<Profile, DpEntry, ProfileHash>;

struct DpTable {
  std::vector<NodeTable> tables;        // per node, keyed by net-import q
  std::vector<Profile> subtree_totals;  // v(T_u) per node
  std::vector<long long> group_totals;
  std::size_t total_entries = 0;

  bool feasible(const BinaryTree& bt) const {
    const auto& root = tables[static_cast<std::size_t>(bt.root)];
    return root.find(zero_profile(static_cast<int>(group_totals.size()))) !=
           root.end();
  }
};

inline std::vector<int> post_order(const BinaryTree& bt) {
  std::vector<int> order;
  order.reserve(bt.nodes.size());
  std::vector<std::pair<int, bool>> stack{{bt.root, false}};
  while (!stack.empty()) {
    auto [u, expanded] = stack.back();
    stack.pop_back();
    if (expanded) {
      order.push_back(u);
      continue;
    }
    stack.push_back({u, true});
    if (!bt.is_leaf(u)) {
      stack.push_back({bt.nodes[static_cast<std::size_t>(u)].right, false});
      stack.push_back({bt.nodes[static_cast<std::size_t>(u)].left, false});
    }
  }
  return order;
}

// Bottom-up fill of M[u, q]: the minimum cost of serving subtree T_u when its
// per-group net imports equal q. Leaves cost 0 where v(u) + q is admissible
// (Steiner leaves only at q = 0); an internal node combines child entries,
// paying each child's edge length times the number of points crossing it,
// subject to v(u) + q - q_y - q_z being admissible at non-Steiner u and
// q = q_y + q_z at Steiner u. Entries outside the reachability box
// q_j in [-v_j(T_u), total_j - v_j(T_u)] are pruned; cost ties keep the
// lexicographically smallest (q_y, q_z).
inline DpTable solve_dp(const BinaryTree& bt, const NodePolicies& policies) {
  const int groups = bt.num_groups;
  DpTable dp;
  dp.tables.assign(bt.nodes.size(), {});
  dp.subtree_totals.assign(bt.nodes.size(), zero_profile(groups));
  dp.group_totals.assign(static_cast<std::size_t>(groups), 0);
  for (const auto& node : bt.nodes)
    for (int j = 0; j < groups; ++j)
      dp.group_totals[static_cast<std::size_t>(j)] +=
          node.v[static_cast<std::size_t>(j)];

  std::unordered_map<int, std::vector<Profile>> admissible_cache;
  auto admissible = [&](int location) -> const std::vector<Profile>& {
    int key = policies.per_location.count(location) ? location : -1;
    auto it = admissible_cache.find(key);
    if (it == admissible_cache.end())
      it = admissible_cache
               .emplace(key, enumerate_admissible(policies.at(location),
                                                  dp.group_totals))
               .first;
    return it->second;
  };

  auto order = post_order(bt);
  for (int u : order) {
    const auto& node = bt.nodes[static_cast<std::size_t>(u)];
    auto& sub = dp.subtree_totals[static_cast<std::size_t>(u)];
    sub = node.v;
    if (!bt.is_leaf(u)) {
      sub = profile_add(sub, dp.subtree_totals[static_cast<std::size_t>(node.left)]);
      sub = profile_add(sub, dp.subtree_totals[static_cast<std::size_t>(node.right)]);
    }
    auto in_bounds = [&](const Profile& q) {
      for (int j = 0; j < groups; ++j) {
        long long lo = -static_cast<long long>(sub[static_cast<std::size_t>(j)]);
        long long hi = dp.group_totals[static_cast<std::size_t>(j)] -
                       sub[static_cast<std::size_t>(j)];
        if (q[static_cast<std::size_t>(j)] < lo || q[static_cast<std::size_t>(j)] > hi)
          return false;
      }
      return true;
    };
    auto& table = dp.tables[static_cast<std::size_t>(u)];
    auto consider = [&](Profile q, double cost, const Profile& qy,
                        const Profile& qz) {
      if (!in_bounds(q)) return;
      auto it = table.find(q);
      if (it == table.end()) {
        table.emplace(std::move(q), DpEntry{cost, qy, qz});
        return;
      }
      DpEntry& cur = it->second;
      if (cost < cur.cost ||
          (cost == cur.cost &&
           (qy < cur.qy || (qy == cur.qy && qz < cur.qz))))
        cur = DpEntry{cost, qy, qz};
    };

    if (bt.is_leaf(u)) {
      if (node.steiner) {
        table.emplace(zero_profile(groups), DpEntry{});
      } else {
        for (const Profile& p : admissible(node.location))
          table.emplace(profile_sub(p, node.v), DpEntry{});
      }
    } else {
      const int y = node.left, z = node.right;
      const double dy = bt.nodes[static_cast<std::size_t>(y)].edge_len;
      const double dz = bt.nodes[static_cast<std::size_t>(z)].edge_len;
      for (const auto& [qy, ey] : dp.tables[static_cast<std::size_t>(y)]) {
        for (const auto& [qz, ez] : dp.tables[static_cast<std::size_t>(z)]) {
          double base = ey.cost + ez.cost +
                        dy * static_cast<double>(profile_norm1(qy)) +
                        dz * static_cast<double>(profile_norm1(qz));
          Profile q_children = profile_add(qy, qz);
          if (node.steiner) {
            consider(q_children, base, qy, qz);
          } else {
            for (const Profile& p : admissible(node.location))
              consider(profile_add(profile_sub(p, node.v), q_children), base,
                       qy, qz);
          }
        }
      }
    }
    dp.total_entries += table.size();
  }
  return dp;
}

struct ReconstructResult {
  AssignmentPlan plan;
  double tree_cost = 0;
};

// Walks the back-references from M[root, 0], fixes each center's cluster
// profile, then turns the per-edge net flows into location-to-center flows
// by stripping source-to-sink paths group by group (sources in ascending
// node id, walks toward the lowest-id neighbor with remaining capacity).
// Every strip follows edge directions, so it traces the unique tree path
// between its endpoints and the plan's tree-metric cost reproduces M[root,0].
inline ReconstructResult reconstruct(const BinaryTree& bt,
                                     const NodePolicies& policies,
                                     const DpTable& dp) {
  const int groups = bt.num_groups;
  const std::size_t n = bt.nodes.size();
  Profile zero = zero_profile(groups);
  if (!dp.tables[static_cast<std::size_t>(bt.root)].count(zero))
    throw InfeasibleError("no fair assignment exists for this policy");

  std::vector<Profile> import_of(n, zero);       // net imports per subtree
  std::vector<Profile> cluster(n, zero);         // per non-Steiner node
  std::vector<std::pair<int, Profile>> stack{{bt.root, zero}};
  while (!stack.empty()) {
    auto [u, q] = stack.back();
    stack.pop_back();
    import_of[static_cast<std::size_t>(u)] = q;
    const auto& node = bt.nodes[static_cast<std::size_t>(u)];
    auto it = dp.tables[static_cast<std::size_t>(u)].find(q);
    if (it == dp.tables[static_cast<std::size_t>(u)].end())
      throw InternalError("missing DP entry during reconstruction");
    const DpEntry& entry = it->second;
    if (bt.is_leaf(u)) {
      if (!node.steiner) cluster[static_cast<std::size_t>(u)] = profile_add(node.v, q);
      continue;
    }
    Profile p = profile_sub(profile_sub(profile_add(node.v, q), entry.qy),
                            entry.qz);
    if (node.steiner) {
      if (!profile_is_zero(p))
        throw InternalError("Steiner node with nonzero residual profile");
    } else {
      cluster[static_cast<std::size_t>(u)] = p;
    }
    stack.push_back({node.left, entry.qy});
    stack.push_back({node.right, entry.qz});
  }
  for (std::size_t u = 0; u < n; ++u) {
    const auto& node = bt.nodes[u];
    if (!node.steiner && !policies.at(node.location).admits(cluster[u]))
      throw InternalError("reconstructed cluster violates the policy at location " +
                          std::to_string(node.location));
  }

  AssignmentPlan plan;
  for (const auto& node : bt.nodes)
    if (!node.steiner) plan.centers.push_back(node.location);
  std::sort(plan.centers.begin(), plan.centers.end());

  double strip_cost = 0;
  for (int j = 0; j < groups; ++j) {
    // Directed residual capacities on tree edges, identified by the child
    // endpoint: cap_down = parent-to-child, cap_up = child-to-parent.
    std::vector<long long> cap_down(n, 0), cap_up(n, 0);
    std::vector<long long> supply(n, 0), demand(n, 0);
    for (std::size_t u = 0; u < n; ++u) {
      int q = import_of[u][static_cast<std::size_t>(j)];
      if (q > 0) cap_down[u] = q;
      if (q < 0) cap_up[u] = -q;
      const auto& node = bt.nodes[u];
      if (!node.steiner) {
        long long excess = node.v[static_cast<std::size_t>(j)] -
                           cluster[u][static_cast<std::size_t>(j)];
        if (excess > 0) supply[u] = excess;
        if (excess < 0) demand[u] = -excess;
      }
    }
    for (std::size_t src = 0; src < n; ++src) {
      while (supply[src] > 0) {
        std::size_t cur = src;
        long long limit = supply[src];
        std::vector<std::pair<std::size_t, bool>> path;  // (child endpoint, down?)
        double path_len = 0;
        while (true) {
          if (cur != src && demand[cur] > 0) break;
          int next = -1;
          bool down = false;
          const auto& node = bt.nodes[cur];
          if (node.parent >= 0 && cap_up[cur] > 0) next = node.parent;
          auto try_child = [&](int child) {
            if (child >= 0 && cap_down[static_cast<std::size_t>(child)] > 0 &&
                (next < 0 || child < next)) {
              next = child;
              down = true;
            }
          };
          try_child(node.left);
          try_child(node.right);
          if (next < 0)
            throw InternalError("flow decomposition is stuck; DP flows inconsistent");
          std::size_t edge_child = down ? static_cast<std::size_t>(next) : cur;
          limit = std::min(limit, down ? cap_down[edge_child] : cap_up[edge_child]);
          path_len += bt.nodes[edge_child].edge_len;
          path.emplace_back(edge_child, down);
          cur = static_cast<std::size_t>(next);
        }
        long long amount = std::min(limit, demand[cur]);
        for (auto [edge_child, down] : path)
          (down ? cap_down[edge_child] : cap_up[edge_child]) -= amount;
        supply[src] -= amount;
        demand[cur] -= amount;
        Profile flow = zero;
        flow[static_cast<std::size_t>(j)] = static_cast<int>(amount);
        plan.add_flow(bt.nodes[src].location, bt.nodes[cur].location, flow);
        strip_cost += static_cast<double>(amount) * path_len;
      }
    }
    for (std::size_t u = 0; u < n; ++u)
      if (cap_down[u] || cap_up[u] || supply[u] || demand[u])
        throw InternalError("flow decomposition left residuals");
  }
  // Points that stay at their own center.
  for (std::size_t u = 0; u < n; ++u) {
    const auto& node = bt.nodes[u];
    if (node.steiner) continue;
    Profile stay = zero;
    for (int j = 0; j < groups; ++j)
      stay[static_cast<std::size_t>(j)] =
          std::min(node.v[static_cast<std::size_t>(j)],
                   cluster[u][static_cast<std::size_t>(j)]);
    plan.add_flow(node.location, node.location, stay);
  }
  for (std::size_t u = 0; u < n; ++u) {
    const auto& node = bt.nodes[u];
    if (node.steiner) continue;
    if (center_profile(plan, node.location, groups) != cluster[u])
      throw InternalError("decomposed flows do not add up to cluster profiles");
  }

  ReconstructResult out;
  double root_cost =
      dp.tables[static_cast<std::size_t>(bt.root)].at(zero).cost;
  if (std::abs(strip_cost - root_cost) > 1e-9 * std::max(1.0, root_cost))
    throw InternalError("reconstructed cost " + std::to_string(strip_cost) +
                        " does not match DP value " + std::to_string(root_cost));
  out.plan = std::move(plan);
  out.tree_cost = root_cost;
  return out;
}

// Line-oriented debug dump: one line per stored entry, sorted.
inline void dump_dp(const BinaryTree& bt, const DpTable& dp,
                    std::ostream& os) {
  for (std::size_t u = 0; u < bt.nodes.size(); ++u) {
    std::map<Profile, double> sorted;
    for (const auto& [q, e] : dp.tables[u]) sorted.emplace(q, e.cost);
    for (const auto& [q, cost] : sorted) {
      os << "node=" << u << " loc=";
      if (bt.nodes[u].location >= 0)
        os << bt.nodes[u].location;
      else
        os << "-";
      os << " q=" << profile_to_string(q) << " cost=" << cost << "\n";
    }
  }
}

}  // namespace fairmed
