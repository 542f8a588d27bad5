#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fairmed/assignment.hpp"
#include "fairmed/best_of.hpp"
#include "fairmed/consolidate.hpp"
#include "fairmed/errors.hpp"
#include "fairmed/instance.hpp"
#include "fairmed/kmedian.hpp"
#include "fairmed/policy.hpp"
#include "fairmed/simplex.hpp"

namespace fairmed {

constexpr std::uint64_t kKMedianSeedTag = 0x6b6d6431ULL;
constexpr std::uint64_t kExactDpSeedTag = 0x65786474ULL;

// Minimal exactly fair set size: f_j = |X_j| / gcd, f = sum f_j, so that
// (f_1, ..., f_l) is the smallest positive integer vector proportional to
// the group sizes.
struct FairletShape {
  long long size = 0;                // f
  std::vector<long long> per_group;  // f_j
};

inline FairletShape compute_fairlet_shape(
    const std::vector<long long>& group_sizes) {
  if (group_sizes.empty())
    throw PreconditionError("fairlet shape needs at least one group");
  long long g = 0;
  for (long long s : group_sizes) {
    if (s < 1)
      throw PreconditionError(
          "fairlet shape requires every group nonempty (remove empty groups "
          "upstream)");
    g = std::gcd(g, s);
  }
  FairletShape shape;
  for (long long s : group_sizes) {
    shape.per_group.push_back(s / g);
    shape.size += s / g;
  }
  return shape;
}

struct NearFairResult {
  AssignmentPlan plan;
  std::vector<int> point_to_center;
  double cost = 0;
  double lp_value = 0;  // fractional optimum; rounding never exceeds it
  double gamma = 0;     // realized additive violation, guaranteed <= 3
};

namespace detail {

inline long long rat_floor(const lp::Rat& x) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return q.get_si();
}

inline bool rat_integral(const lp::Rat& x) { return x.get_den() == 1; }

// Rounds one group's fractional location-by-center matrix to integers while
// keeping row sums exact and every column sum within its original unit cell,
// never increasing cost. Pushes flow around cycles of fractional entries
// first; once those are gone the fractional entries form a forest whose
// leaves are centers, and pushing along leaf-to-leaf paths only drifts the
// endpoint column sums, each trapped in its own unit cell.
inline void round_group_matrix(std::vector<std::vector<lp::Rat>>& x,
                               const std::vector<std::vector<lp::Rat>>& dist) {
  const int mq = static_cast<int>(x.size());
  const int k = mq ? static_cast<int>(x[0].size()) : 0;
  auto node_of_center = [&](int c) { return mq + c; };

  while (true) {
    struct Edge {
      int q, c;
    };
    std::vector<Edge> edges;
    for (int q = 0; q < mq; ++q)
      for (int c = 0; c < k; ++c)
        if (!rat_integral(x[static_cast<std::size_t>(q)][static_cast<std::size_t>(c)]))
          edges.push_back({q, c});
    if (edges.empty()) return;

    std::vector<std::vector<int>> adj(static_cast<std::size_t>(mq + k));
    for (std::size_t e = 0; e < edges.size(); ++e) {
      adj[static_cast<std::size_t>(edges[e].q)].push_back(static_cast<int>(e));
      adj[static_cast<std::size_t>(node_of_center(edges[e].c))].push_back(
          static_cast<int>(e));
    }

    auto other_end = [&](int e, int v) {
      return edges[static_cast<std::size_t>(e)].q == v
                 ? node_of_center(edges[static_cast<std::size_t>(e)].c)
                 : edges[static_cast<std::size_t>(e)].q;
    };

    // Cycle hunt via DFS with parent edges.
    std::vector<int> parent_edge(static_cast<std::size_t>(mq + k), -1);
    std::vector<int> parent_vertex(static_cast<std::size_t>(mq + k), -1);
    std::vector<char> visited(static_cast<std::size_t>(mq + k), 0);
    std::vector<int> cycle_edges;
    for (int start = 0; start < mq + k && cycle_edges.empty(); ++start) {
      if (visited[static_cast<std::size_t>(start)] ||
          adj[static_cast<std::size_t>(start)].empty())
        continue;
      std::vector<int> stack{start};
      visited[static_cast<std::size_t>(start)] = 1;
      while (!stack.empty() && cycle_edges.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int e : adj[static_cast<std::size_t>(u)]) {
          if (e == parent_edge[static_cast<std::size_t>(u)]) continue;
          int w = other_end(e, u);
          if (!visited[static_cast<std::size_t>(w)]) {
            visited[static_cast<std::size_t>(w)] = 1;
            parent_edge[static_cast<std::size_t>(w)] = e;
            parent_vertex[static_cast<std::size_t>(w)] = u;
            stack.push_back(w);
          } else {
            // Close the cycle u -> ... -> w plus edge e.
            std::vector<int> up_u, up_w;
            std::vector<int> au, aw;
            int a = u, b = w;
            auto depth = [&](int v) {
              int d = 0;
              for (int t = v; parent_vertex[static_cast<std::size_t>(t)] >= 0;
                   t = parent_vertex[static_cast<std::size_t>(t)])
                ++d;
              return d;
            };
            int da = depth(a), db = depth(b);
            while (da > db) {
              up_u.push_back(parent_edge[static_cast<std::size_t>(a)]);
              a = parent_vertex[static_cast<std::size_t>(a)];
              --da;
            }
            while (db > da) {
              up_w.push_back(parent_edge[static_cast<std::size_t>(b)]);
              b = parent_vertex[static_cast<std::size_t>(b)];
              --db;
            }
            while (a != b) {
              up_u.push_back(parent_edge[static_cast<std::size_t>(a)]);
              up_w.push_back(parent_edge[static_cast<std::size_t>(b)]);
              a = parent_vertex[static_cast<std::size_t>(a)];
              b = parent_vertex[static_cast<std::size_t>(b)];
            }
            cycle_edges.push_back(e);
            cycle_edges.insert(cycle_edges.end(), up_u.begin(), up_u.end());
            std::reverse(up_w.begin(), up_w.end());
            cycle_edges.insert(cycle_edges.end(), up_w.begin(), up_w.end());
            break;
          }
        }
      }
    }

    std::vector<int> walk;  // edge ids, consecutive edges share a vertex
    if (!cycle_edges.empty()) {
      walk = cycle_edges;
    } else {
      // Forest: start from the smallest center leaf and walk to another leaf.
      int start_center = -1;
      for (int c = 0; c < k && start_center < 0; ++c)
        if (adj[static_cast<std::size_t>(node_of_center(c))].size() == 1)
          start_center = c;
      if (start_center < 0)
        throw InternalError("fractional LP support has no center leaf");
      int v = node_of_center(start_center);
      int via = adj[static_cast<std::size_t>(v)][0];
      walk.push_back(via);
      v = other_end(via, v);
      while (true) {
        if (v >= mq && adj[static_cast<std::size_t>(v)].size() == 1) break;
        int next = -1;
        for (int e : adj[static_cast<std::size_t>(v)])
          if (e != via && (next < 0 || e < next)) next = e;
        if (next < 0) {
          if (v < mq)
            throw InternalError("location became a leaf in the rounding forest");
          break;
        }
        via = next;
        walk.push_back(via);
        v = other_end(via, v);
      }
    }

    // Alternate signs along the walk; flip if that direction raises cost.
    std::vector<int> sign(walk.size());
    for (std::size_t i = 0; i < walk.size(); ++i) sign[i] = i % 2 == 0 ? 1 : -1;
    lp::Rat delta_cost = 0;
    for (std::size_t i = 0; i < walk.size(); ++i) {
      const auto& e = edges[static_cast<std::size_t>(walk[i])];
      delta_cost += lp::Rat(sign[i]) *
                    dist[static_cast<std::size_t>(e.q)][static_cast<std::size_t>(e.c)];
    }
    if (delta_cost > 0)
      for (auto& s : sign) s = -s;

    lp::Rat step;
    bool first = true;
    for (std::size_t i = 0; i < walk.size(); ++i) {
      const auto& e = edges[static_cast<std::size_t>(walk[i])];
      const lp::Rat& val =
          x[static_cast<std::size_t>(e.q)][static_cast<std::size_t>(e.c)];
      lp::Rat room = sign[i] > 0 ? lp::make_rat(rat_floor(val) + 1) - val
                                 : val - lp::make_rat(rat_floor(val));
      if (first || room < step) {
        step = room;
        first = false;
      }
    }
    if (first || step <= 0)
      throw InternalError("rounding made no progress");
    for (std::size_t i = 0; i < walk.size(); ++i) {
      const auto& e = edges[static_cast<std::size_t>(walk[i])];
      x[static_cast<std::size_t>(e.q)][static_cast<std::size_t>(e.c)] +=
          lp::Rat(sign[i]) * step;
    }
  }
}

}  // namespace detail

// The 3-approximately-fair assignment engine: solve the fractional
// fair-assignment LP over aggregate flows r_j(q, c) exactly, then round each
// group's matrix to integers without raising cost. Column sums land within 1
// of the (exactly proportional) fractional profiles, which keeps the realized
// per-center violation at most 1 + (f_j/f)(l-2) and in particular <= 3 for
// l <= 4; both the violation and the cost-versus-LP contract are checked and
// any breach aborts with a diagnostic.
inline NearFairResult near_fair_assign(const Instance& inst,
                                       const std::vector<int>& centers,
                                       const FairnessPolicy& policy) {
  const auto* exact = std::get_if<FairnessPolicy::Exact>(&policy.variant());
  if (!exact)
    throw PreconditionError("near_fair_assign requires an Exact policy");
  FairletShape shape = compute_fairlet_shape(exact->group_sizes);

  const int l = inst.num_groups;
  const int k = static_cast<int>(centers.size());
  if (k < 1) throw PreconditionError("no centers");
  std::vector<int> occ = occupied_locations(inst);
  const int mq = static_cast<int>(occ.size());
  auto profiles = location_profiles(inst);

  const int flow_vars = l * mq * k;
  const int num_vars = flow_vars + k;
  auto var = [&](int j, int qi, int ci) { return (j * mq + qi) * k + ci; };

  std::vector<std::vector<lp::Rat>> dist(
      static_cast<std::size_t>(mq), std::vector<lp::Rat>(static_cast<std::size_t>(k)));
  for (int qi = 0; qi < mq; ++qi)
    for (int ci = 0; ci < k; ++ci)
      dist[static_cast<std::size_t>(qi)][static_cast<std::size_t>(ci)] =
          lp::Rat(inst.metric.distance(occ[static_cast<std::size_t>(qi)],
                                       centers[static_cast<std::size_t>(ci)]));

  std::vector<std::vector<lp::Rat>> A;
  std::vector<lp::Rat> b;
  for (int qi = 0; qi < mq; ++qi) {
    for (int j = 0; j < l; ++j) {
      std::vector<lp::Rat> row(static_cast<std::size_t>(num_vars), 0);
      for (int ci = 0; ci < k; ++ci) row[static_cast<std::size_t>(var(j, qi, ci))] = 1;
      A.push_back(std::move(row));
      b.push_back(lp::Rat(
          profiles[static_cast<std::size_t>(occ[static_cast<std::size_t>(qi)])]
                  [static_cast<std::size_t>(j)]));
    }
  }
  for (int ci = 0; ci < k; ++ci) {
    for (int j = 0; j < l; ++j) {
      std::vector<lp::Rat> row(static_cast<std::size_t>(num_vars), 0);
      for (int qi = 0; qi < mq; ++qi) row[static_cast<std::size_t>(var(j, qi, ci))] = 1;
      row[static_cast<std::size_t>(flow_vars + ci)] =
          -lp::make_rat(shape.per_group[static_cast<std::size_t>(j)]);
      A.push_back(std::move(row));
      b.push_back(0);
    }
  }
  std::vector<lp::Rat> objective(static_cast<std::size_t>(num_vars), 0);
  for (int j = 0; j < l; ++j)
    for (int qi = 0; qi < mq; ++qi)
      for (int ci = 0; ci < k; ++ci)
        objective[static_cast<std::size_t>(var(j, qi, ci))] =
            dist[static_cast<std::size_t>(qi)][static_cast<std::size_t>(ci)];

  auto lp_solution = lp::solve_equality_lp(std::move(A), std::move(b), objective);
  if (!lp_solution.feasible)
    throw InfeasibleError("fair-assignment relaxation is infeasible");

  std::vector<std::vector<std::vector<lp::Rat>>> x(
      static_cast<std::size_t>(l),
      std::vector<std::vector<lp::Rat>>(
          static_cast<std::size_t>(mq),
          std::vector<lp::Rat>(static_cast<std::size_t>(k), 0)));
  for (int j = 0; j < l; ++j)
    for (int qi = 0; qi < mq; ++qi)
      for (int ci = 0; ci < k; ++ci)
        x[static_cast<std::size_t>(j)][static_cast<std::size_t>(qi)]
         [static_cast<std::size_t>(ci)] =
             lp_solution.x[static_cast<std::size_t>(var(j, qi, ci))];

  for (int j = 0; j < l; ++j)
    detail::round_group_matrix(x[static_cast<std::size_t>(j)], dist);

  lp::Rat rounded_cost = 0;
  for (int j = 0; j < l; ++j)
    for (int qi = 0; qi < mq; ++qi)
      for (int ci = 0; ci < k; ++ci)
        rounded_cost += dist[static_cast<std::size_t>(qi)][static_cast<std::size_t>(ci)] *
                        x[static_cast<std::size_t>(j)][static_cast<std::size_t>(qi)]
                         [static_cast<std::size_t>(ci)];
  if (rounded_cost > lp_solution.value)
    throw InternalError("rounded assignment costs more than the LP optimum");

  // Realized violation, exactly.
  lp::Rat worst_gamma = 0;
  for (int ci = 0; ci < k; ++ci) {
    long long s = 0;
    std::vector<long long> r(static_cast<std::size_t>(l), 0);
    for (int j = 0; j < l; ++j)
      for (int qi = 0; qi < mq; ++qi) {
        const lp::Rat& v = x[static_cast<std::size_t>(j)][static_cast<std::size_t>(qi)]
                            [static_cast<std::size_t>(ci)];
        r[static_cast<std::size_t>(j)] += detail::rat_floor(v);
      }
    for (int j = 0; j < l; ++j) s += r[static_cast<std::size_t>(j)];
    for (int j = 0; j < l; ++j) {
      lp::Rat gamma = lp::make_rat(r[static_cast<std::size_t>(j)]) -
                      lp::make_rat(shape.per_group[static_cast<std::size_t>(j)] * s,
                                   shape.size);
      if (gamma < 0) gamma = -gamma;
      if (gamma > worst_gamma) worst_gamma = gamma;
    }
  }
  if (worst_gamma > 3)
    throw InternalError(
        "near-fair rounding exceeded the additive violation contract: gamma=" +
        std::to_string(worst_gamma.get_d()));

  NearFairResult out;
  for (int qi = 0; qi < mq; ++qi) {
    for (int ci = 0; ci < k; ++ci) {
      Profile p = zero_profile(l);
      bool any = false;
      for (int j = 0; j < l; ++j) {
        long long v = detail::rat_floor(
            x[static_cast<std::size_t>(j)][static_cast<std::size_t>(qi)]
             [static_cast<std::size_t>(ci)]);
        p[static_cast<std::size_t>(j)] = static_cast<int>(v);
        any = any || v != 0;
      }
      if (any)
        out.plan.add_flow(occ[static_cast<std::size_t>(qi)],
                          centers[static_cast<std::size_t>(ci)], p);
    }
  }
  out.plan.centers = centers;
  std::sort(out.plan.centers.begin(), out.plan.centers.end());
  out.point_to_center = derive_point_assignment(inst, out.plan);
  out.cost = evaluate_cost(inst, out.plan);
  out.lp_value = lp_solution.value.get_d();
  out.gamma = worst_gamma.get_d();
  return out;
}

// Independent engine for tiny instances: exhaustive search over integral
// assignments with additive violation at most gamma_allow. Used to
// cross-check the LP engine.
inline NearFairResult near_fair_assign_brute(const Instance& inst,
                                             const std::vector<int>& centers,
                                             const FairletShape& shape,
                                             int gamma_allow = 3) {
  const int n = inst.num_points();
  const int k = static_cast<int>(centers.size());
  if (n > 16 || std::pow(static_cast<double>(k), n) > 2e7)
    throw SizeError("brute near-fair engine is restricted to tiny instances");
  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  std::vector<int> best;
  double best_cost = 0;
  bool found = false;
  std::vector<Profile> load(static_cast<std::size_t>(k),
                            zero_profile(inst.num_groups));
  auto gamma_of = [&](const Profile& r) {
    long long s = profile_norm1(r);
    double g = 0;
    for (int j = 0; j < inst.num_groups; ++j) {
      double target = static_cast<double>(shape.per_group[static_cast<std::size_t>(j)]) *
                      static_cast<double>(s) / static_cast<double>(shape.size);
      g = std::max(g, std::abs(r[static_cast<std::size_t>(j)] - target));
    }
    return g;
  };
  auto rec = [&](auto&& self, int i, double cost) -> void {
    if (i == n) {
      for (const auto& r : load)
        if (gamma_of(r) > gamma_allow + 1e-9) return;
      if (!found || cost < best_cost) {
        found = true;
        best_cost = cost;
        best = assign;
      }
      return;
    }
    for (int ci = 0; ci < k; ++ci) {
      assign[static_cast<std::size_t>(i)] = ci;
      auto& slot = load[static_cast<std::size_t>(ci)]
                       [static_cast<std::size_t>(inst.group_of[static_cast<std::size_t>(i)])];
      ++slot;
      self(self, i + 1,
           cost + inst.metric.distance(
                      inst.location_of[static_cast<std::size_t>(i)],
                      centers[static_cast<std::size_t>(ci)]));
      --slot;
    }
  };
  rec(rec, 0, 0.0);
  if (!found) throw InfeasibleError("no assignment satisfies the violation allowance");

  NearFairResult out;
  std::vector<int> p2c(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    p2c[static_cast<std::size_t>(i)] = centers[static_cast<std::size_t>(
        best[static_cast<std::size_t>(i)])];
  out.plan = plan_from_point_assignment(inst, p2c, centers);
  out.point_to_center = std::move(p2c);
  out.cost = evaluate_cost(inst, out.plan);
  out.lp_value = out.cost;
  AssignmentPlan& plan = out.plan;
  double g = 0;
  for (int c : plan.centers)
    g = std::max(g, gamma_of(center_profile(plan, c, inst.num_groups)));
  out.gamma = g;
  return out;
}

struct ClusterDecomposition {
  std::vector<std::vector<int>> fairlets;  // each: point ids, profile (f_1..f_l)
  std::vector<int> problematic;            // P_i
};

// Greedy fairlet decomposition of one cluster: n_i = min_j floor(v_j / f_j)
// fairlets, filled per group with pinned points first and then ascending
// point ids; the remainder is the problematic set.
inline ClusterDecomposition decompose_fairlets(
    const std::vector<int>& cluster_points, const std::vector<int>& group_of,
    int num_groups, const FairletShape& shape,
    const std::vector<int>& pinned = {}) {
  std::set<int> pinned_set(pinned.begin(), pinned.end());
  std::set<int> members(cluster_points.begin(), cluster_points.end());
  for (int p : pinned)
    if (!members.count(p))
      throw PreconditionError("pinned point " + std::to_string(p) +
                              " is not in the cluster");

  std::vector<std::vector<int>> ordered(static_cast<std::size_t>(num_groups));
  for (int pass = 0; pass < 2; ++pass)
    for (int id : members) {
      bool is_pinned = pinned_set.count(id) > 0;
      if ((pass == 0) == is_pinned)
        ordered[static_cast<std::size_t>(group_of[static_cast<std::size_t>(id)])]
            .push_back(id);
    }

  long long fairlet_count = -1;
  for (int j = 0; j < num_groups; ++j) {
    long long possible =
        static_cast<long long>(ordered[static_cast<std::size_t>(j)].size()) /
        shape.per_group[static_cast<std::size_t>(j)];
    if (fairlet_count < 0 || possible < fairlet_count) fairlet_count = possible;
  }

  ClusterDecomposition dec;
  std::vector<std::size_t> cursor(static_cast<std::size_t>(num_groups), 0);
  for (long long t = 0; t < fairlet_count; ++t) {
    std::vector<int> fairlet;
    for (int j = 0; j < num_groups; ++j)
      for (long long c = 0; c < shape.per_group[static_cast<std::size_t>(j)]; ++c)
        fairlet.push_back(
            ordered[static_cast<std::size_t>(j)][cursor[static_cast<std::size_t>(j)]++]);
    std::sort(fairlet.begin(), fairlet.end());
    dec.fairlets.push_back(std::move(fairlet));
  }
  for (int j = 0; j < num_groups; ++j)
    for (std::size_t c = cursor[static_cast<std::size_t>(j)];
         c < ordered[static_cast<std::size_t>(j)].size(); ++c)
      dec.problematic.push_back(ordered[static_cast<std::size_t>(j)][c]);
  std::sort(dec.problematic.begin(), dec.problematic.end());
  return dec;
}

// Movable set: all problematic points plus, from each cluster, the first
// min(n_i, 4kf) whole fairlets. Size is bounded by 4k^2f^2 + 4kf.
inline std::vector<int> select_movable(
    const std::vector<ClusterDecomposition>& decompositions, int k,
    const FairletShape& shape) {
  std::vector<int> s;
  const long long cap = 4LL * k * shape.size;
  for (const auto& dec : decompositions) {
    long long take = std::min<long long>(
        static_cast<long long>(dec.fairlets.size()), cap);
    for (long long t = 0; t < take; ++t)
      s.insert(s.end(), dec.fairlets[static_cast<std::size_t>(t)].begin(),
               dec.fairlets[static_cast<std::size_t>(t)].end());
    s.insert(s.end(), dec.problematic.begin(), dec.problematic.end());
  }
  std::sort(s.begin(), s.end());
  const long long bound = 4LL * k * k * shape.size * shape.size + 4LL * k * shape.size;
  if (static_cast<long long>(s.size()) > bound)
    throw InternalError("movable set exceeds its size bound: " +
                        std::to_string(s.size()) + " > " + std::to_string(bound));
  return s;
}

struct ExactPipelineResult {
  SeedSolution seed_solution;
  ReducedInstance reduced;
  NearFairResult near_fair;
  FairletShape shape;
  std::vector<ClusterDecomposition> decompositions;
  std::vector<int> movable;
  Clustering reduced_clustering;
  Clustering original_clustering;
  double tree_cost = 0;
  int trials = 0;
  int winning_trial = 0;
  std::uint64_t winning_seed = 0;
  Instance movable_instance;      // DP sub-instance, kept for diagnostics
  NodePolicies movable_policies;  // per-center shifted policies
};

// The fast exact-fairness path: consolidate, run the near-fair engine, freeze
// everything outside the movable set at its near-fair center, and re-optimize
// only the movable points with the tree DP under per-center policies shifted
// by the frozen profiles. The merged assignment is exactly fair with zero
// violation.
inline ExactPipelineResult exact_pipeline(const Instance& inst, int k,
                                          int trials, std::uint64_t seed,
                                          int threads = 1,
                                          bool forbid_empty = false) {
  ExactPipelineResult out;
  out.shape = compute_fairlet_shape(inst.group_sizes);
  out.seed_solution = solve_kmedian(inst, k, mix_seed(seed, kKMedianSeedTag));
  out.reduced = consolidate(inst, out.seed_solution);
  const Instance& red = out.reduced.base;

  std::vector<int> centers(static_cast<std::size_t>(k));
  std::iota(centers.begin(), centers.end(), 0);
  FairnessPolicy exact_policy = FairnessPolicy::exact(inst.group_sizes);
  out.near_fair = near_fair_assign(red, centers, exact_policy);

  // Clusters of the near-fair instance.
  std::vector<std::vector<int>> cluster(static_cast<std::size_t>(k));
  for (int i = 0; i < red.num_points(); ++i)
    cluster[static_cast<std::size_t>(
                out.near_fair.point_to_center[static_cast<std::size_t>(i)])]
        .push_back(i);
  for (int c = 0; c < k; ++c) {
    out.decompositions.push_back(decompose_fairlets(
        cluster[static_cast<std::size_t>(c)], red.group_of, red.num_groups,
        out.shape));
    const auto& dec = out.decompositions.back();
    if (static_cast<long long>(dec.problematic.size()) >= 4 * out.shape.size)
      throw InternalError("problematic set at center " + std::to_string(c) +
                          " breaks the |P_i| < 4f bound");
  }
  out.movable = select_movable(out.decompositions, k, out.shape);

  // Frozen points stay at their near-fair centers and shift those centers'
  // admission tests; movable points form the DP sub-instance.
  std::vector<char> is_movable(static_cast<std::size_t>(red.num_points()), 0);
  for (int id : out.movable) is_movable[static_cast<std::size_t>(id)] = 1;
  std::vector<Profile> frozen(static_cast<std::size_t>(k),
                              zero_profile(red.num_groups));
  std::vector<int> movable_group, movable_loc;
  for (int i = 0; i < red.num_points(); ++i) {
    int c = out.near_fair.point_to_center[static_cast<std::size_t>(i)];
    if (is_movable[static_cast<std::size_t>(i)]) {
      movable_group.push_back(red.group_of[static_cast<std::size_t>(i)]);
      movable_loc.push_back(c);
    } else {
      frozen[static_cast<std::size_t>(c)]
            [static_cast<std::size_t>(red.group_of[static_cast<std::size_t>(i)])]++;
    }
  }
  Instance movable_inst = make_instance(std::move(movable_group),
                                        std::move(movable_loc), red.metric,
                                        red.num_groups);

  FairnessPolicy base = forbid_empty
                            ? FairnessPolicy::non_empty(exact_policy)
                            : exact_policy;
  NodePolicies policies;
  policies.shared = base;
  for (int c = 0; c < k; ++c)
    policies.per_location.emplace(
        c, FairnessPolicy::shifted_by(base, frozen[static_cast<std::size_t>(c)]));

  if (trials <= 0) trials = default_trials(movable_inst.num_points());
  auto best = best_of_trees(movable_inst, policies, trials,
                            mix_seed(seed, kExactDpSeedTag), threads);
  out.tree_cost = best.tree_cost;
  out.trials = trials;
  out.winning_trial = best.winning_trial;
  out.winning_seed = best.winning_seed;
  out.movable_instance = movable_inst;
  out.movable_policies = policies;

  // Merge frozen and moved points into a clustering of the reduced instance.
  std::vector<int> p2c(static_cast<std::size_t>(red.num_points()));
  std::size_t movable_index = 0;
  for (int i = 0; i < red.num_points(); ++i) {
    if (is_movable[static_cast<std::size_t>(i)])
      p2c[static_cast<std::size_t>(i)] =
          best.clustering.point_to_center[movable_index++];
    else
      p2c[static_cast<std::size_t>(i)] =
          out.near_fair.point_to_center[static_cast<std::size_t>(i)];
  }
  out.reduced_clustering.plan = plan_from_point_assignment(red, p2c, centers);
  out.reduced_clustering.point_to_center = std::move(p2c);
  out.reduced_clustering.cost = evaluate_cost(red, out.reduced_clustering.plan);

  auto audit = audit_fairness(exact_policy, out.reduced_clustering.plan,
                              red.num_groups);
  if (!audit.all_admit || audit.max_gamma != 0)
    throw InternalError("exact pipeline produced a non-exactly-fair clustering");

  out.original_clustering = lift_clustering(out.reduced_clustering, out.reduced);
  return out;
}

}  // namespace fairmed
