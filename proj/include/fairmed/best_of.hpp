#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "fairmed/assignment.hpp"
#include "fairmed/errors.hpp"
#include "fairmed/hst.hpp"
#include "fairmed/instance.hpp"
#include "fairmed/rng.hpp"
#include "fairmed/tree_dp.hpp"

namespace fairmed {

constexpr std::uint64_t kTreeSeedTag = 0x74726565ULL;

struct TreeSolve {
  HstTree tree;
  BinaryTree btree;
  DpTable table;
  AssignmentPlan plan;
  double tree_cost = 0;  // DP optimum under the sampled tree metric
  double true_cost = 0;  // same plan costed against the instance metric
};

inline TreeSolve solve_one_tree(const Instance& inst,
                                const NodePolicies& policies,
                                std::uint64_t tree_seed) {
  TreeSolve out;
  out.tree = sample_hst(inst.metric, tree_seed);
  out.btree = binarize(out.tree, location_profiles(inst));
  out.table = solve_dp(out.btree, policies);
  if (!out.table.feasible(out.btree))
    throw InfeasibleError(
        "fairness policy admits no assignment (policies are metric-independent, "
        "so no tree can help)");
  auto rec = reconstruct(out.btree, policies, out.table);
  out.plan = std::move(rec.plan);
  out.tree_cost = rec.tree_cost;
  out.true_cost = evaluate_cost(inst, out.plan);
  return out;
}

struct BestOfResult {
  Clustering clustering;
  double tree_cost = 0;
  int trials = 0;
  int winning_trial = 0;
  std::uint64_t winning_seed = 0;
};

// Samples `trials` trees, solves the assignment exactly on each, and keeps
// the candidate whose plan is cheapest under the TRUE metric (tree costs
// overestimate; selecting by true cost only helps). Trial seeds depend only
// on (seed, trial index), so growing `trials` extends the candidate set and
// the best cost is non-increasing. Trials may run on several threads; the
// reduction by (cost, trial index) makes the winner schedule-independent.
inline BestOfResult best_of_trees(const Instance& inst,
                                  const NodePolicies& policies, int trials,
                                  std::uint64_t seed, int threads = 1) {
  if (trials < 1) throw PreconditionError("trials must be >= 1");
  std::vector<std::optional<TreeSolve>> results(
      static_cast<std::size_t>(trials));
  std::vector<std::string> infeasible(static_cast<std::size_t>(trials));

  auto run_trial = [&](int t) {
    try {
      results[static_cast<std::size_t>(t)] = solve_one_tree(
          inst, policies, mix_seed(seed, kTreeSeedTag, static_cast<std::uint64_t>(t)));
    } catch (const InfeasibleError& e) {
      infeasible[static_cast<std::size_t>(t)] = e.what();
    }
  };

  if (threads <= 1 || trials == 1) {
    for (int t = 0; t < trials; ++t) run_trial(t);
  } else {
    int workers = std::min(threads, trials);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int t = w; t < trials; t += workers) run_trial(t);
      });
    for (auto& th : pool) th.join();
  }

  int best = -1;
  for (int t = 0; t < trials; ++t) {
    if (!results[static_cast<std::size_t>(t)]) {
      // Feasibility does not depend on the sampled tree.
      throw InfeasibleError(infeasible[static_cast<std::size_t>(t)]);
    }
    if (best < 0 || results[static_cast<std::size_t>(t)]->true_cost <
                        results[static_cast<std::size_t>(best)]->true_cost)
      best = t;
  }

  TreeSolve& winner = *results[static_cast<std::size_t>(best)];
  BestOfResult out;
  out.clustering.plan = std::move(winner.plan);
  out.clustering.point_to_center =
      derive_point_assignment(inst, out.clustering.plan);
  out.clustering.cost = winner.true_cost;
  out.tree_cost = winner.tree_cost;
  out.trials = trials;
  out.winning_trial = best;
  out.winning_seed = mix_seed(seed, kTreeSeedTag, static_cast<std::uint64_t>(best));
  return out;
}

}  // namespace fairmed
