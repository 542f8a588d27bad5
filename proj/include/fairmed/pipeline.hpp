#pragma once

#include <cstdint>
#include <utility>

#include "fairmed/best_of.hpp"
#include "fairmed/consolidate.hpp"
#include "fairmed/exact_fair.hpp"
#include "fairmed/instance.hpp"
#include "fairmed/kmedian.hpp"
#include "fairmed/policy.hpp"

namespace fairmed {

constexpr std::uint64_t kGeneralDpSeedTag = 0x67646e72ULL;

struct GeneralPipelineResult {
  SeedSolution seed_solution;
  ReducedInstance reduced;
  Clustering reduced_clustering;
  Clustering original_clustering;
  double tree_cost = 0;
  int trials = 0;
  int winning_trial = 0;
  std::uint64_t winning_seed = 0;
};

// Consolidation, then the best-of-trees loop on the reduced instance, then a
// lift back to the original locations.
inline GeneralPipelineResult general_pipeline(const Instance& inst, int k,
                                              const FairnessPolicy& policy,
                                              int trials, std::uint64_t seed,
                                              int threads = 1) {
  GeneralPipelineResult out;
  out.seed_solution = solve_kmedian(inst, k, mix_seed(seed, kKMedianSeedTag));
  out.reduced = consolidate(inst, out.seed_solution);
  if (trials <= 0) trials = default_trials(inst.num_points());

  NodePolicies policies;
  policies.shared = policy;
  auto best = best_of_trees(out.reduced.base, policies, trials,
                            mix_seed(seed, kGeneralDpSeedTag), threads);
  out.reduced_clustering = std::move(best.clustering);
  out.tree_cost = best.tree_cost;
  out.trials = trials;
  out.winning_trial = best.winning_trial;
  out.winning_seed = best.winning_seed;
  out.original_clustering = lift_clustering(out.reduced_clustering, out.reduced);
  return out;
}

}  // namespace fairmed
