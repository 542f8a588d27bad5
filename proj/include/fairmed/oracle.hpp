#pragma once

#include <string>
#include <vector>

#include "fairmed/errors.hpp"
#include "fairmed/instance.hpp"
#include "fairmed/policy.hpp"
#include "fairmed/profile.hpp"

namespace fairmed {
namespace oracle {

// Ground-truth solvers by exhaustive enumeration. They share only the core
// data model with the real pipelines and stay deliberately unsophisticated:
// no pruning, fixed lexicographic tie-breaking, hard size limits.
struct OracleLimits {
  int max_points = 12;
  int max_centers = 3;
  int max_groups = 3;
};

inline void check_limits(const Instance& inst, int k, const OracleLimits& lim) {
  if (inst.num_points() > lim.max_points)
    throw SizeError("oracle limit: " + std::to_string(inst.num_points()) +
                    " points > " + std::to_string(lim.max_points));
  if (k > lim.max_centers)
    throw SizeError("oracle limit: k=" + std::to_string(k) + " > " +
                    std::to_string(lim.max_centers));
  if (inst.num_groups > lim.max_groups)
    throw SizeError("oracle limit: " + std::to_string(inst.num_groups) +
                    " groups > " + std::to_string(lim.max_groups));
}

struct BruteAssignment {
  bool feasible = false;
  double cost = 0;
  std::vector<int> point_to_center;  // center location ids
};

// Minimum-cost fair assignment of all points to the given centers, by
// enumerating every center choice per point (k^n) and filtering on the
// policy at every center. Lexicographically first optimum wins.
inline BruteAssignment brute_fair_assignment(const Instance& inst,
                                             const std::vector<int>& centers,
                                             const FairnessPolicy& policy,
                                             const OracleLimits& lim = {}) {
  check_limits(inst, static_cast<int>(centers.size()), lim);
  const int n = inst.num_points();
  const int k = static_cast<int>(centers.size());
  BruteAssignment best;
  std::vector<int> choice(static_cast<std::size_t>(n), 0);
  std::vector<Profile> load(static_cast<std::size_t>(k),
                            zero_profile(inst.num_groups));

  auto rec = [&](auto&& self, int i, double cost) -> void {
    if (i == n) {
      for (const auto& r : load)
        if (!policy.admits(r)) return;
      if (!best.feasible || cost < best.cost) {
        best.feasible = true;
        best.cost = cost;
        best.point_to_center.assign(static_cast<std::size_t>(n), 0);
        for (int t = 0; t < n; ++t)
          best.point_to_center[static_cast<std::size_t>(t)] =
              centers[static_cast<std::size_t>(choice[static_cast<std::size_t>(t)])];
      }
      return;
    }
    for (int c = 0; c < k; ++c) {
      choice[static_cast<std::size_t>(i)] = c;
      auto& slot =
          load[static_cast<std::size_t>(c)]
              [static_cast<std::size_t>(inst.group_of[static_cast<std::size_t>(i)])];
      ++slot;
      self(self, i + 1,
           cost + inst.metric.distance(
                      inst.location_of[static_cast<std::size_t>(i)],
                      centers[static_cast<std::size_t>(c)]));
      --slot;
    }
  };
  rec(rec, 0, 0.0);
  return best;
}

struct BruteClustering {
  bool feasible = false;
  double cost = 0;
  std::vector<int> centers;
  std::vector<int> point_to_center;
};

// Optimal fair clustering: every k-subset of occupied locations as centers,
// each solved by brute_fair_assignment.
inline BruteClustering brute_fair_clustering(const Instance& inst, int k,
                                             const FairnessPolicy& policy,
                                             const OracleLimits& lim = {}) {
  check_limits(inst, k, lim);
  std::vector<int> locations = occupied_locations(inst);
  const int m = static_cast<int>(locations.size());
  BruteClustering best;
  if (k > m) return best;

  std::vector<int> pick(static_cast<std::size_t>(k));
  auto combos = [&](auto&& self, int start, int depth) -> void {
    if (depth == k) {
      std::vector<int> centers;
      for (int idx : pick) centers.push_back(locations[static_cast<std::size_t>(idx)]);
      auto sol = brute_fair_assignment(inst, centers, policy, lim);
      if (sol.feasible && (!best.feasible || sol.cost < best.cost)) {
        best.feasible = true;
        best.cost = sol.cost;
        best.centers = centers;
        best.point_to_center = sol.point_to_center;
      }
      return;
    }
    for (int i = start; i < m; ++i) {
      pick[static_cast<std::size_t>(depth)] = i;
      self(self, i + 1, depth + 1);
    }
  };
  combos(combos, 0, 0);
  return best;
}

struct BruteKMedian {
  double cost = 0;
  std::vector<int> centers;
};

// Optimal (unfair) k-median over occupied-location center sets with Voronoi
// assignment.
inline BruteKMedian brute_kmedian(const Instance& inst, int k,
                                  const OracleLimits& lim = {}) {
  check_limits(inst, k, lim);
  std::vector<int> locations = occupied_locations(inst);
  const int m = static_cast<int>(locations.size());
  if (k > m) throw PreconditionError("k exceeds occupied locations");

  BruteKMedian best;
  bool found = false;
  std::vector<int> pick(static_cast<std::size_t>(k));
  auto cost_of = [&](const std::vector<int>& centers) {
    double cost = 0;
    for (int i = 0; i < inst.num_points(); ++i) {
      double nearest = -1;
      for (int c : centers) {
        double d = inst.metric.distance(
            inst.location_of[static_cast<std::size_t>(i)], c);
        if (nearest < 0 || d < nearest) nearest = d;
      }
      cost += nearest;
    }
    return cost;
  };
  auto combos = [&](auto&& self, int start, int depth) -> void {
    if (depth == k) {
      std::vector<int> centers;
      for (int idx : pick) centers.push_back(locations[static_cast<std::size_t>(idx)]);
      double cost = cost_of(centers);
      if (!found || cost < best.cost) {
        found = true;
        best.cost = cost;
        best.centers = centers;
      }
      return;
    }
    for (int i = start; i < m; ++i) {
      pick[static_cast<std::size_t>(depth)] = i;
      self(self, i + 1, depth + 1);
    }
  };
  combos(combos, 0, 0);
  return best;
}

}  // namespace oracle
}  // namespace fairmed
