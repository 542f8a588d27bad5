#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fairmed/errors.hpp"
#include "fairmed/instance.hpp"
#include "fairmed/rng.hpp"

namespace fairmed {

struct SeedSolution {
  std::vector<int> centers;  // sorted location ids
  std::vector<int> voronoi;  // per point, nearest center (ties: lowest index)
  double cost = 0;
};

inline std::vector<int> voronoi_assign(const Instance& inst,
                                       const std::vector<int>& centers) {
  if (centers.empty()) throw PreconditionError("no centers");
  std::vector<int> out(static_cast<std::size_t>(inst.num_points()));
  for (int i = 0; i < inst.num_points(); ++i) {
    int loc = inst.location_of[static_cast<std::size_t>(i)];
    int best = centers[0];
    double best_d = inst.metric.distance(loc, centers[0]);
    for (std::size_t c = 1; c < centers.size(); ++c) {
      double d = inst.metric.distance(loc, centers[c]);
      if (d < best_d) {
        best_d = d;
        best = centers[c];
      }
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

namespace detail {

struct WeightedPoints {
  std::vector<int> locs;       // occupied locations, ascending
  std::vector<double> weight;  // point count per entry
};

inline WeightedPoints weighted_locations(const Instance& inst) {
  WeightedPoints w;
  w.locs = occupied_locations(inst);
  w.weight.assign(w.locs.size(), 0);
  std::vector<int> index(static_cast<std::size_t>(inst.num_locations()), -1);
  for (std::size_t i = 0; i < w.locs.size(); ++i)
    index[static_cast<std::size_t>(w.locs[i])] = static_cast<int>(i);
  for (int loc : inst.location_of)
    w.weight[static_cast<std::size_t>(index[static_cast<std::size_t>(loc)])] += 1;
  return w;
}

inline double weighted_cost(const Instance& inst, const WeightedPoints& w,
                            const std::vector<int>& centers) {
  double cost = 0;
  for (std::size_t i = 0; i < w.locs.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int c : centers) best = std::min(best, inst.metric.distance(w.locs[i], c));
    cost += w.weight[i] * best;
  }
  return cost;
}

}  // namespace detail

struct KMedianSwap {
  int out_center = -1;
  int in_location = -1;
  double new_cost = 0;
};

// Best single swap for the given center set, or nullopt when no swap strictly
// lowers the cost. Ties break toward the lexicographically smallest
// (out_center, in_location).
inline std::optional<KMedianSwap> best_kmedian_swap(
    const Instance& inst, const std::vector<int>& centers) {
  auto w = detail::weighted_locations(inst);
  const std::size_t m = w.locs.size();
  // Nearest and second-nearest center distance per occupied location.
  std::vector<double> d1(m), d2(m);
  std::vector<int> n1(m);
  for (std::size_t i = 0; i < m; ++i) {
    d1[i] = d2[i] = std::numeric_limits<double>::infinity();
    n1[i] = -1;
    for (int c : centers) {
      double d = inst.metric.distance(w.locs[i], c);
      if (d < d1[i]) {
        d2[i] = d1[i];
        d1[i] = d;
        n1[i] = c;
      } else if (d < d2[i]) {
        d2[i] = d;
      }
    }
  }
  double current = 0;
  for (std::size_t i = 0; i < m; ++i) current += w.weight[i] * d1[i];

  std::optional<KMedianSwap> best;
  for (int out : centers) {
    for (std::size_t cand = 0; cand < m; ++cand) {
      int in = w.locs[cand];
      if (std::find(centers.begin(), centers.end(), in) != centers.end())
        continue;
      double cost = 0;
      for (std::size_t i = 0; i < m; ++i) {
        double keep = n1[i] == out ? d2[i] : d1[i];
        cost += w.weight[i] *
                std::min(keep, inst.metric.distance(w.locs[i], in));
      }
      if (cost < current && (!best || cost < best->new_cost))
        best = KMedianSwap{out, in, cost};
    }
  }
  return best;
}

// Single-swap local search with greedy farthest-point seeding. Swaps are
// taken while they improve the cost by more than a (1 - eps/k) factor with
// eps = 1e-4, then polished with strict-improvement sweeps so the result is
// a genuine single-swap local optimum.
inline SeedSolution solve_kmedian(const Instance& inst, int k,
                                  std::uint64_t seed) {
  if (k < 1) throw PreconditionError("k must be >= 1");
  auto w = detail::weighted_locations(inst);
  const std::size_t m = w.locs.size();
  if (static_cast<std::size_t>(k) > m)
    throw InfeasibleError("k=" + std::to_string(k) + " exceeds the " +
                          std::to_string(m) + " distinct locations");

  Rng rng(mix_seed(seed, 0x6b6d6564ULL));
  std::vector<int> centers;
  centers.push_back(w.locs[static_cast<std::size_t>(rng.below(m))]);
  while (centers.size() < static_cast<std::size_t>(k)) {
    int far = -1;
    double far_d = -1;
    for (std::size_t i = 0; i < m; ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (int c : centers)
        nearest = std::min(nearest, inst.metric.distance(w.locs[i], c));
      if (nearest > far_d &&
          std::find(centers.begin(), centers.end(), w.locs[i]) ==
              centers.end()) {
        far_d = nearest;
        far = w.locs[i];
      }
    }
    centers.push_back(far);
  }
  std::sort(centers.begin(), centers.end());

  const double eps = 1e-4;
  double current = detail::weighted_cost(inst, w, centers);
  while (true) {
    auto swap = best_kmedian_swap(inst, centers);
    if (!swap || swap->new_cost >= (1.0 - eps / k) * current) break;
    centers.erase(std::find(centers.begin(), centers.end(), swap->out_center));
    centers.push_back(swap->in_location);
    std::sort(centers.begin(), centers.end());
    current = swap->new_cost;
  }
  while (true) {
    auto swap = best_kmedian_swap(inst, centers);
    if (!swap) break;
    centers.erase(std::find(centers.begin(), centers.end(), swap->out_center));
    centers.push_back(swap->in_location);
    std::sort(centers.begin(), centers.end());
    current = swap->new_cost;
  }

  SeedSolution sol;
  sol.centers = centers;
  sol.voronoi = voronoi_assign(inst, centers);
  sol.cost = 0;
  for (int i = 0; i < inst.num_points(); ++i)
    sol.cost += inst.metric.distance(
        inst.location_of[static_cast<std::size_t>(i)],
        sol.voronoi[static_cast<std::size_t>(i)]);
  return sol;
}

}  // namespace fairmed
