#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fairmed/assignment.hpp"
#include "fairmed/instance.hpp"
#include "fairmed/kmedian.hpp"
#include "fairmed/metric.hpp"

namespace fairmed {

// Instance with every point relocated to its seed center. Locations are
// renumbered 0..k-1; center_location maps back to the original ids and
// provenance keeps each point's original location so clusterings can be
// re-costed in the original space.
struct ReducedInstance {
  Instance base;
  std::vector<int> center_location;  // compact id -> original location id
  std::vector<int> provenance;       // point -> original location id
  double relocation_cost = 0;
  MetricSpace original_metric;
};

inline ReducedInstance consolidate(const Instance& inst,
                                   const SeedSolution& seed) {
  ReducedInstance red;
  red.center_location = seed.centers;
  red.original_metric = inst.metric;
  red.provenance = inst.location_of;
  red.relocation_cost = seed.cost;

  std::vector<int> compact_of(static_cast<std::size_t>(inst.num_locations()), -1);
  for (std::size_t i = 0; i < seed.centers.size(); ++i)
    compact_of[static_cast<std::size_t>(seed.centers[i])] = static_cast<int>(i);

  std::vector<int> new_loc(static_cast<std::size_t>(inst.num_points()));
  for (int i = 0; i < inst.num_points(); ++i) {
    int c = seed.voronoi[static_cast<std::size_t>(i)];
    int compact = compact_of[static_cast<std::size_t>(c)];
    if (compact < 0)
      throw StructuralError("voronoi center " + std::to_string(c) +
                            " is not a seed center");
    new_loc[static_cast<std::size_t>(i)] = compact;
  }
  red.base = make_instance(inst.group_of, std::move(new_loc),
                           restrict_compact(inst.metric, seed.centers),
                           inst.num_groups);
  return red;
}

// Re-costs a clustering of the reduced instance against the original
// locations. The same points go to the same centers; only distances change,
// and by the triangle inequality the two costs differ by at most the
// relocation cost (checked, with a small float allowance).
inline Clustering lift_clustering(const Clustering& reduced_clustering,
                                  const ReducedInstance& red) {
  const Instance& rbase = red.base;
  Instance original = make_instance(rbase.group_of, red.provenance,
                                    red.original_metric, rbase.num_groups);
  std::vector<int> p2c(static_cast<std::size_t>(rbase.num_points()));
  for (int i = 0; i < rbase.num_points(); ++i) {
    int compact = reduced_clustering.point_to_center[static_cast<std::size_t>(i)];
    p2c[static_cast<std::size_t>(i)] =
        red.center_location[static_cast<std::size_t>(compact)];
  }
  std::vector<int> centers;
  for (int c : reduced_clustering.plan.centers)
    centers.push_back(red.center_location[static_cast<std::size_t>(c)]);

  Clustering lifted;
  lifted.plan = plan_from_point_assignment(original, p2c, centers);
  lifted.point_to_center = std::move(p2c);
  lifted.cost = evaluate_cost(original, lifted.plan);

  double delta = std::abs(lifted.cost - reduced_clustering.cost);
  double slack = 1e-9 * std::max({1.0, lifted.cost, reduced_clustering.cost,
                                  red.relocation_cost});
  if (delta > red.relocation_cost + slack)
    throw InternalError(
        "lifted cost differs from reduced cost by " + std::to_string(delta) +
        " > relocation cost " + std::to_string(red.relocation_cost) +
        "; metric may violate the triangle inequality");
  return lifted;
}

}  // namespace fairmed
