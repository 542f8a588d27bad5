#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fairmed/errors.hpp"
#include "fairmed/instance.hpp"
#include "fairmed/policy.hpp"
#include "fairmed/profile.hpp"

namespace fairmed {

// Aggregate assignment: flows[(location, center)] is the profile of points
// at that location assigned to that center. Keyed map keeps serialization
// and cost evaluation order deterministic.
struct AssignmentPlan {
  std::map<std::pair<int, int>, Profile> flows;
  std::vector<int> centers;  // sorted, may include centers with empty clusters

  void add_flow(int location, int center, const Profile& p) {
    if (profile_is_zero(p)) return;
    auto key = std::make_pair(location, center);
    auto it = flows.find(key);
    if (it == flows.end())
      flows.emplace(key, p);
    else
      it->second = profile_add(it->second, p);
  }
};

struct Clustering {
  AssignmentPlan plan;
  std::vector<int> point_to_center;  // per point, center location id
  double cost = 0;
};

inline Profile center_profile(const AssignmentPlan& plan, int center,
                              int num_groups) {
  Profile r = zero_profile(num_groups);
  for (const auto& [key, p] : plan.flows)
    if (key.second == center) r = profile_add(r, p);
  return r;
}

// Validates flow conservation against the instance, then evaluates the
// clustering objective: sum over flows of d(location, center) * flow size.
inline double evaluate_cost(const Instance& inst, const AssignmentPlan& plan) {
  auto v = location_profiles(inst);
  std::vector<Profile> assigned(v.size(), zero_profile(inst.num_groups));
  for (const auto& [key, p] : plan.flows) {
    auto [q, c] = key;
    if (!inst.metric.contains(q))
      throw StructuralError("plan references unknown location " +
                            std::to_string(q));
    if (!inst.metric.contains(c))
      throw StructuralError("plan references unknown center " +
                            std::to_string(c));
    if (!profile_nonnegative(p))
      throw StructuralError("negative flow at location " + std::to_string(q));
    assigned[static_cast<std::size_t>(q)] =
        profile_add(assigned[static_cast<std::size_t>(q)], p);
  }
  for (int q = 0; q < inst.num_locations(); ++q) {
    if (assigned[static_cast<std::size_t>(q)] !=
        v[static_cast<std::size_t>(q)])
      throw StructuralError(
          "flow conservation violated at location " + std::to_string(q) +
          ": assigned " +
          profile_to_string(assigned[static_cast<std::size_t>(q)]) +
          ", present " + profile_to_string(v[static_cast<std::size_t>(q)]));
  }
  double cost = 0;
  for (const auto& [key, p] : plan.flows)
    cost += inst.metric.distance(key.first, key.second) *
            static_cast<double>(profile_norm1(p));
  return cost;
}

// Point-level assignment from aggregate flows. Within each (location, group)
// bucket, points are consumed in ascending point id, and flows are consumed
// in ascending center id; interchangeability makes any choice valid, this
// one is deterministic.
inline std::vector<int> derive_point_assignment(const Instance& inst,
                                                const AssignmentPlan& plan) {
  std::map<std::pair<int, int>, std::vector<int>> bucket;  // (loc, group)
  for (int i = 0; i < inst.num_points(); ++i)
    bucket[{inst.location_of[static_cast<std::size_t>(i)],
            inst.group_of[static_cast<std::size_t>(i)]}]
        .push_back(i);
  std::map<std::pair<int, int>, std::size_t> cursor;
  std::vector<int> out(static_cast<std::size_t>(inst.num_points()), -1);
  for (const auto& [key, p] : plan.flows) {
    auto [q, c] = key;
    for (int j = 0; j < inst.num_groups; ++j) {
      int count = p[static_cast<std::size_t>(j)];
      if (count == 0) continue;
      auto& ids = bucket[{q, j}];
      auto& at = cursor[{q, j}];
      if (at + static_cast<std::size_t>(count) > ids.size())
        throw StructuralError("plan assigns more points than present at location " +
                              std::to_string(q));
      for (int t = 0; t < count; ++t) out[static_cast<std::size_t>(ids[at++])] = c;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out[i] < 0)
      throw StructuralError("plan leaves point " + std::to_string(i) +
                            " unassigned");
  return out;
}

inline AssignmentPlan plan_from_point_assignment(
    const Instance& inst, const std::vector<int>& point_to_center,
    std::vector<int> centers = {}) {
  AssignmentPlan plan;
  for (int i = 0; i < inst.num_points(); ++i) {
    int c = point_to_center[static_cast<std::size_t>(i)];
    Profile p = zero_profile(inst.num_groups);
    p[static_cast<std::size_t>(inst.group_of[static_cast<std::size_t>(i)])] = 1;
    plan.add_flow(inst.location_of[static_cast<std::size_t>(i)], c, p);
    centers.push_back(c);
  }
  std::sort(centers.begin(), centers.end());
  centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
  plan.centers = std::move(centers);
  return plan;
}

struct FairnessReport {
  struct Center {
    int center = -1;
    Profile profile;
    bool admits = false;
    bool has_gamma = false;
    double gamma = 0;  // realized additive violation, Exact policies only
  };
  std::vector<Center> centers;
  bool all_admit = true;
  double max_gamma = 0;
};

// Per-center admission flags; for Exact policies also the realized additive
// violation max_j |R_j(c) - (f_j/f) * |R(c)||.
inline FairnessReport audit_fairness(const FairnessPolicy& policy,
                                     const AssignmentPlan& plan,
                                     int num_groups) {
  FairnessReport report;
  const auto* exact =
      std::get_if<FairnessPolicy::Exact>(&policy.variant());
  long long total = 0;
  if (exact)
    for (long long g : exact->group_sizes) total += g;
  for (int c : plan.centers) {
    FairnessReport::Center entry;
    entry.center = c;
    entry.profile = center_profile(plan, c, num_groups);
    entry.admits = policy.admits(entry.profile);
    if (exact && total > 0) {
      entry.has_gamma = true;
      long long s = profile_norm1(entry.profile);
      double gamma = 0;
      for (int j = 0; j < num_groups; ++j) {
        double target = static_cast<double>(exact->group_sizes[static_cast<std::size_t>(j)]) *
                        static_cast<double>(s) / static_cast<double>(total);
        gamma = std::max(gamma,
                         std::abs(static_cast<double>(
                                      entry.profile[static_cast<std::size_t>(j)]) -
                                  target));
      }
      entry.gamma = gamma;
      report.max_gamma = std::max(report.max_gamma, gamma);
    }
    report.all_admit = report.all_admit && entry.admits;
    report.centers.push_back(std::move(entry));
  }
  return report;
}

}  // namespace fairmed
