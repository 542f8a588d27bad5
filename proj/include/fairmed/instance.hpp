#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fairmed/errors.hpp"
#include "fairmed/metric.hpp"
#include "fairmed/profile.hpp"

namespace fairmed {

// Immutable point set: each point has one group and one location in the
// metric. Points are indexed 0..n-1; group and location ids are dense.
struct Instance {
  int num_groups = 0;
  std::vector<int> group_of;     // per point
  std::vector<int> location_of;  // per point
  MetricSpace metric;
  std::vector<long long> group_sizes;

  int num_points() const { return static_cast<int>(group_of.size()); }
  int num_locations() const { return metric.size(); }
};

inline Instance make_instance(std::vector<int> group_of,
                              std::vector<int> location_of,
                              MetricSpace metric, int num_groups) {
  if (group_of.size() != location_of.size())
    throw StructuralError("group/location arrays differ in length");
  Instance inst;
  inst.num_groups = num_groups;
  inst.group_sizes.assign(static_cast<std::size_t>(num_groups), 0);
  for (std::size_t i = 0; i < group_of.size(); ++i) {
    int g = group_of[i];
    if (g < 0 || g >= num_groups)
      throw StructuralError("point " + std::to_string(i) +
                            " has group out of range");
    if (!metric.contains(location_of[i]))
      throw StructuralError("point " + std::to_string(i) +
                            " has unknown location " +
                            std::to_string(location_of[i]));
    inst.group_sizes[static_cast<std::size_t>(g)]++;
  }
  inst.group_of = std::move(group_of);
  inst.location_of = std::move(location_of);
  inst.metric = std::move(metric);
  return inst;
}

inline Profile location_profile(const Instance& inst, int location) {
  Profile v = zero_profile(inst.num_groups);
  for (int i = 0; i < inst.num_points(); ++i)
    if (inst.location_of[static_cast<std::size_t>(i)] == location)
      v[static_cast<std::size_t>(inst.group_of[static_cast<std::size_t>(i)])]++;
  return v;
}

inline std::vector<Profile> location_profiles(const Instance& inst) {
  std::vector<Profile> v(static_cast<std::size_t>(inst.num_locations()),
                         zero_profile(inst.num_groups));
  for (int i = 0; i < inst.num_points(); ++i) {
    auto loc = static_cast<std::size_t>(inst.location_of[static_cast<std::size_t>(i)]);
    v[loc][static_cast<std::size_t>(inst.group_of[static_cast<std::size_t>(i)])]++;
  }
  return v;
}

// Locations that host at least one point, ascending.
inline std::vector<int> occupied_locations(const Instance& inst) {
  std::vector<char> seen(static_cast<std::size_t>(inst.num_locations()), 0);
  for (int loc : inst.location_of) seen[static_cast<std::size_t>(loc)] = 1;
  std::vector<int> out;
  for (int q = 0; q < inst.num_locations(); ++q)
    if (seen[static_cast<std::size_t>(q)]) out.push_back(q);
  return out;
}

struct VirtualGroups {
  std::vector<int> group_of;  // per point, virtual group index
  int num_virtual = 0;
  // Sorted original-group ids of each virtual group's membership pattern.
  std::vector<std::vector<int>> pattern;
  // For each original group j, the virtual groups whose pattern contains j;
  // original-group-j counts are the sum of those virtual counts.
  std::vector<std::vector<int>> virtuals_of_original;
  bool identity = false;  // every pattern is a distinct singleton
};

// One virtual group per distinct membership pattern present in the data
// (including the empty pattern when present). Virtual groups are disjoint
// and cover all points, so downstream stages can treat them as ordinary
// groups; virtuals_of_original carries the bookkeeping for translating
// per-original-group constraints.
inline VirtualGroups virtualize_groups(
    const std::vector<std::vector<int>>& memberships, int num_original) {
  VirtualGroups out;
  std::map<std::vector<int>, int> index_of_pattern;
  out.group_of.reserve(memberships.size());
  for (const auto& raw : memberships) {
    std::vector<int> pat = raw;
    std::sort(pat.begin(), pat.end());
    pat.erase(std::unique(pat.begin(), pat.end()), pat.end());
    for (int g : pat)
      if (g < 0 || g >= num_original)
        throw StructuralError("membership group out of range");
    auto it = index_of_pattern.find(pat);
    if (it == index_of_pattern.end()) {
      it = index_of_pattern.emplace(pat, out.num_virtual++).first;
      out.pattern.push_back(pat);
    }
    out.group_of.push_back(it->second);
  }
  out.virtuals_of_original.assign(static_cast<std::size_t>(num_original), {});
  bool identity = out.num_virtual == num_original;
  for (int v = 0; v < out.num_virtual; ++v) {
    const auto& pat = out.pattern[static_cast<std::size_t>(v)];
    if (pat.size() != 1 || pat[0] != v) identity = false;
    for (int j : pat)
      out.virtuals_of_original[static_cast<std::size_t>(j)].push_back(v);
  }
  out.identity = identity;
  return out;
}

}  // namespace fairmed
