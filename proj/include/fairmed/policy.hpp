#pragma once

#include <algorithm>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fairmed/errors.hpp"
#include "fairmed/profile.hpp"
#include "fairmed/rational.hpp"

namespace fairmed {

// Membership oracle over nonnegative cluster profiles: a cluster with
// profile R is admissible iff the policy admits R. All bound checks use
// exact integer cross-multiplication; membership never depends on floating
// point.
class FairnessPolicy {
 public:
  // alpha_j * |C| <= R_j <= beta_j * |C| for every group j.
  struct AlphaBeta {
    std::vector<Rational> alpha;
    std::vector<Rational> beta;
  };

  // R_j * |X| == |X_j| * |C| for every group j (cluster proportions equal
  // global proportions exactly).
  struct Exact {
    std::vector<long long> group_sizes;
  };

  // sum_{j in groups} R_j >= alpha * |C|.
  struct Coverage {
    std::vector<int> groups;
    Rational alpha;
  };

  // Explicit admissible set; sorted for binary search.
  struct ExplicitSet {
    std::vector<Profile> profiles;
  };

  // Admits R iff base admits R + offset. Used to account for points frozen
  // at a center while the remainder is re-optimized.
  struct ShiftedBy {
    std::shared_ptr<const FairnessPolicy> base;
    Profile offset;
  };

  // Alpha/beta bounds stated over original groups, evaluated on virtual-group
  // profiles: the count for original group j is the sum over the virtual
  // groups whose membership pattern contains j, while |C| stays the plain
  // cluster size (virtual groups partition the points).
  struct AggregatedAlphaBeta {
    std::vector<Rational> alpha;
    std::vector<Rational> beta;
    std::vector<std::vector<int>> virtuals_of_original;
    int num_virtual = 0;
  };

  // Rejects the all-zero profile, otherwise defers to base.
  struct NonEmpty {
    std::shared_ptr<const FairnessPolicy> base;
  };

  using Variant = std::variant<AlphaBeta, Exact, Coverage, ExplicitSet,
                               ShiftedBy, AggregatedAlphaBeta, NonEmpty>;

  FairnessPolicy() : v_(AlphaBeta{}) {}
  explicit FairnessPolicy(Variant v) : v_(std::move(v)) {
    if (auto* e = std::get_if<ExplicitSet>(&v_))
      std::sort(e->profiles.begin(), e->profiles.end());
    if (auto* s = std::get_if<ShiftedBy>(&v_)) {
      if (!profile_nonnegative(s->offset))
        throw StructuralError("ShiftedBy offset must be nonnegative");
    }
  }

  static FairnessPolicy alpha_beta(std::vector<Rational> alpha,
                                   std::vector<Rational> beta) {
    if (alpha.size() != beta.size())
      throw StructuralError("alpha/beta length mismatch");
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      if (alpha[j] < Rational(0) || beta[j] < alpha[j] ||
          Rational(1) < beta[j])
        throw StructuralError("need 0 <= alpha_j <= beta_j <= 1 at group " +
                              std::to_string(j));
    }
    return FairnessPolicy(AlphaBeta{std::move(alpha), std::move(beta)});
  }

  static FairnessPolicy exact(std::vector<long long> group_sizes) {
    for (long long s : group_sizes)
      if (s < 0) throw StructuralError("negative group size");
    return FairnessPolicy(Exact{std::move(group_sizes)});
  }

  static FairnessPolicy coverage(std::vector<int> groups, Rational alpha) {
    return FairnessPolicy(Coverage{std::move(groups), alpha});
  }

  static FairnessPolicy explicit_set(std::vector<Profile> profiles) {
    return FairnessPolicy(ExplicitSet{std::move(profiles)});
  }

  static FairnessPolicy shifted_by(FairnessPolicy base, Profile offset) {
    return FairnessPolicy(ShiftedBy{
        std::make_shared<const FairnessPolicy>(std::move(base)),
        std::move(offset)});
  }

  static FairnessPolicy non_empty(FairnessPolicy base) {
    return FairnessPolicy(
        NonEmpty{std::make_shared<const FairnessPolicy>(std::move(base))});
  }

  const Variant& variant() const { return v_; }

  bool admits(const Profile& r) const {
    if (!profile_nonnegative(r))
      throw PreconditionError("policy_admits requires a nonnegative profile, got " +
                              profile_to_string(r));
    return admits_checked(r);
  }

 private:
  bool admits_checked(const Profile& r) const {
    return std::visit(
        [&](const auto& p) -> bool { return admits_impl(p, r); }, v_);
  }

  static bool admits_impl(const AlphaBeta& p, const Profile& r) {
    if (r.size() != p.alpha.size())
      throw StructuralError("profile length does not match policy arity");
    long long s = profile_norm1(r);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (!p.alpha[j].times_le(s, r[j])) return false;
      if (!p.beta[j].times_ge(s, r[j])) return false;
    }
    return true;
  }

  static bool admits_impl(const Exact& p, const Profile& r) {
    if (r.size() != p.group_sizes.size())
      throw StructuralError("profile length does not match policy arity");
    long long total = 0;
    for (long long g : p.group_sizes) total += g;
    long long s = profile_norm1(r);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (static_cast<__int128>(r[j]) * total !=
          static_cast<__int128>(p.group_sizes[j]) * s)
        return false;
    }
    return true;
  }

  static bool admits_impl(const Coverage& p, const Profile& r) {
    long long s = profile_norm1(r);
    long long covered = 0;
    for (int g : p.groups) {
      if (g < 0 || g >= static_cast<int>(r.size()))
        throw StructuralError("coverage group index out of range");
      covered += r[static_cast<std::size_t>(g)];
    }
    return p.alpha.times_le(s, covered);
  }

  static bool admits_impl(const ExplicitSet& p, const Profile& r) {
    return std::binary_search(p.profiles.begin(), p.profiles.end(), r);
  }

  static bool admits_impl(const ShiftedBy& p, const Profile& r) {
    return p.base->admits(profile_add(r, p.offset));
  }

  static bool admits_impl(const AggregatedAlphaBeta& p, const Profile& r) {
    if (static_cast<int>(r.size()) != p.num_virtual)
      throw StructuralError("profile length does not match policy arity");
    long long s = profile_norm1(r);
    for (std::size_t j = 0; j < p.alpha.size(); ++j) {
      long long agg = 0;
      for (int g : p.virtuals_of_original[j]) agg += r[static_cast<std::size_t>(g)];
      if (!p.alpha[j].times_le(s, agg)) return false;
      if (!p.beta[j].times_ge(s, agg)) return false;
    }
    return true;
  }

  static bool admits_impl(const NonEmpty& p, const Profile& r) {
    return profile_norm1(r) > 0 && p.base->admits(r);
  }

  Variant v_;
};

inline bool policy_admits(const FairnessPolicy& policy, const Profile& r) {
  return policy.admits(r);
}

// All admissible nonnegative profiles with coordinates bounded by caps.
// Drives the DP's per-center enumeration; caps are the instance group totals.
inline std::vector<Profile> enumerate_admissible(
    const FairnessPolicy& policy, const std::vector<long long>& caps) {
  std::vector<Profile> out;
  Profile p = zero_profile(static_cast<int>(caps.size()));
  while (true) {
    if (policy.admits(p)) out.push_back(p);
    std::size_t j = 0;
    while (j < p.size()) {
      if (p[j] < caps[j]) {
        ++p[j];
        break;
      }
      p[j] = 0;
      ++j;
    }
    if (j == p.size()) break;
  }
  return out;
}

}  // namespace fairmed
