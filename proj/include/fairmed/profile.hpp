#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "fairmed/errors.hpp"

namespace fairmed {

// Per-group point counts. Nonnegative when describing location or cluster
// contents; coordinates may be negative when describing net imports of a
// subtree.
using Profile = std::vector<int>;

inline Profile zero_profile(int groups) {
  return Profile(static_cast<std::size_t>(groups), 0);
}

inline Profile profile_add(const Profile& a, const Profile& b) {
  if (a.size() != b.size())
    throw StructuralError("profile length mismatch: " +
                          std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  Profile out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] + b[j];
  return out;
}

inline Profile profile_sub(const Profile& a, const Profile& b) {
  if (a.size() != b.size())
    throw StructuralError("profile length mismatch: " +
                          std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  Profile out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] - b[j];
  return out;
}

inline long long profile_norm1(const Profile& p) {
  long long s = 0;
  for (int x : p) s += x < 0 ? -static_cast<long long>(x) : x;
  return s;
}

inline bool profile_nonnegative(const Profile& p) {
  for (int x : p)
    if (x < 0) return false;
  return true;
}

inline bool profile_is_zero(const Profile& p) {
  for (int x : p)
    if (x != 0) return false;
  return true;
}

struct ProfileHash {
  std::size_t operator()(const Profile& p) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int x : p) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(x));
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

inline std::string profile_to_string(const Profile& p) {
  std::string s = "(";
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (j) s += ",";
    s += std::to_string(p[j]);
  }
  return s + ")";
}

}  // namespace fairmed
