#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fairmed/errors.hpp"

namespace fairmed {

struct MetricImpl {
  virtual ~MetricImpl() = default;
  virtual double distance(int u, int v) const = 0;
  virtual int size() const = 0;
  virtual bool contains(int u) const { return u >= 0 && u < size(); }
};

// Value-semantic handle to an immutable metric over integer location ids.
class MetricSpace {
 public:
  MetricSpace() = default;
  explicit MetricSpace(std::shared_ptr<const MetricImpl> impl)
      : impl_(std::move(impl)) {}

  bool valid() const { return impl_ != nullptr; }
  int size() const { return impl_ ? impl_->size() : 0; }
  bool contains(int u) const { return impl_ && impl_->contains(u); }

  double distance(int u, int v) const {
    if (!contains(u))
      throw PreconditionError("unknown location " + std::to_string(u));
    if (!contains(v))
      throw PreconditionError("unknown location " + std::to_string(v));
    return impl_->distance(u, v);
  }

  static MetricSpace explicit_matrix(std::vector<std::vector<double>> d);
  static MetricSpace euclidean(std::vector<std::vector<double>> coords);

 private:
  std::shared_ptr<const MetricImpl> impl_;
};

namespace detail {

struct ExplicitMatrixImpl final : MetricImpl {
  std::vector<std::vector<double>> d;
  double distance(int u, int v) const override {
    return d[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)];
  }
  int size() const override { return static_cast<int>(d.size()); }
};

struct EuclideanImpl final : MetricImpl {
  std::vector<std::vector<double>> coords;
  double distance(int u, int v) const override {
    const auto& a = coords[static_cast<std::size_t>(u)];
    const auto& b = coords[static_cast<std::size_t>(v)];
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double diff = a[i] - b[i];
      s += diff * diff;
    }
    return std::sqrt(s);
  }
  int size() const override { return static_cast<int>(coords.size()); }
};

struct RestrictedImpl final : MetricImpl {
  std::shared_ptr<const MetricImpl> base;
  std::vector<int> allowed;  // sorted
  double distance(int u, int v) const override {
    return base->distance(u, v);
  }
  int size() const override { return base->size(); }
  bool contains(int u) const override {
    return std::binary_search(allowed.begin(), allowed.end(), u) &&
           base->contains(u);
  }
};

}  // namespace detail

inline MetricSpace MetricSpace::explicit_matrix(
    std::vector<std::vector<double>> d) {
  const std::size_t n = d.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i].size() != n)
      throw IngestError("distance matrix is not square at row " +
                        std::to_string(i));
    if (d[i][i] != 0.0)
      throw IngestError("distance matrix diagonal must be 0 at row " +
                        std::to_string(i));
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(d[i][j]) || d[i][j] < 0)
        throw IngestError("distance matrix entry (" + std::to_string(i) +
                          "," + std::to_string(j) + ") is invalid");
    }
  }
  // Relative asymmetry above 1e-9 is rejected; below that the upper-triangle
  // value wins so the stored matrix is exactly symmetric.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double a = d[i][j], b = d[j][i];
      double scale = std::max({1.0, std::abs(a), std::abs(b)});
      if (std::abs(a - b) > 1e-9 * scale)
        throw IngestError("distance matrix asymmetric at (" +
                          std::to_string(i) + "," + std::to_string(j) + ")");
      d[j][i] = a;
    }
  }
  auto impl = std::make_shared<detail::ExplicitMatrixImpl>();
  impl->d = std::move(d);
  return MetricSpace(impl);
}

inline MetricSpace MetricSpace::euclidean(
    std::vector<std::vector<double>> coords) {
  if (!coords.empty()) {
    std::size_t dim = coords[0].size();
    for (std::size_t i = 0; i < coords.size(); ++i) {
      if (coords[i].size() != dim)
        throw IngestError("coordinate row " + std::to_string(i) +
                          " has inconsistent dimension");
      for (double c : coords[i])
        if (!std::isfinite(c))
          throw IngestError("non-finite coordinate at row " +
                            std::to_string(i));
    }
  }
  auto impl = std::make_shared<detail::EuclideanImpl>();
  impl->coords = std::move(coords);
  return MetricSpace(impl);
}

// Metric agreeing with m on S x S; lookups outside S fail.
inline MetricSpace restrict(const MetricSpace& m, std::vector<int> keep) {
  if (keep.empty()) throw PreconditionError("restriction to empty set");
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  for (int u : keep)
    if (!m.contains(u))
      throw PreconditionError("unknown location " + std::to_string(u));
  // Materialize the needed pairs; ids stay those of m.
  auto impl = std::make_shared<detail::RestrictedImpl>();
  impl->allowed = std::move(keep);
  auto mat = std::make_shared<detail::ExplicitMatrixImpl>();
  int top = 0;
  for (int u : impl->allowed) top = std::max(top, u + 1);
  mat->d.assign(static_cast<std::size_t>(top),
                std::vector<double>(static_cast<std::size_t>(top), 0.0));
  for (int u : impl->allowed)
    for (int v : impl->allowed)
      mat->d[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] =
          m.distance(u, v);
  impl->base = mat;
  return MetricSpace(impl);
}

// Restriction with relabeling: location ids[i] of m becomes id i.
inline MetricSpace restrict_compact(const MetricSpace& m,
                                    const std::vector<int>& ids) {
  if (ids.empty()) throw PreconditionError("restriction to empty set");
  std::vector<std::vector<double>> d(
      ids.size(), std::vector<double>(ids.size(), 0.0));
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = 0; j < ids.size(); ++j)
      d[i][j] = m.distance(ids[i], ids[j]);
  return MetricSpace::explicit_matrix(std::move(d));
}

// Exhaustive triangle-inequality audit. Returns violating triples (a,b,c)
// with d(a,c) > d(a,b) + d(b,c); empty beyond the size cap (the check is
// cubic and advisory).
inline std::vector<std::array<int, 3>> audit_triangle(const MetricSpace& m,
                                                      int size_cap = 512) {
  std::vector<std::array<int, 3>> violations;
  const int n = m.size();
  if (n > size_cap) return violations;
  for (int a = 0; a < n; ++a) {
    if (!m.contains(a)) continue;
    for (int c = 0; c < n; ++c) {
      if (c == a || !m.contains(c)) continue;
      double dac = m.distance(a, c);
      for (int b = 0; b < n; ++b) {
        if (b == a || b == c || !m.contains(b)) continue;
        double path = m.distance(a, b) + m.distance(b, c);
        if (dac > path + 1e-12 * std::max(1.0, dac))
          violations.push_back({a, b, c});
      }
    }
  }
  return violations;
}

}  // namespace fairmed
