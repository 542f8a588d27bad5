#pragma once

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fairmed/errors.hpp"
#include "fairmed/instance.hpp"
#include "fairmed/metric.hpp"
#include "fairmed/policy.hpp"
#include "fairmed/rational.hpp"

namespace fairmed {

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

inline LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("FAIRMED_LOG");
    if (!env) return LogLevel::kWarn;
    std::string s(env);
    if (s == "error") return LogLevel::kError;
    if (s == "warn") return LogLevel::kWarn;
    if (s == "info") return LogLevel::kInfo;
    if (s == "debug") return LogLevel::kDebug;
    return LogLevel::kWarn;
  }();
  return level;
}

inline void log_line(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  const char* names[] = {"error", "warn", "info", "debug"};
  std::cerr << "[fairmed] " << names[static_cast<int>(level)] << ": " << msg
            << "\n";
}

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
  return std::string(s.substr(a, b - a));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
  if (s.empty()) throw IngestError(where + ": empty numeric field");
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    throw IngestError(where + ": not a number: '" + s + "'");
  return v;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace detail

struct IngestResult {
  Instance instance;
  std::vector<std::string> point_ids;
  std::vector<std::string> group_names;           // instance (virtual) groups
  std::vector<std::string> original_group_names;  // as they appeared
  bool virtualized = false;
  VirtualGroups virtual_groups;
};

// Two schemas: `id,group,x1,...,xd` (Euclidean) or `id,group` plus a separate
// n x n distance matrix whose row order is the point order. Group labels map
// to indices by first appearance; a `|`-separated group field declares
// multi-membership and switches the instance to virtual groups.
inline IngestResult ingest_points(const std::string& path,
                                  const std::string& matrix_path = "") {
  auto lines = detail::read_lines(path);
  if (lines.empty()) throw IngestError(path + ": empty file");
  auto header = detail::split(lines[0], ',');
  if (header.size() < 2 || header[0] != "id" || header[1] != "group")
    throw IngestError(path + ": line 1: header must start with id,group");
  const std::size_t dims = header.size() - 2;
  if (dims == 0 && matrix_path.empty())
    throw IngestError(path +
                      ": schema id,group needs a --matrix distance file");
  if (dims > 0 && !matrix_path.empty())
    throw IngestError(path + ": coordinates and --matrix are exclusive");

  IngestResult out;
  std::vector<std::vector<double>> coords;
  std::vector<std::vector<int>> memberships;
  std::vector<std::string> seen_ids;
  bool any_multi = false;

  auto group_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < out.original_group_names.size(); ++i)
      if (out.original_group_names[i] == name) return static_cast<int>(i);
    out.original_group_names.push_back(name);
    return static_cast<int>(out.original_group_names.size()) - 1;
  };

  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::string where = path + ": line " + std::to_string(ln + 1);
    if (detail::trim(lines[ln]).empty()) continue;
    auto fields = detail::split(lines[ln], ',');
    if (fields.size() != header.size())
      throw IngestError(where + ": expected " + std::to_string(header.size()) +
                        " fields, got " + std::to_string(fields.size()));
    if (fields[0].empty()) throw IngestError(where + ": empty id");
    for (const auto& id : seen_ids)
      if (id == fields[0])
        throw IngestError(where + ": duplicate id '" + fields[0] + "'");
    seen_ids.push_back(fields[0]);
    out.point_ids.push_back(fields[0]);

    std::vector<int> groups;
    if (!fields[1].empty()) {
      auto labels = detail::split(fields[1], '|');
      for (const auto& label : labels) {
        if (label.empty())
          throw IngestError(where + ": empty group label in '" + fields[1] + "'");
        groups.push_back(group_index(label));
      }
    }
    if (groups.size() != 1) any_multi = true;
    memberships.push_back(std::move(groups));

    if (dims > 0) {
      std::vector<double> row;
      for (std::size_t d = 0; d < dims; ++d)
        row.push_back(detail::parse_double(fields[2 + d], where));
      coords.push_back(std::move(row));
    }
  }
  const int n = static_cast<int>(out.point_ids.size());
  if (n == 0) throw IngestError(path + ": no data rows");

  MetricSpace metric;
  if (dims > 0) {
    metric = MetricSpace::euclidean(std::move(coords));
  } else {
    auto mlines = detail::read_lines(matrix_path);
    std::vector<std::vector<double>> d;
    for (std::size_t ln = 0; ln < mlines.size(); ++ln) {
      if (detail::trim(mlines[ln]).empty()) continue;
      const std::string where = matrix_path + ": line " + std::to_string(ln + 1);
      auto fields = detail::split(mlines[ln], ',');
      if (static_cast<int>(fields.size()) != n)
        throw IngestError(where + ": expected " + std::to_string(n) +
                          " entries, got " + std::to_string(fields.size()));
      std::vector<double> row;
      for (const auto& f : fields) row.push_back(detail::parse_double(f, where));
      d.push_back(std::move(row));
    }
    if (static_cast<int>(d.size()) != n)
      throw IngestError(matrix_path + ": expected " + std::to_string(n) +
                        " rows, got " + std::to_string(d.size()));
    metric = MetricSpace::explicit_matrix(std::move(d));
  }

  out.virtual_groups = virtualize_groups(
      memberships, static_cast<int>(out.original_group_names.size()));
  std::vector<int> location_of(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) location_of[static_cast<std::size_t>(i)] = i;

  if (!any_multi && out.virtual_groups.identity) {
    std::vector<int> group_of;
    for (const auto& g : memberships) group_of.push_back(g[0]);
    out.instance = make_instance(std::move(group_of), std::move(location_of),
                                 std::move(metric),
                                 static_cast<int>(out.original_group_names.size()));
    out.group_names = out.original_group_names;
    out.virtualized = false;
  } else {
    out.instance =
        make_instance(out.virtual_groups.group_of, std::move(location_of),
                      std::move(metric), out.virtual_groups.num_virtual);
    out.virtualized = true;
    for (const auto& pattern : out.virtual_groups.pattern) {
      if (pattern.empty()) {
        out.group_names.push_back("(none)");
        continue;
      }
      std::string name;
      for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (i) name += "|";
        name += out.original_group_names[static_cast<std::size_t>(pattern[i])];
      }
      out.group_names.push_back(name);
    }
  }
  return out;
}

// Policy grammar: `alphabeta:a1,..,al;b1,..,bl`, `exact`,
// `coverage:D=i,j;alpha=r`. Rationals accepted as `p/q` or decimals; group
// indices in coverage are 1-based over original groups.
inline FairnessPolicy parse_policy_spec(const std::string& spec,
                                        const IngestResult& in) {
  const int num_original = static_cast<int>(in.original_group_names.size());
  auto colon = spec.find(':');
  std::string kind = colon == std::string::npos ? spec : spec.substr(0, colon);
  std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);

  if (kind == "exact") {
    if (!args.empty()) throw IngestError("policy 'exact' takes no arguments");
    if (in.virtualized)
      throw IngestError(
          "exact fairness requires disjoint single-membership groups");
    return FairnessPolicy::exact(in.instance.group_sizes);
  }
  if (kind == "alphabeta") {
    auto halves = detail::split(args, ';');
    if (halves.size() != 2)
      throw IngestError("alphabeta policy needs 'alphas;betas'");
    std::vector<Rational> alpha, beta;
    for (const auto& s : detail::split(halves[0], ','))
      alpha.push_back(parse_rational(s));
    for (const auto& s : detail::split(halves[1], ','))
      beta.push_back(parse_rational(s));
    if (static_cast<int>(alpha.size()) != num_original ||
        static_cast<int>(beta.size()) != num_original)
      throw IngestError("alphabeta policy needs " +
                        std::to_string(num_original) +
                        " alphas and betas (one per group)");
    if (!in.virtualized) return FairnessPolicy::alpha_beta(alpha, beta);
    FairnessPolicy::AggregatedAlphaBeta agg;
    agg.alpha = std::move(alpha);
    agg.beta = std::move(beta);
    agg.virtuals_of_original = in.virtual_groups.virtuals_of_original;
    agg.num_virtual = in.virtual_groups.num_virtual;
    return FairnessPolicy(std::move(agg));
  }
  if (kind == "coverage") {
    std::vector<int> groups;
    bool have_alpha = false;
    Rational alpha;
    for (const auto& part : detail::split(args, ';')) {
      auto eq = part.find('=');
      if (eq == std::string::npos)
        throw IngestError("coverage policy parts must look like key=value");
      std::string key = detail::trim(part.substr(0, eq));
      std::string value = part.substr(eq + 1);
      if (key == "D") {
        for (const auto& s : detail::split(value, ',')) {
          Rational r = parse_rational(s);
          if (r.den != 1 || r.num < 1 || r.num > num_original)
            throw IngestError("coverage group index out of range: " + s);
          groups.push_back(static_cast<int>(r.num) - 1);
        }
      } else if (key == "alpha") {
        alpha = parse_rational(value);
        have_alpha = true;
      } else {
        throw IngestError("unknown coverage key: " + key);
      }
    }
    if (groups.empty() || !have_alpha)
      throw IngestError("coverage policy needs D=... and alpha=...");
    if (!in.virtualized) return FairnessPolicy::coverage(groups, alpha);
    // A point counts as covered iff its pattern meets D.
    std::vector<int> virtuals;
    for (int v = 0; v < in.virtual_groups.num_virtual; ++v) {
      for (int j : in.virtual_groups.pattern[static_cast<std::size_t>(v)]) {
        if (std::find(groups.begin(), groups.end(), j) != groups.end()) {
          virtuals.push_back(v);
          break;
        }
      }
    }
    return FairnessPolicy::coverage(virtuals, alpha);
  }
  throw IngestError("unknown policy kind: '" + kind + "'");
}

}  // namespace fairmed
