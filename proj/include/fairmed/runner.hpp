#pragma once

#include <chrono>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fairmed/assignment.hpp"
#include "fairmed/errors.hpp"
#include "fairmed/io.hpp"
#include "fairmed/pipeline.hpp"

namespace fairmed {

struct RunConfig {
  std::string input;
  std::string matrix;
  std::string out_path;
  std::string dump_dp_path;
  int k = 1;
  std::string policy_spec = "exact";
  std::string pipeline = "general";  // general | exact
  long long trials = -1;             // -1: ceil(4*log2(n+1)) + 1
  std::uint64_t seed = 0;
  int threads = 1;
  bool strict_metric = false;
  bool forbid_empty = false;
};

struct RunResult {
  int exit_code = 0;
  nlohmann::ordered_json document;
};

namespace detail {

inline nlohmann::ordered_json report_header(const RunConfig& cfg,
                                            const IngestResult& in) {
  nlohmann::ordered_json doc;
  doc["tool"] = "fairmed";
  nlohmann::ordered_json input;
  input["path"] = cfg.input;
  input["points"] = in.instance.num_points();
  input["num_groups"] = in.instance.num_groups;
  input["groups"] = in.group_names;
  input["virtualized"] = in.virtualized;
  if (in.virtualized) input["original_groups"] = in.original_group_names;
  doc["input"] = std::move(input);
  nlohmann::ordered_json config;
  config["k"] = cfg.k;
  config["policy"] = cfg.policy_spec;
  config["pipeline"] = cfg.pipeline;
  config["seed"] = cfg.seed;
  config["threads"] = cfg.threads;
  config["forbid_empty"] = cfg.forbid_empty;
  config["strict_metric"] = cfg.strict_metric;
  doc["config"] = std::move(config);
  return doc;
}

inline void report_clustering(nlohmann::ordered_json& doc,
                              const IngestResult& in,
                              const FairnessPolicy& user_policy,
                              const Clustering& original,
                              const Clustering& reduced, double tree_cost,
                              double relocation_cost, int trials,
                              int winning_trial) {
  const Instance& inst = in.instance;
  doc["feasible"] = true;
  nlohmann::ordered_json costs;
  costs["tree"] = tree_cost;
  costs["reduced"] = reduced.cost;
  costs["original"] = original.cost;
  costs["relocation"] = relocation_cost;
  doc["costs"] = std::move(costs);

  auto audit = audit_fairness(user_policy, original.plan, inst.num_groups);
  nlohmann::ordered_json fairness;
  fairness["all_admit"] = audit.all_admit;
  fairness["max_gamma"] = audit.max_gamma;
  doc["fairness"] = std::move(fairness);

  nlohmann::ordered_json clusters = nlohmann::ordered_json::array();
  int nonempty = 0;
  for (const auto& center : audit.centers) {
    nlohmann::ordered_json c;
    c["center"] = in.point_ids[static_cast<std::size_t>(center.center)];
    c["center_location"] = center.center;
    c["profile"] = center.profile;
    c["size"] = profile_norm1(center.profile);
    c["admit"] = center.admits;
    if (center.has_gamma)
      c["gamma"] = center.gamma;
    else
      c["gamma"] = nullptr;
    if (profile_norm1(center.profile) > 0) ++nonempty;
    clusters.push_back(std::move(c));
  }
  doc["clusters"] = std::move(clusters);
  doc["num_nonempty_clusters"] = nonempty;

  nlohmann::ordered_json flows = nlohmann::ordered_json::array();
  for (const auto& [key, p] : original.plan.flows)
    for (int j = 0; j < inst.num_groups; ++j)
      if (p[static_cast<std::size_t>(j)] != 0)
        flows.push_back({key.first, key.second, j,
                         p[static_cast<std::size_t>(j)]});
  doc["flows"] = std::move(flows);

  nlohmann::ordered_json assignment = nlohmann::ordered_json::array();
  for (int i = 0; i < inst.num_points(); ++i) {
    nlohmann::ordered_json a;
    a["point"] = in.point_ids[static_cast<std::size_t>(i)];
    a["center"] = in.point_ids[static_cast<std::size_t>(
        original.point_to_center[static_cast<std::size_t>(i)])];
    assignment.push_back(std::move(a));
  }
  doc["assignment"] = std::move(assignment);

  nlohmann::ordered_json stats;
  stats["trials"] = trials;
  stats["winning_trial"] = winning_trial;
  doc["stats"] = std::move(stats);
}

}  // namespace detail

// End-to-end run: ingest, audit the metric, build the policy, execute the
// selected pipeline and serialize the result document. Exit codes: 0 ok,
// 1 input error, 2 infeasible. Wall-clock timing goes to the log so that
// identical seeds and inputs produce byte-identical documents.
inline RunResult run(const RunConfig& cfg) {
  RunResult result;
  try {
    if (cfg.k < 1) throw IngestError("k must be >= 1");
    if (cfg.trials == 0 || cfg.trials < -1)
      throw IngestError("trials must be >= 1 (or omitted for auto)");
    if (cfg.threads < 1) throw IngestError("threads must be >= 1");
    if (cfg.pipeline != "general" && cfg.pipeline != "exact")
      throw IngestError("pipeline must be 'general' or 'exact'");

    IngestResult in = ingest_points(cfg.input, cfg.matrix);
    log_line(LogLevel::kInfo,
             "ingested " + std::to_string(in.instance.num_points()) +
                 " points, " + std::to_string(in.instance.num_groups) +
                 " groups");

    if (in.instance.num_locations() <= 512) {
      auto violations = audit_triangle(in.instance.metric);
      if (!violations.empty()) {
        std::string msg = "metric violates the triangle inequality at (" +
                          std::to_string(violations[0][0]) + "," +
                          std::to_string(violations[0][1]) + "," +
                          std::to_string(violations[0][2]) + ") and " +
                          std::to_string(violations.size() - 1) + " more";
        if (cfg.strict_metric) throw IngestError(msg);
        log_line(LogLevel::kWarn, msg + " (continuing; use --strict-metric to fail)");
      }
    } else {
      log_line(LogLevel::kInfo, "metric too large for the triangle audit");
    }

    FairnessPolicy user_policy = parse_policy_spec(cfg.policy_spec, in);
    result.document = detail::report_header(cfg, in);

    const auto t0 = std::chrono::steady_clock::now();
    int resolved_trials = 0;
    if (cfg.pipeline == "exact") {
      if (!std::holds_alternative<FairnessPolicy::Exact>(user_policy.variant()))
        throw IngestError("the exact pipeline requires --policy exact");
      auto r = exact_pipeline(in.instance, cfg.k,
                              static_cast<int>(cfg.trials), cfg.seed,
                              cfg.threads, cfg.forbid_empty);
      resolved_trials = r.trials;
      detail::report_clustering(result.document, in, user_policy,
                                r.original_clustering, r.reduced_clustering,
                                r.tree_cost, r.reduced.relocation_cost,
                                r.trials, r.winning_trial);
      result.document["costs"]["near_fair"] = r.near_fair.cost;
      auto& stats = result.document["stats"];
      stats["fairlet_size"] = r.shape.size;
      stats["fairlet_profile"] = r.shape.per_group;
      stats["movable_points"] = r.movable.size();
      nlohmann::ordered_json problem_sizes = nlohmann::ordered_json::array();
      for (const auto& dec : r.decompositions)
        problem_sizes.push_back(dec.problematic.size());
      stats["problematic_sizes"] = std::move(problem_sizes);
      stats["near_fair_gamma"] = r.near_fair.gamma;
      if (!cfg.dump_dp_path.empty()) {
        auto solve = solve_one_tree(r.movable_instance, r.movable_policies,
                                    r.winning_seed);
        std::ofstream dump(cfg.dump_dp_path);
        dump_dp(solve.btree, solve.table, dump);
      }
    } else {
      FairnessPolicy effective = cfg.forbid_empty
                                     ? FairnessPolicy::non_empty(user_policy)
                                     : user_policy;
      auto r = general_pipeline(in.instance, cfg.k, effective,
                                static_cast<int>(cfg.trials), cfg.seed,
                                cfg.threads);
      resolved_trials = r.trials;
      detail::report_clustering(result.document, in, user_policy,
                                r.original_clustering, r.reduced_clustering,
                                r.tree_cost, r.reduced.relocation_cost,
                                r.trials, r.winning_trial);
      if (!cfg.dump_dp_path.empty()) {
        NodePolicies policies;
        policies.shared = effective;
        auto solve = solve_one_tree(r.reduced.base, policies, r.winning_seed);
        std::ofstream dump(cfg.dump_dp_path);
        dump_dp(solve.btree, solve.table, dump);
      }
    }
    const auto t1 = std::chrono::steady_clock::now();
    log_line(LogLevel::kInfo,
             "pipeline finished in " +
                 std::to_string(std::chrono::duration<double>(t1 - t0).count()) +
                 " s (" + std::to_string(resolved_trials) + " trials)");
    result.exit_code = 0;
  } catch (const InfeasibleError& e) {
    result.document["feasible"] = false;
    result.document["error"] = e.what();
    log_line(LogLevel::kError, std::string("infeasible: ") + e.what());
    result.exit_code = 2;
  } catch (const std::exception& e) {
    log_line(LogLevel::kError, e.what());
    result.exit_code = 1;
    return result;
  }

  if (!cfg.out_path.empty()) {
    std::ofstream out(cfg.out_path);
    if (!out) {
      log_line(LogLevel::kError, "cannot write " + cfg.out_path);
      result.exit_code = 1;
      return result;
    }
    out << result.document.dump(2) << "\n";
  } else {
    std::cout << result.document.dump(2) << "\n";
  }
  return result;
}

}  // namespace fairmed
