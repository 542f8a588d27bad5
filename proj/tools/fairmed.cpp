#include <CLI11.hpp>

#include "fairmed/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fairmed - fair representation k-median solver"};

  fairmed::RunConfig cfg;
  app.add_option("--input", cfg.input,
                 "points CSV: id,group[,x1,...,xd]; group may be "
                 "'|'-separated for multi-membership")
      ->required();
  app.add_option("--matrix", cfg.matrix,
                 "n x n distance CSV (row order = point order) for the "
                 "coordinate-free schema");
  app.add_option("--k", cfg.k, "number of centers")->required();
  app.add_option("--policy", cfg.policy_spec,
                 "fairness policy: 'exact', 'alphabeta:a1,..;b1,..' or "
                 "'coverage:D=i,j;alpha=r' (rationals as p/q or decimals)");
  app.add_option("--pipeline", cfg.pipeline, "general | exact")
      ->check(CLI::IsMember({"general", "exact"}));
  app.add_option("--trials", cfg.trials,
                 "tree samples per run (default: ceil(4*log2(n+1)) + 1)");
  app.add_option("--seed", cfg.seed, "random seed (64-bit)");
  app.add_option("--threads", cfg.threads,
                 "worker threads for tree trials (results do not depend on it)");
  app.add_flag("--strict-metric", cfg.strict_metric,
               "fail on triangle-inequality violations instead of warning");
  app.add_flag("--forbid-empty", cfg.forbid_empty,
               "require every cluster to be nonempty");
  app.add_option("--out", cfg.out_path,
                 "write the JSON result here instead of stdout");
  app.add_option("--dump-dp", cfg.dump_dp_path,
                 "write the winning tree's DP table to this file");

  CLI11_PARSE(app, argc, argv);
  return fairmed::run(cfg).exit_code;
}
