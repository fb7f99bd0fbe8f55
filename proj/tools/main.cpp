#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace cmdp;
using namespace cmdp::cli;

int main(int argc, char** argv) {
  CLI::App app{"Qualitative controller synthesis for consumption MDPs"};
  app.require_subcommand(1);
  int code = kOk;

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a model file");
  validate_cmd->add_option("model", validate_path)->required();
  validate_cmd->callback([&] { code = cmd_validate(validate_path, std::cout, std::cerr); });

  SolveOptions solve_opts;
  auto* solve_cmd = app.add_subcommand("solve", "Compute minimal initial loads and a strategy");
  solve_cmd->add_option("model", solve_opts.model)->required();
  solve_cmd->add_option("--objective", solve_opts.objective)->check(CLI::IsMember({"safe", "posreach", "buchi"}));
  solve_cmd->add_option("--targets", solve_opts.targets, "Comma-separated state names");
  solve_cmd->add_option("--semantics", solve_opts.semantics)->check(CLI::IsMember({"truncated", "literal"}));
  solve_cmd->add_option("--state", solve_opts.state);
  solve_cmd->add_option("--initial-load", solve_opts.initial_load);
  solve_cmd->add_option("--strategy-out", solve_opts.strategy_out);
  solve_cmd->callback([&] { code = cmd_solve(solve_opts, std::cout, std::cerr); });

  SimulateOptions sim_opts;
  auto* sim_cmd = app.add_subcommand("simulate", "Sample a run of a strategy");
  sim_cmd->add_option("model", sim_opts.model)->required();
  sim_cmd->add_option("strategy", sim_opts.strategy)->required();
  sim_cmd->add_option("--state", sim_opts.state)->required();
  sim_cmd->add_option("--load", sim_opts.load);
  sim_cmd->add_option("--steps", sim_opts.steps);
  sim_cmd->add_option("--seed", sim_opts.seed);
  sim_cmd->callback([&] { code = cmd_simulate(sim_opts, std::cout, std::cerr); });

  VerifyOptions verify_opts;
  auto* verify_cmd = app.add_subcommand("verify", "Check a strategy on its induced Markov chains");
  verify_cmd->add_option("model", verify_opts.model)->required();
  verify_cmd->add_option("strategy", verify_opts.strategy)->required();
  verify_cmd->add_option("--objective", verify_opts.objective)->check(CLI::IsMember({"safe", "posreach", "buchi"}));
  verify_cmd->add_option("--targets", verify_opts.targets);
  verify_cmd->callback([&] { code = cmd_verify(verify_opts, std::cout, std::cerr); });

  UnfoldOptions unfold_opts;
  auto* unfold_cmd = app.add_subcommand("unfold", "Write the explicit (state, level) MDP");
  unfold_cmd->add_option("model", unfold_opts.model)->required();
  unfold_cmd->add_option("--out", unfold_opts.out);
  unfold_cmd->add_option("--node-limit", unfold_opts.node_limit);
  unfold_cmd->callback([&] { code = cmd_unfold(unfold_opts, std::cout, std::cerr); });

  std::string mec_path;
  std::size_t mec_limit = kDefaultNodeLimit;
  auto* mec_cmd = app.add_subcommand("mec", "Maximal end components of the unfolding");
  mec_cmd->add_option("model", mec_path)->required();
  mec_cmd->add_option("--node-limit", mec_limit);
  mec_cmd->callback([&] { code = cmd_mec(mec_path, mec_limit, std::cout, std::cerr); });

  auto* gen_cmd = app.add_subcommand("gen", "Generate benchmark models");
  gen_cmd->require_subcommand(1);
  std::optional<std::string> gen_out;
  gen_cmd->add_option("--out", gen_out);

  GridSpec grid;
  std::vector<std::size_t> grid_target;
  auto* grid_cmd = gen_cmd->add_subcommand("grid", "Helicopter and rover grid world");
  grid_cmd->add_option("--n", grid.n);
  grid_cmd->add_option("--slip", grid.slip)->check(CLI::Range(0.0, 1.0));
  grid_cmd->add_option("--heli-cost", grid.heli_cost);
  grid_cmd->add_option("--hover-cost", grid.hover_cost);
  grid_cmd->add_option("--capacity", grid.capacity);
  grid_cmd->add_option("--target", grid_target, "Target cell as X Y")->expected(2);
  grid_cmd->add_option("--seed", grid.seed);
  grid_cmd->add_option("--out", gen_out);
  grid_cmd->callback([&] {
    if (grid_target.size() == 2) grid.targets = {{grid_target[0], grid_target[1]}};
    code = cmd_gen_grid(grid, gen_out, std::cout, std::cerr);
  });

  StreetSpec streets;
  auto* streets_cmd = gen_cmd->add_subcommand("streets", "Street grid with stochastic consumption");
  streets_cmd->add_option("--rows", streets.rows);
  streets_cmd->add_option("--cols", streets.cols);
  streets_cmd->add_option("--capacity", streets.capacity);
  streets_cmd->add_option("--min-cost", streets.min_cost);
  streets_cmd->add_option("--max-cost", streets.max_cost);
  streets_cmd->add_option("--stations", streets.station_fraction);
  streets_cmd->add_option("--one-way", streets.one_way_fraction);
  streets_cmd->add_option("--targets", streets.target_fraction);
  streets_cmd->add_option("--seed", streets.seed);
  streets_cmd->add_option("--out", gen_out);
  streets_cmd->callback([&] { code = cmd_gen_streets(streets, gen_out, std::cout, std::cerr); });

  RandomSpec random;
  auto* random_cmd = gen_cmd->add_subcommand("random", "Random decreasing CMDP");
  random_cmd->add_option("--states", random.states);
  random_cmd->add_option("--actions", random.actions);
  random_cmd->add_option("--reload-fraction", random.reload_fraction);
  random_cmd->add_option("--cap-min", random.cap_min);
  random_cmd->add_option("--cap-max", random.cap_max);
  random_cmd->add_option("--max-successors", random.max_successors);
  random_cmd->add_option("--target-fraction", random.target_fraction);
  random_cmd->add_option("--seed", random.seed);
  random_cmd->add_option("--out", gen_out);
  random_cmd->callback([&] { code = cmd_gen_random(random, gen_out, std::cout, std::cerr); });

  BenchSpec bench;
  std::optional<std::string> bench_csv;
  auto* bench_cmd = app.add_subcommand("bench", "Capacity scaling: counter solver vs explicit MEC baseline");
  bench_cmd->add_option("--caps", bench.caps)->delimiter(',');
  bench_cmd->add_option("--grid-n", bench.grid_n)->delimiter(',');
  bench_cmd->add_option("--repeats", bench.repeats);
  bench_cmd->add_option("--seed", bench.seed);
  bench_cmd->add_option("--csv", bench_csv);
  bench_cmd->callback([&] { code = cmd_bench(bench, bench_csv, std::cout, std::cerr); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kInputError;
  }
  return code;
}
