// Command-line front end: repeated-task experiments over graph or grid
// environments, decision-tree dumps, and portal-graph extraction from
// occupancy grids.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "memnav/controllers.hpp"
#include "memnav/environment.hpp"
#include "memnav/error.hpp"
#include "memnav/grid.hpp"
#include "memnav/harness.hpp"
#include "memnav/map_memory.hpp"
#include "memnav/policy.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw memnav::ParseError("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> read_grid_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw memnav::ParseError("cannot open file: " + path);
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(line);
  }
  return rows;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw memnav::ParseError("cannot open file for writing: " + path);
  out << content;
}

memnav::GridCell parse_cell(const std::string& text, const char* what) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw memnav::ValidationError(std::string(what) + " must look like X,Y");
  }
  try {
    memnav::GridCell c;
    c.x = std::stoi(text.substr(0, comma));
    c.y = std::stoi(text.substr(comma + 1));
    return c;
  } catch (const std::exception&) {
    throw memnav::ValidationError(std::string(what) + " must look like X,Y");
  }
}

int run_command(const std::string& env_path, const std::string& mode, const std::string& policy,
                int rollouts, int trials, int tasks, std::uint64_t seed, const std::string& merge,
                double c_obs, const std::string& out_path, const std::string& summary_path) {
  memnav::RunConfig cfg;
  if (mode == "graph") {
    cfg.mode = memnav::RunMode::Graph;
  } else if (mode == "grid") {
    cfg.mode = memnav::RunMode::Grid;
  } else {
    throw memnav::ValidationError("mode must be graph or grid, got " + mode);
  }
  if (policy == "optimistic") {
    cfg.policy = memnav::PolicyKind::Optimistic;
  } else if (policy == "rpp-hybrid") {
    cfg.policy = memnav::PolicyKind::RppHybrid;
  } else if (policy == "uct") {
    cfg.policy = memnav::PolicyKind::Uct;
  } else {
    throw memnav::ValidationError("policy must be optimistic, rpp-hybrid, or uct, got " + policy);
  }
  if (merge == "first-fit") {
    cfg.merge = memnav::MergeStrategy::FirstFit;
  } else if (merge == "min-blocked") {
    cfg.merge = memnav::MergeStrategy::MinAddedBlocked;
  } else {
    throw memnav::ValidationError("merge must be first-fit or min-blocked, got " + merge);
  }
  cfg.rollouts = rollouts;
  cfg.trials = trials;
  cfg.tasks = tasks;
  cfg.seed = seed;
  cfg.c_obs = c_obs;

  std::vector<memnav::TaskRow> rows;
  if (cfg.mode == memnav::RunMode::Graph) {
    const memnav::EnvironmentSpec env = memnav::load_environment_file(env_path);
    rows = memnav::run_graph_experiment(env, cfg);
  } else {
    const memnav::GridSpec spec = memnav::load_grid_spec_file(env_path);
    rows = memnav::run_grid_experiment(spec, cfg);
  }

  std::ofstream out(out_path);
  if (!out) throw memnav::ParseError("cannot open file for writing: " + out_path);
  memnav::write_csv(out, rows);

  const nlohmann::json summary = memnav::summarize(rows);
  if (!summary_path.empty()) {
    write_file(summary_path, summary.dump(2) + "\n");
  }
  std::cout << rows.size() << " tasks -> " << out_path
            << "  (mean % of optimal: " << summary["mean_percent_of_optimal"].get<double>()
            << ", success rate: " << summary["success_rate"].get<double>() << ")\n";
  return 0;
}

int dump_policy_command(const std::string& env_path, const std::string& store_path,
                        const std::string& out_path, double c_obs) {
  const memnav::EnvironmentSpec env = memnav::load_environment_file(env_path);
  const memnav::SuperMapStore store =
      memnav::store_from_json(read_file(store_path), env.graph);
  const std::vector<memnav::BeliefMap> belief = memnav::belief_from_store(store);
  const memnav::PolicyTree tree = memnav::build_policy(env.graph, belief, env.start, env.goal,
                                                       c_obs, memnav::PolicyWeights{});
  write_file(out_path, memnav::policy_to_json(tree));
  std::cout << "policy tree -> " << out_path << "  (expected cost "
            << memnav::expected_cost(tree, env.graph, belief, c_obs) << ")\n";
  return 0;
}

int build_graph_command(const std::string& grid_path, const std::string& labels_path,
                        const std::string& start_text, const std::string& goal_text,
                        const std::string& out_path) {
  memnav::GridSpec spec;
  spec.base = memnav::parse_occupancy(read_grid_rows(grid_path));

  const auto label_rows = read_grid_rows(labels_path);
  if (static_cast<int>(label_rows.size()) != spec.base.height) {
    throw memnav::ValidationError("label rows do not match the grid height");
  }
  spec.cell_labels.resize(static_cast<std::size_t>(spec.base.width) * spec.base.height);
  for (int y = 0; y < spec.base.height; ++y) {
    if (static_cast<int>(label_rows[y].size()) != spec.base.width) {
      throw memnav::ValidationError("label rows do not match the grid width");
    }
    for (int x = 0; x < spec.base.width; ++x) {
      if (spec.base.at(x, y) != 0) continue;
      const char c = label_rows[y][static_cast<std::size_t>(x)];
      if (c == '#' || c == '.') {
        throw memnav::ValidationError("free cell without a submap label at (" +
                                      std::to_string(x) + ", " + std::to_string(y) + ")");
      }
      spec.cell_labels[static_cast<std::size_t>(spec.base.index(x, y))] = std::string(1, c);
    }
  }

  spec.start = parse_cell(start_text, "--start");
  spec.goal = parse_cell(goal_text, "--goal");
  for (const memnav::GridCell* c : {&spec.start, &spec.goal}) {
    if (!spec.base.in_bounds(c->x, c->y) || spec.base.at(c->x, c->y) != 0) {
      throw memnav::ValidationError("start and goal must sit on free cells");
    }
  }
  spec.realizations.push_back({});  // base map as-is: nothing extra blocked
  spec.pmf.push_back(1.0);

  const memnav::GridContext ctx = memnav::build_grid_context(std::move(spec));

  memnav::EnvironmentSpec env;
  memnav::Realization all_clear;
  for (const memnav::Edge& e : ctx.graph.edges()) {
    all_clear.unblocked.insert(e.id);
  }
  env.graph = ctx.graph;
  env.start = ctx.start_vertex;
  env.goal = ctx.goal_vertex;
  env.realizations.push_back(std::move(all_clear));
  env.pmf.push_back(1.0);
  write_file(out_path, memnav::environment_to_json(env));
  std::cout << ctx.graph.vertices().size() << " vertices, " << ctx.graph.edges().size()
            << " edges -> " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Repeated-task navigation laboratory"};
  app.require_subcommand(1);

  // run
  std::string env_path;
  std::string mode = "graph";
  std::string policy = "optimistic";
  int rollouts = 100;
  int trials = 1;
  int tasks = 100;
  std::uint64_t seed = 0;
  std::string merge = "first-fit";
  double c_obs = 0.0;
  std::string out_path = "results.csv";
  std::string summary_path;
  CLI::App* run = app.add_subcommand("run", "Run a repeated-task experiment");
  run->add_option("--env", env_path, "Environment file (JSON)")->required();
  run->add_option("--mode", mode, "graph or grid");
  run->add_option("--policy", policy, "optimistic, rpp-hybrid, or uct");
  run->add_option("--rollouts", rollouts, "Sampled worlds per decision (uct)");
  run->add_option("--trials", trials, "Independent trials");
  run->add_option("--tasks", tasks, "Tasks per trial");
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--merge", merge, "first-fit or min-blocked");
  run->add_option("--c-obs", c_obs, "Cost charged per observation");
  run->add_option("--out", out_path, "Per-task CSV output path");
  run->add_option("--summary", summary_path, "Optional aggregate JSON output path");

  // dump-policy
  std::string dp_env;
  std::string dp_store;
  std::string dp_out = "tree.json";
  double dp_c_obs = 0.0;
  CLI::App* dump = app.add_subcommand("dump-policy", "Build and dump a decision tree");
  dump->add_option("--env", dp_env, "Environment file (JSON)")->required();
  dump->add_option("--store", dp_store, "Map store file (JSON)")->required();
  dump->add_option("--out", dp_out, "Tree JSON output path");
  dump->add_option("--c-obs", dp_c_obs, "Cost charged per observation");

  // build-graph
  std::string bg_grid;
  std::string bg_labels;
  std::string bg_start;
  std::string bg_goal;
  std::string bg_out = "env.json";
  CLI::App* build = app.add_subcommand("build-graph", "Extract a portal graph from a grid");
  build->add_option("--grid", bg_grid, "Occupancy grid ('.'/'#' rows)")->required();
  build->add_option("--labels", bg_labels, "Submap label rows")->required();
  build->add_option("--start", bg_start, "Start cell as X,Y")->required();
  build->add_option("--goal", bg_goal, "Goal cell as X,Y")->required();
  build->add_option("--out", bg_out, "Environment JSON output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return run_command(env_path, mode, policy, rollouts, trials, tasks, seed, merge, c_obs,
                         out_path, summary_path);
    }
    if (dump->parsed()) {
      return dump_policy_command(dp_env, dp_store, dp_out, dp_c_obs);
    }
    if (build->parsed()) {
      return build_graph_command(bg_grid, bg_labels, bg_start, bg_goal, bg_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
