#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "memnav/environment.hpp"
#include "memnav/grid.hpp"
#include "memnav/map_memory.hpp"
#include "memnav/policy.hpp"

namespace memnav {

enum class RunMode { Graph, Grid };
enum class PolicyKind { Optimistic, RppHybrid, Uct };

const char* policy_name(PolicyKind kind);

struct RunConfig {
  RunMode mode = RunMode::Graph;
  PolicyKind policy = PolicyKind::Optimistic;
  int rollouts = 100;
  int trials = 1;
  int tasks = 100;
  std::uint64_t seed = 0;
  MergeStrategy merge = MergeStrategy::FirstFit;
  double c_obs = 0.0;
  PolicyWeights alpha;
};

// One completed task. `hindsight_cost` is the cost an all-knowing walker
// would have paid in that realization, and `percent_of_optimal` the task
// cost relative to it; both are NaN when the goal was unreachable (and the
// percent also when the task failed), which the CSV writer renders as empty
// cells.
struct TaskRow {
  int trial = 0;
  int task = 0;
  std::string policy;
  double cost = 0.0;
  bool success = false;
  bool switched = false;
  int observations = 0;
  double hindsight_cost = 0.0;
  double percent_of_optimal = 0.0;
  int super_maps = 0;     // store size after this task was filed
  int landing_index = 0;  // super map the task record merged into
};

// Repeated-task experiments. Every policy runs through the same per-trial
// realization streams (derived from the master seed), and every task record
// is filed into the map store regardless of policy, so the learning columns
// stay comparable across controllers.
std::vector<TaskRow> run_graph_experiment(const EnvironmentSpec& env, const RunConfig& cfg);
std::vector<TaskRow> run_grid_experiment(const GridSpec& spec, const RunConfig& cfg);

// Fixed header, fixed six-decimal formatting, NaN as empty field: byte-stable
// output for golden files.
void write_csv(std::ostream& out, const std::vector<TaskRow>& rows);

// Aggregates a run: overall and late-phase percent-of-optimal, success rate,
// switch rate per ten-task bin, and the growth curve of the map store.
nlohmann::json summarize(const std::vector<TaskRow>& rows);

}  // namespace memnav
