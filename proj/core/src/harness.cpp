#include "memnav/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>

#include "memnav/controllers.hpp"
#include "memnav/error.hpp"
#include "memnav/grid_exec.hpp"
#include "memnav/rng.hpp"

namespace memnav {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream tags: every consumer of randomness gets its own derivation lane off
// the master seed so adding one never shifts another.
constexpr std::uint64_t kRealizationLane = 1;
constexpr std::uint64_t kRolloutLane = 2;

struct PolicyBundle {
  OptimisticController optimistic;
  HybridController hybrid;
  UctController uct;

  PolicyBundle(const NavGraph& graph, const RunConfig& cfg)
      : hybrid(graph, cfg.c_obs, cfg.alpha), uct(cfg.rollouts, cfg.seed) {}

  Controller& pick(PolicyKind kind) {
    switch (kind) {
      case PolicyKind::Optimistic:
        return optimistic;
      case PolicyKind::RppHybrid:
        return hybrid;
      case PolicyKind::Uct:
        return uct;
    }
    throw ContractViolation("unknown policy kind");
  }
};

// Pre-task bookkeeping shared by both modes: fresh plan for the tree policy,
// fresh stream for the sampling policy.
void prepare_task(PolicyBundle& bundle, const RunConfig& cfg, const NavGraph& graph,
                  const std::string& start, const std::string& goal,
                  const SuperMapStore& store, int trial, int task) {
  if (cfg.policy == PolicyKind::RppHybrid) {
    std::vector<BeliefMap> belief = belief_from_store(store);
    PolicyTree tree = build_policy(graph, belief, start, goal, cfg.c_obs, cfg.alpha);
    bundle.hybrid.set_policy(std::move(tree), std::move(belief));
  } else if (cfg.policy == PolicyKind::Uct) {
    const std::uint64_t lane =
        Rng::derive(cfg.seed, static_cast<std::uint64_t>(trial), kRolloutLane);
    bundle.uct.reseed_task(Rng::derive(lane, static_cast<std::uint64_t>(task)));
  }
}

double percent_of(double cost, double hindsight, bool success) {
  if (!success || std::isnan(hindsight)) return kNaN;
  if (hindsight <= 0.0) return 100.0;  // start on the goal: nothing to normalize
  return 100.0 * cost / hindsight;
}

}  // namespace

const char* policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Optimistic:
      return "optimistic";
    case PolicyKind::RppHybrid:
      return "rpp-hybrid";
    case PolicyKind::Uct:
      return "uct";
  }
  throw ContractViolation("unknown policy kind");
}

std::vector<TaskRow> run_graph_experiment(const EnvironmentSpec& env, const RunConfig& cfg) {
  if (cfg.trials < 1 || cfg.tasks < 1) {
    throw ValidationError("experiments need at least one trial and one task");
  }
  const NavGraph& graph = env.graph;
  const int budget = 10 * static_cast<int>(graph.vertices().size()) *
                     static_cast<int>(graph.edges().size());

  std::vector<TaskRow> rows;
  rows.reserve(static_cast<std::size_t>(cfg.trials) * cfg.tasks);

  for (int trial = 0; trial < cfg.trials; ++trial) {
    Rng draw(Rng::derive(cfg.seed, static_cast<std::uint64_t>(trial), kRealizationLane));
    SuperMapStore store = SuperMapStore::fresh(graph);
    PolicyBundle bundle(graph, cfg);

    for (int task = 0; task < cfg.tasks; ++task) {
      const int r_idx = sample_realization(env, draw);
      const Realization& real = env.realizations[static_cast<std::size_t>(r_idx)];

      prepare_task(bundle, cfg, graph, env.start, env.goal, store, trial, task);
      const TaskOutcome outcome = execute_task(graph, env.start, env.goal, real,
                                               bundle.pick(cfg.policy), cfg.c_obs, budget);
      if (cfg.policy == PolicyKind::Uct) bundle.uct.learn(outcome.record);

      const int landing = map_filter(outcome.record, store, cfg.merge);
      const auto best = shortest_path(graph, real.unblocked, env.start, env.goal);
      const double hindsight = best.has_value() ? best->cost : kNaN;

      TaskRow row;
      row.trial = trial;
      row.task = task;
      row.policy = policy_name(cfg.policy);
      row.cost = outcome.cost;
      row.success = outcome.success;
      row.switched = outcome.switched;
      row.observations = outcome.observations;
      row.hindsight_cost = hindsight;
      row.percent_of_optimal = percent_of(outcome.cost, hindsight, outcome.success);
      row.super_maps = static_cast<int>(store.size());
      row.landing_index = landing;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

// All-knowing walking cost through one realized grid world.
double grid_hindsight(const GridSpec& spec, const std::vector<GridCell>& overlay_cells) {
  ByteGrid passable(spec.base.width, spec.base.height);
  for (int y = 0; y < spec.base.height; ++y) {
    for (int x = 0; x < spec.base.width; ++x) {
      if (spec.base.at(x, y) == 0) passable.set(x, y, 1);
    }
  }
  for (const GridCell& c : overlay_cells) {
    passable.set(c.x, c.y, 0);
  }
  const auto path = cell_shortest_path(passable, spec.start, spec.goal);
  return path.has_value() ? path->cost : kNaN;
}

}  // namespace

std::vector<TaskRow> run_grid_experiment(const GridSpec& spec, const RunConfig& cfg) {
  if (cfg.trials < 1 || cfg.tasks < 1) {
    throw ValidationError("experiments need at least one trial and one task");
  }
  const GridContext ctx = build_grid_context(spec);
  const int cell_budget = 100 * spec.base.width * spec.base.height;

  std::vector<double> hindsights;
  hindsights.reserve(spec.realizations.size());
  for (const auto& overlay : spec.realizations) {
    hindsights.push_back(grid_hindsight(spec, overlay));
  }

  std::vector<TaskRow> rows;
  rows.reserve(static_cast<std::size_t>(cfg.trials) * cfg.tasks);

  for (int trial = 0; trial < cfg.trials; ++trial) {
    Rng draw(Rng::derive(cfg.seed, static_cast<std::uint64_t>(trial), kRealizationLane));
    SuperMapStore store = SuperMapStore::fresh(ctx.graph);
    PolicyBundle bundle(ctx.graph, cfg);

    for (int task = 0; task < cfg.tasks; ++task) {
      const int r_idx = sample_index(spec.pmf, draw);
      const std::vector<GridCell>& overlay = spec.realizations[static_cast<std::size_t>(r_idx)];

      prepare_task(bundle, cfg, ctx.graph, ctx.start_vertex, ctx.goal_vertex, store, trial, task);
      const GridTaskOutcome outcome =
          execute_grid_task(ctx, overlay, bundle.pick(cfg.policy), cfg.c_obs, cell_budget);
      if (cfg.policy == PolicyKind::Uct) bundle.uct.learn(outcome.record);

      const int landing = map_filter(outcome.record, store, cfg.merge);
      const double hindsight = hindsights[static_cast<std::size_t>(r_idx)];

      TaskRow row;
      row.trial = trial;
      row.task = task;
      row.policy = policy_name(cfg.policy);
      row.cost = outcome.cost;
      row.success = outcome.success;
      row.switched = outcome.switched;
      row.observations = outcome.observations;
      row.hindsight_cost = hindsight;
      row.percent_of_optimal = percent_of(outcome.cost, hindsight, outcome.success);
      row.super_maps = static_cast<int>(store.size());
      row.landing_index = landing;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6f", v);
  return buffer;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<TaskRow>& rows) {
  out << "trial,task,policy,cost,success,switched,observations,hindsight_cost,"
         "percent_of_optimal,super_maps,landing_index\n";
  for (const TaskRow& row : rows) {
    out << row.trial << ',' << row.task << ',' << row.policy << ',' << format_double(row.cost)
        << ',' << (row.success ? 1 : 0) << ',' << (row.switched ? 1 : 0) << ','
        << row.observations << ',' << format_double(row.hindsight_cost) << ','
        << format_double(row.percent_of_optimal) << ',' << row.super_maps << ','
        << row.landing_index << '\n';
  }
}

nlohmann::json summarize(const std::vector<TaskRow>& rows) {
  if (rows.empty()) throw ValidationError("cannot summarize an empty run");

  int max_task = 0;
  std::set<int> trials;
  for (const TaskRow& row : rows) {
    max_task = std::max(max_task, row.task);
    trials.insert(row.trial);
  }
  const int tasks = max_task + 1;
  const int bins = (tasks + 9) / 10;

  double percent_sum = 0.0;
  int percent_n = 0;
  double late_sum = 0.0;
  int late_n = 0;
  int successes = 0;
  std::vector<double> switch_sum(static_cast<std::size_t>(bins), 0.0);
  std::vector<int> switch_n(static_cast<std::size_t>(bins), 0);
  std::vector<double> maps_sum(static_cast<std::size_t>(bins), 0.0);

  for (const TaskRow& row : rows) {
    if (!std::isnan(row.percent_of_optimal)) {
      percent_sum += row.percent_of_optimal;
      percent_n += 1;
      if (row.task >= tasks - 10) {
        late_sum += row.percent_of_optimal;
        late_n += 1;
      }
    }
    if (row.success) successes += 1;
    const std::size_t bin = static_cast<std::size_t>(row.task / 10);
    switch_sum[bin] += row.switched ? 1.0 : 0.0;
    switch_n[bin] += 1;
    maps_sum[bin] += row.super_maps;
  }

  nlohmann::json doc;
  doc["policy"] = rows.front().policy;
  doc["trials"] = static_cast<int>(trials.size());
  doc["tasks_per_trial"] = tasks;
  doc["success_rate"] = static_cast<double>(successes) / static_cast<double>(rows.size());
  doc["mean_percent_of_optimal"] = percent_n > 0 ? percent_sum / percent_n : 0.0;
  doc["last10_mean_percent"] = late_n > 0 ? late_sum / late_n : 0.0;
  doc["switch_rate_bins"] = nlohmann::json::array();
  doc["super_map_curve"] = nlohmann::json::array();
  for (std::size_t b = 0; b < static_cast<std::size_t>(bins); ++b) {
    doc["switch_rate_bins"].push_back(switch_n[b] > 0 ? switch_sum[b] / switch_n[b] : 0.0);
    doc["super_map_curve"].push_back(switch_n[b] > 0 ? maps_sum[b] / switch_n[b] : 0.0);
  }
  return doc;
}

}  // namespace memnav
