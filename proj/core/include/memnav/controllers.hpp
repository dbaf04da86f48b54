#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "memnav/execution.hpp"
#include "memnav/policy.hpp"
#include "memnav/rng.hpp"

namespace memnav {

// Replans at every vertex: shortest route over everything not yet sensed
// blocked, first edge of that route next. Gives up as soon as the sensed
// blockages provably cut the goal off. Stateless, so a partial task resumed
// from any vertex behaves exactly like a task started there.
class OptimisticController : public Controller {
 public:
  Action next_action(const TaskView& view) override;
};

// Follows a precomputed decision tree and drops to the optimistic layer when
// the live task leaves the tree's world: a committed edge is sensed blocked,
// a switch leaf is reached, or no hypothesis at the current node agrees with
// the senses so far. When the executor moves the robot somewhere the tree did
// not anticipate (detours happen in grid worlds), the subtree is rebuilt from
// the live position instead of abandoning the plan.
class HybridController : public Controller {
 public:
  HybridController(const NavGraph& graph, double c_obs, PolicyWeights alpha);

  // Installs the plan for the next task. `maps` must be the belief the tree
  // was built from; it drives the live agreement checks and any rebuilds.
  void set_policy(PolicyTree tree, std::vector<BeliefMap> maps);

  void begin_task(const TaskView& view) override;
  Action next_action(const TaskView& view) override;
  bool switched_to_fallback() const override { return switched_; }

 private:
  Action enter_fallback(const TaskView& view);
  bool rebuild_from(const TaskView& view);

  const NavGraph& graph_;
  double c_obs_;
  PolicyWeights alpha_;

  PolicyTree tree_;
  std::vector<BeliefMap> maps_;

  std::vector<BeliefMap> active_maps_;  // belief the current cursor indexes into
  PolicyTree local_tree_;               // owns subtrees rebuilt mid-task after a detour
  const PolicyNode* node_ = nullptr;
  std::size_t leg_index_ = 0;
  bool observe_emitted_ = false;
  std::string expected_vertex_;
  bool switched_ = false;

  OptimisticController fallback_;
};

// Sampling baseline. Each decision draws full worlds from per-edge frequency
// estimates (conditioned on everything sensed this task), simulates an
// optimistic completion through every candidate edge in every world, and
// commits to the candidate with the cheapest average outcome.
class UctController : public Controller {
 public:
  UctController(int rollouts, std::uint64_t seed);

  // Folds one finished task's senses into the per-edge frequency counts.
  void learn(const MapRecord& record);

  // Gives the controller a fresh deterministic stream for the next task.
  void reseed_task(std::uint64_t seed);

  Action next_action(const TaskView& view) override;

 private:
  double edge_prior(const std::string& edge_id) const;

  int rollouts_;
  Rng rng_;
  // edge id -> (times sensed unblocked, times sensed at all)
  std::unordered_map<std::string, std::pair<int, int>> counts_;
};

}  // namespace memnav
