#include <doctest.h>

#include <string>
#include <utility>
#include <vector>

#include "memnav/environment.hpp"
#include "memnav/error.hpp"
#include "memnav/execution.hpp"
#include "support/fixtures.hpp"

using namespace memnav;

namespace {

// Replays a fixed action list, then gives up.  Counts the executor callbacks
// so tests can assert how the task loop consulted it.
class ScriptController final : public Controller {
 public:
  explicit ScriptController(std::vector<Action> actions) : actions_(std::move(actions)) {}

  void begin_task(const TaskView&) override { ++begin_calls; }

  Action next_action(const TaskView&) override {
    ++action_calls;
    if (next_ >= actions_.size()) return Action::terminate(false);
    return actions_[next_++];
  }

  bool switched_to_fallback() const override { return report_switched; }

  int begin_calls = 0;
  int action_calls = 0;
  bool report_switched = false;

 private:
  std::vector<Action> actions_;
  std::size_t next_ = 0;
};

// Shuttles back and forth over one edge forever.
class PingPongController final : public Controller {
 public:
  explicit PingPongController(std::string edge_id) : edge_id_(std::move(edge_id)) {}
  Action next_action(const TaskView&) override { return Action::traverse(edge_id_); }

 private:
  std::string edge_id_;
};

}  // namespace

TEST_CASE("a scripted walk accumulates cost, senses, and the vertex trail") {
  const EnvironmentSpec env = test::load_env_fixture("diamond.json");
  const Realization& open = env.realizations[0];

  ScriptController ctrl({Action::traverse("e_sa"), Action::traverse("e_ag")});
  const TaskOutcome out = execute_task(env.graph, "s", "g", open, ctrl, 0.5, 100);

  CHECK(out.success);
  CHECK(out.cost == doctest::Approx(2.0));
  CHECK(out.traversals == 2);
  CHECK(out.observations == 0);
  CHECK_FALSE(out.switched);
  CHECK(out.visited == std::vector<std::string>{"s", "a", "g"});
  CHECK(out.traversed_edges == std::vector<std::string>{"e_sa", "e_ag"});
  // Arrival sensing at s saw both start edges; at a it saw the short arm; the
  // goal sweep resolved the rest of the open world.
  CHECK(out.record.unblocked == EdgeIdSet{"e_ag", "e_bg", "e_sa", "e_sb"});
  CHECK(out.record.blocked.empty());
  CHECK(ctrl.begin_calls == 1);
  CHECK(ctrl.action_calls == 2);
}

TEST_CASE("starting on the goal succeeds without consulting the controller") {
  const EnvironmentSpec env = test::load_env_fixture("diamond.json");
  ScriptController ctrl({});
  const TaskOutcome out = execute_task(env.graph, "g", "g", env.realizations[0], ctrl, 0.0, 10);

  CHECK(out.success);
  CHECK(out.cost == 0.0);
  CHECK(out.visited == std::vector<std::string>{"g"});
  // The start sweep still runs: both goal edges land in the record.
  CHECK(out.record.unblocked == EdgeIdSet{"e_ag", "e_bg"});
  CHECK(ctrl.begin_calls == 0);
  CHECK(ctrl.action_calls == 0);
}

TEST_CASE("observe pays the observation charge and never moves the agent") {
  const EnvironmentSpec env = test::load_env_fixture("diamond.json");
  ScriptController ctrl({Action::observe("e_sa"), Action::observe("e_sb"),
                         Action::traverse("e_sa"), Action::traverse("e_ag")});
  const TaskOutcome out = execute_task(env.graph, "s", "g", env.realizations[0], ctrl, 0.25, 100);

  CHECK(out.success);
  CHECK(out.cost == doctest::Approx(2.5));
  CHECK(out.observations == 2);
  CHECK(out.traversals == 2);
  CHECK(out.visited == std::vector<std::string>{"s", "a", "g"});
}

TEST_CASE("illegal actions are contract violations") {
  const EnvironmentSpec env = test::load_env_fixture("diamond.json");
  const Realization& open = env.realizations[0];
  const Realization& shut = env.realizations[1];

  SUBCASE("traversing an edge the graph does not have") {
    ScriptController ctrl({Action::traverse("e_zz")});
    CHECK_THROWS_AS(execute_task(env.graph, "s", "g", open, ctrl, 0.0, 10), ContractViolation);
  }
  SUBCASE("traversing an edge not incident to the current vertex") {
    ScriptController ctrl({Action::traverse("e_bg")});
    CHECK_THROWS_AS(execute_task(env.graph, "s", "g", open, ctrl, 0.0, 10), ContractViolation);
  }
  SUBCASE("traversing an edge arrival sensing already proved blocked") {
    ScriptController ctrl({Action::traverse("e_sa"), Action::traverse("e_ag")});
    CHECK_THROWS_AS(execute_task(env.graph, "s", "g", shut, ctrl, 0.0, 10), ContractViolation);
  }
  SUBCASE("observing an edge the graph does not have") {
    ScriptController ctrl({Action::observe("e_zz")});
    CHECK_THROWS_AS(execute_task(env.graph, "s", "g", open, ctrl, 0.0, 10), ContractViolation);
  }
  SUBCASE("observing an edge not incident to the current vertex") {
    ScriptController ctrl({Action::observe("e_bg")});
    CHECK_THROWS_AS(execute_task(env.graph, "s", "g", open, ctrl, 0.0, 10), ContractViolation);
  }
  SUBCASE("declaring success away from the goal") {
    ScriptController ctrl({Action::terminate(true)});
    CHECK_THROWS_AS(execute_task(env.graph, "s", "g", open, ctrl, 0.0, 10), ContractViolation);
  }
}

TEST_CASE("giving up keeps the cost spent so far and the fallback flag") {
  const EnvironmentSpec env = test::load_env_fixture("diamond.json");
  ScriptController ctrl({Action::traverse("e_sa"), Action::terminate(false)});
  ctrl.report_switched = true;
  const TaskOutcome out = execute_task(env.graph, "s", "g", env.realizations[1], ctrl, 0.0, 10);

  CHECK_FALSE(out.success);
  CHECK(out.cost == doctest::Approx(1.0));
  CHECK(out.switched);
  CHECK(out.visited == std::vector<std::string>{"s", "a"});
  CHECK(out.record.blocked == EdgeIdSet{"e_ag"});
  CHECK(out.record.unblocked == EdgeIdSet{"e_sa", "e_sb"});
}

TEST_CASE("a controller that never finishes trips the step budget") {
  const EnvironmentSpec env = test::load_env_fixture("diamond.json");
  PingPongController ctrl("e_sa");
  CHECK_THROWS_AS(execute_task(env.graph, "s", "g", env.realizations[0], ctrl, 0.0, 25),
                  RunawayPolicyError);
}

TEST_CASE("unknown task endpoints are rejected up front") {
  const EnvironmentSpec env = test::load_env_fixture("diamond.json");
  ScriptController ctrl({});
  CHECK_THROWS_AS(execute_task(env.graph, "zz", "g", env.realizations[0], ctrl, 0.0, 10),
                  ValidationError);
  CHECK_THROWS_AS(execute_task(env.graph, "s", "zz", env.realizations[0], ctrl, 0.0, 10),
                  ValidationError);
}
