#pragma once

#include <string>
#include <vector>

#include "memnav/environment.hpp"
#include "memnav/map_memory.hpp"
#include "memnav/nav_graph.hpp"

namespace memnav {

// Edge knowledge accumulated while a task runs.  Edges move from "absent from
// both sets" (unknown) to exactly one of the two sets and never move back.
struct KnownSets {
  EdgeIdSet blocked;
  EdgeIdSet unblocked;

  bool is_known(const std::string& edge_id) const {
    return blocked.count(edge_id) > 0 || unblocked.count(edge_id) > 0;
  }
};

// One primitive command issued by a controller.
struct Action {
  enum class Kind { Traverse, Observe, Terminate };

  Kind kind = Kind::Terminate;
  std::string edge_id;  // Traverse / Observe target
  bool success = false; // Terminate flag

  static Action traverse(std::string edge_id);
  static Action observe(std::string edge_id);
  static Action terminate(bool success);
};

// Read-only view of the task handed to a controller each time it must act.
// The known sets already include the senses from the current vertex.
struct TaskView {
  const NavGraph& graph;
  const std::string& start;
  const std::string& goal;
  const std::string& current;
  const KnownSets& known;
  double c_obs = 0.0;
};

// Decision interface shared by every navigation policy.  The executor senses
// all edges incident to a vertex on arrival (the start included), so a
// controller is only ever asked to act with its local edges resolved, and it
// is never asked to act once the goal has been reached.
class Controller {
 public:
  virtual ~Controller() = default;

  // Called once per task before the first action, after start-vertex sensing.
  virtual void begin_task(const TaskView& view) { (void)view; }

  virtual Action next_action(const TaskView& view) = 0;

  // True when the policy abandoned its primary plan during the current task.
  virtual bool switched_to_fallback() const { return false; }
};

// Everything recorded while executing one start-to-goal task.
struct TaskOutcome {
  bool success = false;
  double cost = 0.0;
  int traversals = 0;
  int observations = 0;
  bool switched = false;
  MapRecord record;                         // all edge states sensed or observed
  std::vector<std::string> visited;         // vertex trail, start first
  std::vector<std::string> traversed_edges; // edge trail, in traversal order
};

// Drives one task to completion.  The executor owns the sensing model and the
// legality checks; controllers only pick actions.  Reaching the goal ends the
// task immediately with success, so explicit Terminate actions are only for
// giving up.  A controller that issues more than max_steps actions is assumed
// to be stuck and aborts the run via RunawayPolicyError.
TaskOutcome execute_task(const NavGraph& graph, const std::string& start,
                         const std::string& goal, const Realization& real,
                         Controller& controller, double c_obs, int max_steps);

}  // namespace memnav
