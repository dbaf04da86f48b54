#include "memnav/execution.hpp"

#include <utility>

#include "memnav/error.hpp"

namespace memnav {

Action Action::traverse(std::string edge_id) {
  Action a;
  a.kind = Kind::Traverse;
  a.edge_id = std::move(edge_id);
  return a;
}

Action Action::observe(std::string edge_id) {
  Action a;
  a.kind = Kind::Observe;
  a.edge_id = std::move(edge_id);
  return a;
}

Action Action::terminate(bool success) {
  Action a;
  a.kind = Kind::Terminate;
  a.success = success;
  return a;
}

namespace {

// Folds the senses taken at a vertex into the live knowledge and the task
// record.  Re-sensing an edge is a no-op: the realization is fixed for the
// whole task, so repeated senses cannot conflict.
void absorb_senses(const Realization& real, const NavGraph& graph,
                   const std::string& vertex, KnownSets& known, MapRecord& record) {
  for (const auto& [edge_id, state] : sense_incident(real, graph, vertex)) {
    if (known.is_known(edge_id)) continue;
    if (state == EdgeState::Unblocked) {
      known.unblocked.insert(edge_id);
      record.unblocked.insert(edge_id);
    } else {
      known.blocked.insert(edge_id);
      record.blocked.insert(edge_id);
    }
  }
}

}  // namespace

TaskOutcome execute_task(const NavGraph& graph, const std::string& start,
                         const std::string& goal, const Realization& real,
                         Controller& controller, double c_obs, int max_steps) {
  if (!graph.has_vertex(start)) throw ValidationError("task start is not a vertex: " + start);
  if (!graph.has_vertex(goal)) throw ValidationError("task goal is not a vertex: " + goal);

  TaskOutcome out;
  KnownSets known;
  std::string current = start;

  out.visited.push_back(current);
  absorb_senses(real, graph, current, known, out.record);
  if (current == goal) {
    out.success = true;
    return out;
  }

  const TaskView view{graph, start, goal, current, known, c_obs};
  controller.begin_task(view);

  for (int step = 0; step < max_steps; ++step) {
    const Action action = controller.next_action(view);
    switch (action.kind) {
      case Action::Kind::Traverse: {
        if (!graph.has_edge(action.edge_id)) {
          throw ContractViolation("traverse of unknown edge: " + action.edge_id);
        }
        const Edge& e = graph.edge(action.edge_id);
        if (e.u != current && e.v != current) {
          throw ContractViolation("traverse of non-incident edge " + action.edge_id +
                                  " from " + current);
        }
        if (!real.is_unblocked(e.id)) {
          // Incident edges are sensed on arrival, so the controller knew.
          throw ContractViolation("traverse of blocked edge: " + e.id);
        }
        current = graph.other_endpoint(e, current);
        out.cost += e.cost;
        out.traversals += 1;
        out.traversed_edges.push_back(e.id);
        out.visited.push_back(current);
        absorb_senses(real, graph, current, known, out.record);
        if (current == goal) {
          out.success = true;
          out.switched = controller.switched_to_fallback();
          return out;
        }
        break;
      }
      case Action::Kind::Observe: {
        if (!graph.has_edge(action.edge_id)) {
          throw ContractViolation("observe of unknown edge: " + action.edge_id);
        }
        const Edge& e = graph.edge(action.edge_id);
        if (e.u != current && e.v != current) {
          throw ContractViolation("observe of non-incident edge " + action.edge_id +
                                  " from " + current);
        }
        // Arrival sensing already resolved the edge; the explicit action pays
        // the observation charge and is counted for reporting.
        out.cost += c_obs;
        out.observations += 1;
        break;
      }
      case Action::Kind::Terminate: {
        if (action.success && current != goal) {
          throw ContractViolation("terminate(success) away from the goal");
        }
        out.success = action.success;
        out.switched = controller.switched_to_fallback();
        return out;
      }
    }
  }
  throw RunawayPolicyError("controller exceeded the step budget without finishing");
}

}  // namespace memnav
