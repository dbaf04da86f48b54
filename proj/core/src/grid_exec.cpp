#include "memnav/grid_exec.hpp"

#include <cmath>
#include <string>

#include "memnav/error.hpp"

namespace memnav {

namespace {

// One grid task in flight. Keeps the robot cell, the graph-level position the
// controller reasons about, the sensor picture, and the edge knowledge in one
// place so the movement helpers can share them.
class GridRun {
 public:
  GridRun(const GridContext& ctx, const std::vector<GridCell>& overlay_cells,
          Controller& controller, double c_obs, int max_cell_steps)
      : ctx_(ctx),
        controller_(controller),
        c_obs_(c_obs),
        max_cell_steps_(max_cell_steps),
        overlay_(ctx.spec.base.width, ctx.spec.base.height),
        sense_(fresh_sense_state(ctx.spec.base)),
        robot_(ctx.spec.start),
        vertex_(ctx.start_vertex) {
    for (const GridCell& c : overlay_cells) {
      overlay_.set(c.x, c.y, 1);
    }
  }

  GridTaskOutcome run() {
    sweep();
    resolve_all();
    if (robot_ == ctx_.spec.goal) {
      finish(true);
      return out_;
    }

    const TaskView view{ctx_.graph, ctx_.start_vertex, ctx_.goal_vertex, vertex_, known_, c_obs_};
    controller_.begin_task(view);

    int queries = 0;
    while (!finished_) {
      if (++queries > max_cell_steps_) {
        throw RunawayPolicyError("controller queries exceeded the grid step budget");
      }
      const Action action = controller_.next_action(view);
      switch (action.kind) {
        case Action::Kind::Traverse:
          do_traverse(action.edge_id);
          break;
        case Action::Kind::Observe:
          do_observe(action.edge_id);
          break;
        case Action::Kind::Terminate:
          if (action.success && robot_ != ctx_.spec.goal) {
            throw ContractViolation("terminate(success) away from the goal");
          }
          finish(action.success);
          break;
      }
    }
    return out_;
  }

 private:
  enum class Walk { Arrived, Goal, EdgeBlocked, NoPath };

  void finish(bool success) {
    finished_ = true;
    out_.success = success;
    out_.switched = controller_.switched_to_fallback();
    out_.record = record_;
  }

  void sweep() { sense_sweep(ctx_.spec.base, overlay_, robot_, ctx_.spec.r_max, sense_); }

  // First verdict per edge sticks; a later determined verdict that disagrees
  // is counted but never rewrites the record, which keeps the knowledge the
  // controllers plan on monotone for the whole task.
  void note_verdict(const std::string& edge_id, Verdict verdict) {
    if (verdict == Verdict::Unknown) return;
    const bool have_blocked = record_.blocked.count(edge_id) > 0;
    const bool have_unblocked = record_.unblocked.count(edge_id) > 0;
    if (have_blocked || have_unblocked) {
      const bool agrees = (verdict == Verdict::Blocked) == have_blocked;
      if (!agrees) out_.verdict_conflicts += 1;
      return;
    }
    if (verdict == Verdict::Blocked) {
      record_.blocked.insert(edge_id);
      known_.blocked.insert(edge_id);
    } else {
      record_.unblocked.insert(edge_id);
      known_.unblocked.insert(edge_id);
    }
  }

  // Judges every edge the current position is entitled to speak about.
  void resolve_all() {
    for (const Edge& e : ctx_.graph.edges()) {
      note_verdict(e.id, resolve_edge(ctx_, sense_, e.id, robot_));
    }
  }

  double step_cost(const GridCell& a, const GridCell& b) const {
    return (a.x != b.x && a.y != b.y) ? 1.4142135623730951 : 1.0;
  }

  // Walks toward `target` inside one submap, replanning over everything not
  // yet known occupied after every sensed step. `watch_edge` aborts the walk
  // as soon as that edge resolves Blocked (its corridor just collapsed).
  Walk walk_to(const GridCell& target, const std::string& submap, const std::string& watch_edge) {
    while (robot_ != target) {
      const ByteGrid passable = region_optimistic(ctx_, submap, sense_);
      const auto path = cell_shortest_path(passable, robot_, target);
      if (!path.has_value()) return Walk::NoPath;
      const GridCell next = path->cells[1];
      if (++out_.cell_steps > max_cell_steps_) {
        throw RunawayPolicyError("robot exceeded the cell step budget");
      }
      out_.cost += step_cost(robot_, next);
      robot_ = next;
      sweep();
      if (robot_ == ctx_.spec.goal) return Walk::Goal;
      if (!watch_edge.empty() &&
          resolve_edge(ctx_, sense_, watch_edge, robot_) == Verdict::Blocked) {
        return Walk::EdgeBlocked;
      }
    }
    return Walk::Arrived;
  }

  // The corridor the controller wanted is gone: pick the most useful vertex
  // of the submap the robot is stranded in and walk there, so the controller
  // can re-decide from a sane graph position. Runs until it stands on a
  // vertex, reaches the goal by accident, or proves the robot sealed in.
  void reroute_within(const std::string& submap) {
    while (true) {
      const auto next_vertex = replan_interior(ctx_, sense_, robot_, submap, known_.blocked);
      if (!next_vertex.has_value()) {
        finish(false);  // nothing in this submap leads anywhere any more
        return;
      }
      const GridCell target = ctx_.vertex_anchor(*next_vertex, submap);
      switch (walk_to(target, submap, "")) {
        case Walk::Arrived:
          vertex_ = *next_vertex;
          resolve_all();
          return;
        case Walk::Goal:
          finish(true);
          return;
        case Walk::NoPath:
          break;  // the walk itself uncovered new walls; pick again
        case Walk::EdgeBlocked:
          throw ContractViolation("unwatched walk reported an edge verdict");
      }
    }
  }

  void do_traverse(const std::string& edge_id) {
    if (!ctx_.graph.has_edge(edge_id)) {
      throw ContractViolation("traverse of unknown edge: " + edge_id);
    }
    const Edge& e = ctx_.graph.edge(edge_id);
    if (e.u != vertex_ && e.v != vertex_) {
      throw ContractViolation("traverse of non-incident edge " + edge_id + " from " + vertex_);
    }
    if (known_.blocked.count(edge_id) > 0) {
      throw ContractViolation("traverse of known-blocked edge: " + edge_id);
    }
    const std::string& far = ctx_.graph.other_endpoint(e, vertex_);
    const GridCell target = ctx_.vertex_anchor(far, e.submap);
    switch (walk_to(target, e.submap, edge_id)) {
      case Walk::Arrived:
        note_verdict(edge_id, Verdict::Unblocked);  // walked through: proven
        vertex_ = far;
        resolve_all();
        return;
      case Walk::Goal:
        finish(true);
        return;
      case Walk::EdgeBlocked:
        note_verdict(edge_id, Verdict::Blocked);
        reroute_within(e.submap);
        return;
      case Walk::NoPath:
        // The robot is cut off from the far anchor. Only claim the edge
        // itself is gone when the resolver agrees; being personally stranded
        // is not proof about the corridor.
        note_verdict(edge_id, resolve_edge(ctx_, sense_, edge_id, robot_));
        reroute_within(e.submap);
        return;
    }
  }

  void do_observe(const std::string& edge_id) {
    if (!ctx_.graph.has_edge(edge_id)) {
      throw ContractViolation("observe of unknown edge: " + edge_id);
    }
    const Edge& e = ctx_.graph.edge(edge_id);
    if (e.u != vertex_ && e.v != vertex_) {
      throw ContractViolation("observe of non-incident edge " + edge_id + " from " + vertex_);
    }

    const Verdict cached = resolve_edge(ctx_, sense_, edge_id, robot_);
    if (cached != Verdict::Unknown) {
      note_verdict(edge_id, cached);
      out_.cost += c_obs_;
      out_.observations += 1;
      return;
    }

    // The sensor alone cannot settle it: probe the corridor on foot until the
    // verdict falls one way or the other.
    const std::string& far = ctx_.graph.other_endpoint(e, vertex_);
    const GridCell target = ctx_.vertex_anchor(far, e.submap);
    switch (walk_to(target, e.submap, edge_id)) {
      case Walk::Arrived:
        note_verdict(edge_id, Verdict::Unblocked);
        vertex_ = far;
        resolve_all();
        out_.cost += c_obs_;
        out_.observations += 1;
        return;
      case Walk::Goal:
        finish(true);
        return;
      case Walk::EdgeBlocked:
        note_verdict(edge_id, Verdict::Blocked);
        out_.cost += c_obs_;
        out_.observations += 1;
        reroute_within(e.submap);
        return;
      case Walk::NoPath:
        note_verdict(edge_id, resolve_edge(ctx_, sense_, edge_id, robot_));
        out_.cost += c_obs_;
        out_.observations += 1;
        reroute_within(e.submap);
        return;
    }
  }

  const GridContext& ctx_;
  Controller& controller_;
  double c_obs_;
  int max_cell_steps_;

  ByteGrid overlay_;
  SenseState sense_;
  GridCell robot_;
  std::string vertex_;
  KnownSets known_;
  MapRecord record_;
  GridTaskOutcome out_;
  bool finished_ = false;
};

}  // namespace

GridTaskOutcome execute_grid_task(const GridContext& ctx,
                                  const std::vector<GridCell>& overlay_cells,
                                  Controller& controller, double c_obs, int max_cell_steps) {
  GridRun run(ctx, overlay_cells, controller, c_obs, max_cell_steps);
  return run.run();
}

}  // namespace memnav
