#include "memnav/controllers.hpp"

#include <algorithm>
#include <limits>

#include "memnav/error.hpp"

namespace memnav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

EdgeMask mask_without_blocked(const NavGraph& graph, const EdgeIdSet& blocked) {
  EdgeMask mask = full_edge_mask(graph);
  for (const auto& id : blocked) {
    mask[graph.edge_index(id)] = 0;
  }
  return mask;
}

bool agrees_with_live(const BeliefMap& m, const KnownSets& known) {
  for (const auto& id : known.unblocked) {
    if (m.blocked.count(id) > 0) return false;
  }
  for (const auto& id : known.blocked) {
    if (m.unblocked.count(id) > 0) return false;
  }
  return true;
}

}  // namespace

Action OptimisticController::next_action(const TaskView& view) {
  const EdgeMask mask = mask_without_blocked(view.graph, view.known.blocked);
  const auto path = shortest_path(view.graph, mask, view.current, view.goal);
  if (!path.has_value()) return Action::terminate(false);
  if (path->edges.empty()) return Action::terminate(true);  // already at the goal
  return Action::traverse(path->edges.front());
}

HybridController::HybridController(const NavGraph& graph, double c_obs, PolicyWeights alpha)
    : graph_(graph), c_obs_(c_obs), alpha_(alpha) {}

void HybridController::set_policy(PolicyTree tree, std::vector<BeliefMap> maps) {
  if (tree.root == nullptr) throw ValidationError("hybrid got an empty plan");
  if (maps.empty()) throw ValidationError("hybrid got a plan without its belief");
  tree_ = std::move(tree);
  maps_ = std::move(maps);
}

void HybridController::begin_task(const TaskView& view) {
  if (tree_.root == nullptr) throw ContractViolation("hybrid asked to run without a plan");
  if (tree_.start != view.start || tree_.goal != view.goal) {
    throw ContractViolation("installed plan targets a different task");
  }
  local_tree_ = PolicyTree{};
  active_maps_ = maps_;
  node_ = tree_.root.get();
  leg_index_ = 0;
  observe_emitted_ = false;
  expected_vertex_ = view.current;
  switched_ = false;
}

Action HybridController::enter_fallback(const TaskView& view) {
  switched_ = true;
  return fallback_.next_action(view);
}

bool HybridController::rebuild_from(const TaskView& view) {
  // Keep the hypotheses of the current node that still match the senses,
  // fold the live knowledge into them, and replan from the live vertex.
  const MapRecord live{view.known.blocked, view.known.unblocked};
  std::vector<BeliefMap> alive;
  for (int i : node_->maps) {
    const BeliefMap& m = active_maps_[i];
    if (!agrees_with_live(m, view.known)) continue;
    const MapRecord merged = merge(MapRecord{m.blocked, m.unblocked}, live);
    BeliefMap refreshed;
    refreshed.blocked = merged.blocked;
    refreshed.unblocked = merged.unblocked;
    refreshed.weight = m.weight;
    alive.push_back(std::move(refreshed));
  }
  if (alive.empty()) return false;

  PolicyTree fresh = build_policy(graph_, alive, view.current, view.goal, c_obs_, alpha_);
  active_maps_ = std::move(alive);
  node_ = nullptr;  // about to be replaced; never read while dangling
  local_tree_ = std::move(fresh);
  node_ = local_tree_.root.get();
  leg_index_ = 0;
  observe_emitted_ = false;
  expected_vertex_ = view.current;
  return true;
}

Action HybridController::next_action(const TaskView& view) {
  if (switched_) return fallback_.next_action(view);
  if (node_ == nullptr) throw ContractViolation("hybrid asked to act without a plan");

  // A detour (grid worlds reroute around walls discovered mid-edge) leaves
  // the robot off the tree's expected vertex; replan the remaining subtree
  // from where the robot actually stands.
  if (view.current != expected_vertex_) {
    if (!rebuild_from(view)) return enter_fallback(view);
  }

  while (true) {
    // Belief death: nothing this node considers possible matches the senses,
    // so the subtree's guidance is void from here on.
    bool any_alive = false;
    for (int i : node_->maps) {
      if (agrees_with_live(active_maps_[i], view.known)) {
        any_alive = true;
        break;
      }
    }
    if (!any_alive) return enter_fallback(view);

    switch (node_->kind) {
      case PolicyNode::Kind::SwitchLeaf:
        return enter_fallback(view);

      case PolicyNode::Kind::PathLeaf: {
        if (leg_index_ >= node_->path_edges.size()) {
          throw ContractViolation("committed route exhausted before the goal");
        }
        for (std::size_t k = leg_index_; k < node_->path_edges.size(); ++k) {
          if (view.known.blocked.count(node_->path_edges[k]) > 0) {
            return enter_fallback(view);  // the committed route is broken
          }
        }
        const std::string& id = node_->path_edges[leg_index_];
        leg_index_ += 1;
        expected_vertex_ = graph_.other_endpoint(graph_.edge(id), view.current);
        return Action::traverse(id);
      }

      case PolicyNode::Kind::Observe: {
        if (leg_index_ < node_->leg_edges.size()) {
          for (std::size_t k = leg_index_; k < node_->leg_edges.size(); ++k) {
            if (view.known.blocked.count(node_->leg_edges[k]) > 0) {
              return enter_fallback(view);  // the approach leg is broken
            }
          }
          const std::string& id = node_->leg_edges[leg_index_];
          leg_index_ += 1;
          expected_vertex_ = graph_.other_endpoint(graph_.edge(id), view.current);
          return Action::traverse(id);
        }
        if (!observe_emitted_) {
          observe_emitted_ = true;
          return Action::observe(node_->observe_edge);
        }
        const bool unblocked = view.known.unblocked.count(node_->observe_edge) > 0;
        const bool blocked = view.known.blocked.count(node_->observe_edge) > 0;
        if (!unblocked && !blocked) {
          throw ContractViolation("observation left " + node_->observe_edge + " unresolved");
        }
        node_ = unblocked ? node_->if_unblocked.get() : node_->if_blocked.get();
        leg_index_ = 0;
        observe_emitted_ = false;
        break;  // re-examine the chosen child from the same vertex
      }
    }
  }
}

UctController::UctController(int rollouts, std::uint64_t seed)
    : rollouts_(rollouts), rng_(seed) {
  if (rollouts < 1) throw ValidationError("rollout count must be positive");
}

void UctController::learn(const MapRecord& record) {
  for (const auto& id : record.unblocked) {
    auto& c = counts_[id];
    c.first += 1;
    c.second += 1;
  }
  for (const auto& id : record.blocked) {
    counts_[id].second += 1;
  }
}

void UctController::reseed_task(std::uint64_t seed) { rng_ = Rng(seed); }

double UctController::edge_prior(const std::string& edge_id) const {
  const auto it = counts_.find(edge_id);
  const int unblocked = it == counts_.end() ? 0 : it->second.first;
  const int total = it == counts_.end() ? 0 : it->second.second;
  // Rule-of-succession smoothing keeps never-seen edges at even odds.
  return (unblocked + 1.0) / (total + 2.0);
}

namespace {

// Cost of finishing the task from `pos` in a fully drawn world under the
// replan-at-every-vertex rule, starting from the given sensed knowledge. A
// world whose goal turns out to be sealed off adds a flat penalty of twice
// the total edge cost on top of the distance walked before giving up.
double simulated_completion(const NavGraph& graph, const EdgeMask& world, std::string pos,
                            const std::string& goal, EdgeIdSet known_blocked) {
  const auto sense = [&](const std::string& at) {
    for (const int e_idx : graph.incident(graph.vertex_index(at))) {
      if (!world[e_idx]) known_blocked.insert(graph.edges()[e_idx].id);
    }
  };
  double cost = 0.0;
  sense(pos);
  if (pos == goal) return cost;
  const int budget = 10 * static_cast<int>(graph.vertices().size()) *
                     static_cast<int>(graph.edges().size());
  for (int step = 0; step < budget; ++step) {
    const EdgeMask mask = [&] {
      EdgeMask m = full_edge_mask(graph);
      for (const auto& id : known_blocked) m[graph.edge_index(id)] = 0;
      return m;
    }();
    const auto path = shortest_path(graph, mask, pos, goal);
    if (!path.has_value()) return cost + 2.0 * graph.total_edge_cost();
    const Edge& e = graph.edge(path->edges.front());
    cost += e.cost;
    pos = graph.other_endpoint(e, pos);
    sense(pos);
    if (pos == goal) return cost;
  }
  throw ContractViolation("world simulation exceeded the step budget");
}

}  // namespace

Action UctController::next_action(const TaskView& view) {
  const NavGraph& graph = view.graph;
  const EdgeMask live = mask_without_blocked(graph, view.known.blocked);
  if (!shortest_path(graph, live, view.current, view.goal).has_value()) {
    return Action::terminate(false);  // sensed blockages provably seal the goal
  }

  // Every incident edge not yet known blocked is a candidate. On graphs the
  // arrival sensing resolves all of them, so the set is exactly the unblocked
  // ones; on grids an edge can stay unknown (a corridor running past sensor
  // range) and the sampled worlds decide whether probing it is worth it.
  std::vector<std::string> candidates;
  for (const std::string& id : graph.incident_edge_ids(view.current)) {
    if (view.known.blocked.count(id) == 0) candidates.push_back(id);
  }
  std::sort(candidates.begin(), candidates.end());
  if (candidates.empty()) return Action::terminate(false);

  // Draw the worlds once and score every candidate on the same draws. One
  // draw per unknown edge, edge order within world-major order: this exact
  // sequence is what lets a fixed seed reproduce a decision bit for bit.
  std::vector<EdgeMask> worlds;
  worlds.reserve(static_cast<std::size_t>(rollouts_));
  for (int w = 0; w < rollouts_; ++w) {
    EdgeMask world(graph.edges().size(), 0);
    for (std::size_t e = 0; e < graph.edges().size(); ++e) {
      const std::string& id = graph.edges()[e].id;
      if (view.known.blocked.count(id) > 0) continue;
      if (view.known.unblocked.count(id) > 0) {
        world[e] = 1;
        continue;
      }
      world[e] = rng_.canonical() < edge_prior(id) ? 1 : 0;
    }
    worlds.push_back(std::move(world));
  }

  double best_score = kInf;
  std::string best_id;
  for (const std::string& id : candidates) {
    const Edge& e = graph.edge(id);
    const int e_idx = graph.edge_index(id);
    const std::string& other = graph.other_endpoint(e, view.current);
    double total = 0.0;
    for (const EdgeMask& world : worlds) {
      if (world[e_idx]) {
        total += e.cost + simulated_completion(graph, world, other, view.goal, view.known.blocked);
      } else {
        // Probing a corridor that turns out blocked: pay the round trip, then
        // finish from here with the blockage learned.
        EdgeIdSet blocked = view.known.blocked;
        blocked.insert(id);
        total += 2.0 * e.cost +
                 simulated_completion(graph, world, view.current, view.goal, std::move(blocked));
      }
    }
    const double score = total / static_cast<double>(rollouts_);
    if (score < best_score) {  // strict: earlier (smaller) ids win ties
      best_score = score;
      best_id = id;
    }
  }
  return Action::traverse(best_id);
}

}  // namespace memnav
