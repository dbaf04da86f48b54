#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "memnav/error.hpp"
#include "memnav/rng.hpp"

namespace memnav::test {

namespace {

// Vertex-to-vertex reachability over one realization's unblocked edges,
// by plain breadth-first search (deliberately not the production Dijkstra).
bool reachable_in(const NavGraph& graph, const Realization& real, const std::string& from,
                  const std::string& to) {
  if (from == to) return true;
  std::unordered_set<std::string> seen{from};
  std::deque<std::string> queue{from};
  while (!queue.empty()) {
    const std::string v = queue.front();
    queue.pop_front();
    for (const int e_idx : graph.incident(graph.vertex_index(v))) {
      const Edge& e = graph.edges()[e_idx];
      if (!real.is_unblocked(e.id)) continue;
      const std::string& w = graph.other_endpoint(e, v);
      if (w == to) return true;
      if (seen.insert(w).second) queue.push_back(w);
    }
  }
  return false;
}

bool consistent(const Realization& real, const KnownSets& known) {
  for (const auto& id : known.blocked) {
    if (real.is_unblocked(id)) return false;
  }
  for (const auto& id : known.unblocked) {
    if (!real.is_unblocked(id)) return false;
  }
  return true;
}

std::string known_key(const std::string& vertex, const KnownSets& known) {
  std::string key = vertex + ";";
  for (const auto& id : known.blocked) key += id + ",";
  key += ";";
  for (const auto& id : known.unblocked) key += id + ",";
  return key;
}

// The observation made on arrival at `vertex` under `real`, restricted to
// edges the agent does not already know. Edge-index order keeps keys canonical.
std::string observation_key(const NavGraph& graph, const Realization& real,
                            const std::string& vertex, const KnownSets& known) {
  std::string key;
  for (const int e_idx : graph.incident(graph.vertex_index(vertex))) {
    const Edge& e = graph.edges()[e_idx];
    if (known.is_known(e.id)) continue;
    key += real.is_unblocked(e.id) ? 'u' : 'b';
  }
  return key;
}

void absorb_observation(const NavGraph& graph, const Realization& real,
                        const std::string& vertex, KnownSets& known) {
  for (const int e_idx : graph.incident(graph.vertex_index(vertex))) {
    const Edge& e = graph.edges()[e_idx];
    if (known.is_known(e.id)) continue;
    if (real.is_unblocked(e.id)) {
      known.unblocked.insert(e.id);
    } else {
      known.blocked.insert(e.id);
    }
  }
}

class BeliefValueIteration {
 public:
  explicit BeliefValueIteration(const EnvironmentSpec& env) : env_(env) {}

  double root_value() {
    // The first observation happens at the start vertex before any action.
    return transition_value(env_.start, KnownSets{}, all_indices());
  }

 private:
  std::vector<int> all_indices() const {
    std::vector<int> idx(env_.realizations.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    return idx;
  }

  // Expected value of standing at `vertex` about to sense, with `known`
  // accumulated so far and `support` the realizations still possible.
  double transition_value(const std::string& vertex, const KnownSets& known,
                          const std::vector<int>& support) {
    std::map<std::string, std::vector<int>> groups;
    for (const int i : support) {
      groups[observation_key(env_.graph, env_.realizations[i], vertex, known)].push_back(i);
    }
    double support_mass = 0.0;
    for (const int i : support) support_mass += env_.pmf[i];
    double total = 0.0;
    for (const auto& [key, members] : groups) {
      (void)key;
      double group_mass = 0.0;
      for (const int i : members) group_mass += env_.pmf[i];
      KnownSets next = known;
      absorb_observation(env_.graph, env_.realizations[members.front()], vertex, next);
      total += (group_mass / support_mass) * value(vertex, next);
    }
    return total;
  }

  // Optimal cost-to-go once the senses at `vertex` are folded into `known`.
  // The agent stands in a pocket of settled edges (its own senses were just
  // absorbed), and walking inside that pocket reveals nothing, so per-edge
  // recursion would chase zero-information cycles forever. Instead, one
  // Dijkstra sweep across the known-unblocked edges prices every way out of
  // the pocket: reaching the goal closes the task, and reaching a vertex
  // with an unsettled incident edge re-enters the recursion one observation
  // richer, which bounds the depth by the edge count.
  double value(const std::string& vertex, const KnownSets& known) {
    if (vertex == env_.goal) return 0.0;
    const std::string key = known_key(vertex, known);
    if (const auto it = memo_.find(key); it != memo_.end()) return it->second;

    std::vector<int> support;
    for (std::size_t i = 0; i < env_.realizations.size(); ++i) {
      if (env_.pmf[i] > 0.0 && consistent(env_.realizations[i], known)) {
        support.push_back(static_cast<int>(i));
      }
    }
    if (support.empty()) {
      throw ContractViolation("belief support emptied out during value iteration");
    }

    bool any_reachable = false;
    for (const int i : support) {
      if (reachable_in(env_.graph, env_.realizations[i], vertex, env_.goal)) {
        any_reachable = true;
        break;
      }
    }
    if (!any_reachable) {
      memo_[key] = 0.0;  // provably sealed: giving up adds nothing
      return 0.0;
    }

    using Item = std::pair<double, std::string>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    std::unordered_map<std::string, double> dist;
    dist[vertex] = 0.0;
    heap.emplace(0.0, vertex);
    std::unordered_set<std::string> done;
    double best = std::numeric_limits<double>::infinity();
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (!done.insert(u).second) continue;
      if (u == env_.goal) {
        best = std::min(best, d);
        continue;
      }
      bool frontier = false;
      for (const int e_idx : env_.graph.incident(env_.graph.vertex_index(u))) {
        if (!known.is_known(env_.graph.edges()[e_idx].id)) {
          frontier = true;
          break;
        }
      }
      if (frontier) {
        // Arriving here senses something new; recursion prices the rest, so
        // there is no need to relax onward through this vertex.
        best = std::min(best, d + transition_value(u, known, support));
        continue;
      }
      for (const int e_idx : env_.graph.incident(env_.graph.vertex_index(u))) {
        const Edge& e = env_.graph.edges()[e_idx];
        if (known.unblocked.count(e.id) == 0) continue;  // sensed blocked, or a self-loop rescan
        const std::string& w = env_.graph.other_endpoint(e, u);
        const double nd = d + e.cost;
        const auto it = dist.find(w);
        if (it != dist.end() && it->second <= nd) continue;
        dist[w] = nd;
        heap.emplace(nd, w);
      }
    }
    if (!std::isfinite(best)) {
      throw ContractViolation("no move available although the goal is reachable");
    }
    memo_[key] = best;
    return best;
  }

  const EnvironmentSpec& env_;
  std::unordered_map<std::string, double> memo_;
};

}  // namespace

double optimal_expected_cost(const EnvironmentSpec& env) {
  return BeliefValueIteration(env).root_value();
}

namespace {

void enumerate_paths_rec(const NavGraph& graph, const EdgeIdSet& traversable,
                         const std::string& at, const std::string& to,
                         std::unordered_set<std::string>& visited,
                         std::vector<std::string>& edge_trail, double cost,
                         std::vector<SimplePath>& out) {
  if (at == to) {
    out.push_back(SimplePath{edge_trail, cost});
    return;
  }
  for (const int e_idx : graph.incident(graph.vertex_index(at))) {
    const Edge& e = graph.edges()[e_idx];
    if (traversable.count(e.id) == 0) continue;
    const std::string& w = graph.other_endpoint(e, at);
    if (visited.count(w) > 0) continue;
    visited.insert(w);
    edge_trail.push_back(e.id);
    enumerate_paths_rec(graph, traversable, w, to, visited, edge_trail, cost + e.cost, out);
    edge_trail.pop_back();
    visited.erase(w);
  }
}

}  // namespace

std::vector<SimplePath> enumerate_simple_paths(const NavGraph& graph,
                                               const EdgeIdSet& traversable,
                                               const std::string& from, const std::string& to) {
  std::vector<SimplePath> out;
  std::unordered_set<std::string> visited{from};
  std::vector<std::string> trail;
  enumerate_paths_rec(graph, traversable, from, to, visited, trail, 0.0, out);
  return out;
}

ByteGrid flood_reachable(const ByteGrid& passable, const GridCell& from) {
  ByteGrid reach(passable.width, passable.height, 0);
  if (!passable.in_bounds(from.x, from.y) || passable.at(from.x, from.y) == 0) return reach;
  reach.set(from.x, from.y, 1);
  std::deque<GridCell> queue{from};
  static const int dx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  static const int dy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
  while (!queue.empty()) {
    const GridCell c = queue.front();
    queue.pop_front();
    for (int d = 0; d < 8; ++d) {
      const int nx = c.x + dx[d];
      const int ny = c.y + dy[d];
      if (!passable.in_bounds(nx, ny) || passable.at(nx, ny) == 0) continue;
      if (reach.at(nx, ny) != 0) continue;
      if (dx[d] != 0 && dy[d] != 0) {
        // Diagonal steps need both shoulders free, same as the planner.
        if (passable.at(c.x + dx[d], c.y) == 0 || passable.at(c.x, c.y + dy[d]) == 0) continue;
      }
      reach.set(nx, ny, 1);
      queue.push_back(GridCell{nx, ny});
    }
  }
  return reach;
}

namespace {

// Replan-at-every-vertex completion in one fully drawn world; mirrors the
// contract the sampling controller scores against, including the flat
// sealed-world penalty of twice the total edge cost.
double reference_completion(const NavGraph& graph, const std::vector<unsigned char>& world,
                            std::string pos, const std::string& goal, EdgeIdSet blocked) {
  const auto sense = [&](const std::string& at) {
    for (const int e_idx : graph.incident(graph.vertex_index(at))) {
      if (!world[static_cast<std::size_t>(e_idx)]) blocked.insert(graph.edges()[e_idx].id);
    }
  };
  double cost = 0.0;
  sense(pos);
  for (int step = 0; step < 100000; ++step) {
    if (pos == goal) return cost;
    EdgeMask mask = full_edge_mask(graph);
    for (const auto& id : blocked) mask[graph.edge_index(id)] = 0;
    const auto path = shortest_path(graph, mask, pos, goal);
    if (!path.has_value()) return cost + 2.0 * graph.total_edge_cost();
    const Edge& e = graph.edge(path->edges.front());
    cost += e.cost;
    pos = graph.other_endpoint(e, pos);
    sense(pos);
  }
  throw ContractViolation("reference completion ran away");
}

}  // namespace

UctDecision uct_reference_decision(const NavGraph& graph, const KnownSets& known,
                                   const std::string& current, const std::string& goal,
                                   const std::vector<MapRecord>& learned, int rollouts,
                                   std::uint64_t seed) {
  std::unordered_map<std::string, std::pair<int, int>> counts;
  for (const MapRecord& r : learned) {
    for (const auto& id : r.unblocked) {
      counts[id].first += 1;
      counts[id].second += 1;
    }
    for (const auto& id : r.blocked) counts[id].second += 1;
  }
  const auto prior = [&](const std::string& id) {
    const auto it = counts.find(id);
    const int unblocked = it == counts.end() ? 0 : it->second.first;
    const int total = it == counts.end() ? 0 : it->second.second;
    return (unblocked + 1.0) / (total + 2.0);
  };

  std::vector<std::string> candidates;
  for (const std::string& id : graph.incident_edge_ids(current)) {
    if (known.blocked.count(id) == 0) candidates.push_back(id);
  }
  std::sort(candidates.begin(), candidates.end());
  if (candidates.empty()) throw ContractViolation("reference decision has no candidates");

  Rng rng(seed);
  std::vector<std::vector<unsigned char>> worlds;
  for (int w = 0; w < rollouts; ++w) {
    std::vector<unsigned char> world(graph.edges().size(), 0);
    for (std::size_t e = 0; e < graph.edges().size(); ++e) {
      const std::string& id = graph.edges()[e].id;
      if (known.blocked.count(id) > 0) continue;
      if (known.unblocked.count(id) > 0) {
        world[e] = 1;
        continue;
      }
      world[e] = rng.canonical() < prior(id) ? 1 : 0;
    }
    worlds.push_back(std::move(world));
  }

  UctDecision best;
  best.score = std::numeric_limits<double>::infinity();
  for (const std::string& id : candidates) {
    const Edge& e = graph.edge(id);
    const std::size_t e_idx = static_cast<std::size_t>(graph.edge_index(id));
    const std::string& other = graph.other_endpoint(e, current);
    double total = 0.0;
    for (const auto& world : worlds) {
      if (world[e_idx]) {
        total += e.cost + reference_completion(graph, world, other, goal, known.blocked);
      } else {
        EdgeIdSet blocked = known.blocked;
        blocked.insert(id);
        total += 2.0 * e.cost + reference_completion(graph, world, current, goal, blocked);
      }
    }
    const double score = total / static_cast<double>(rollouts);
    if (score < best.score) {
      best.score = score;
      best.edge = id;
    }
  }
  return best;
}

}  // namespace memnav::test
