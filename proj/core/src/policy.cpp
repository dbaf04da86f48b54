#include "memnav/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <json.hpp>

#include "memnav/error.hpp"

namespace memnav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Traversable mask of one hypothesis: everything except its blocked edges.
EdgeMask mask_without(const NavGraph& graph, const EdgeIdSet& blocked) {
  EdgeMask mask = full_edge_mask(graph);
  for (const auto& id : blocked) {
    mask[graph.edge_index(id)] = 0;
  }
  return mask;
}

// Shannon entropy of the normalized distribution behind the given masses.
double entropy(const std::vector<double>& masses) {
  double total = 0.0;
  for (double m : masses) total += m;
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double m : masses) {
    if (m <= 0.0) continue;
    const double p = m / total;
    h -= p * std::log2(p);
  }
  return h;
}

// Shared lookup tables for one build: per-hypothesis traversable masks and
// goal distances (the graph is undirected, so distances from the goal equal
// distances to it).
struct BuildContext {
  const NavGraph& graph;
  const std::vector<BeliefMap>& maps;
  std::vector<EdgeMask> masks;
  std::vector<std::vector<double>> dist_goal;
  std::string goal;
  double c_obs = 0.0;
  PolicyWeights alpha;
  double sealed_goal_cost = 0.0;  // stand-in goal distance when a map seals it off
};

// Expected entropy of the posterior over `y` after observing `edge_id`.
// Hypotheses with the edge undetermined survive either outcome, so they
// contribute mass to both branches.
double expected_posterior_entropy(const BuildContext& ctx, const std::vector<int>& y,
                                  const std::string& edge_id) {
  std::vector<double> mass_if_unblocked;
  std::vector<double> mass_if_blocked;
  double q_u = 0.0;
  double q_b = 0.0;
  for (int i : y) {
    const BeliefMap& m = ctx.maps[i];
    const bool determined_blocked = m.blocked.count(edge_id) > 0;
    const bool determined_unblocked = m.unblocked.count(edge_id) > 0;
    if (!determined_blocked) {
      mass_if_unblocked.push_back(m.weight);
      q_u += m.weight;
    }
    if (!determined_unblocked) {
      mass_if_blocked.push_back(m.weight);
      q_b += m.weight;
    }
  }
  if (q_u + q_b <= 0.0) return 0.0;
  const double p_u = q_u / (q_u + q_b);
  return p_u * entropy(mass_if_unblocked) + (1.0 - p_u) * entropy(mass_if_blocked);
}

struct Candidate {
  double score = kInf;        // expected posterior entropy times cost factor
  double cost_factor = kInf;  // first tie-break: cheaper observations win
  std::string vertex;         // second tie-break
  std::string edge;           // final tie-break
  PathResult leg;
};

bool candidate_less(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score < b.score;
  if (a.cost_factor != b.cost_factor) return a.cost_factor < b.cost_factor;
  if (a.vertex != b.vertex) return a.vertex < b.vertex;
  return a.edge < b.edge;
}

std::unique_ptr<PolicyNode> build_node(const BuildContext& ctx, std::vector<int> y,
                                       const std::string& v) {
  auto node = std::make_unique<PolicyNode>();
  node->maps = y;

  // Per-hypothesis committed routes from here to the goal.
  std::vector<std::optional<PathResult>> routes;
  routes.reserve(y.size());
  bool any_route = false;
  bool all_routes = true;
  for (int i : y) {
    routes.push_back(shortest_path(ctx.graph, ctx.masks[i], v, ctx.goal));
    if (routes.back().has_value()) {
      any_route = true;
    } else {
      all_routes = false;
    }
  }

  // Every live hypothesis seals the goal off: hand over to the fallback,
  // which walks until it can prove the task hopeless.
  if (!any_route) {
    node->kind = PolicyNode::Kind::SwitchLeaf;
    return node;
  }

  // A single hypothesis, or full consensus on the route, needs no sensing.
  bool consensus = all_routes;
  if (consensus) {
    for (std::size_t k = 1; k < routes.size(); ++k) {
      if (routes[k]->edges != routes[0]->edges) {
        consensus = false;
        break;
      }
    }
  }
  if (y.size() == 1 || consensus) {
    const PathResult& route = *routes.front();
    node->kind = PolicyNode::Kind::PathLeaf;
    node->path_vertices = route.vertices;
    node->path_edges = route.edges;
    return node;
  }

  // Disagreement: pick the cheapest informative observation. Candidate edges
  // are those some live hypothesis has determined blocked and another has
  // determined unblocked; candidate viewpoints are their endpoints, reachable
  // from here under every live hypothesis and under the intersection of their
  // traversable sets (so the approach leg is safe no matter which hypothesis
  // is true).
  EdgeMask intersection = ctx.masks[y.front()];
  for (std::size_t k = 1; k < y.size(); ++k) {
    const EdgeMask& other = ctx.masks[y[k]];
    for (std::size_t e = 0; e < intersection.size(); ++e) {
      intersection[e] = intersection[e] && other[e];
    }
  }

  std::vector<std::vector<double>> dist_here;
  dist_here.reserve(y.size());
  double weight_sum = 0.0;
  for (int i : y) {
    dist_here.push_back(shortest_path_distances(ctx.graph, ctx.masks[i], v));
    weight_sum += ctx.maps[i].weight;
  }

  std::optional<Candidate> best;
  for (const Edge& e : ctx.graph.edges()) {
    bool seen_blocked = false;
    bool seen_unblocked = false;
    for (int i : y) {
      seen_blocked = seen_blocked || ctx.maps[i].blocked.count(e.id) > 0;
      seen_unblocked = seen_unblocked || ctx.maps[i].unblocked.count(e.id) > 0;
    }
    if (!seen_blocked || !seen_unblocked) continue;

    const double spread = expected_posterior_entropy(ctx, y, e.id);
    for (const std::string* w : {&e.u, &e.v}) {
      if (w == &e.v && e.v == e.u) break;  // self-loop: endpoints coincide
      const int w_idx = ctx.graph.vertex_index(*w);

      bool reachable_everywhere = true;
      double mean_leg = 0.0;
      double mean_goal_side = 0.0;
      for (std::size_t k = 0; k < y.size(); ++k) {
        const double d = dist_here[k][w_idx];
        if (d == kInf) {
          reachable_everywhere = false;
          break;
        }
        const double share = ctx.maps[y[k]].weight / weight_sum;
        const double d_goal = ctx.dist_goal[y[k]][w_idx];
        mean_leg += share * d;
        mean_goal_side += share * (d_goal == kInf ? ctx.sealed_goal_cost : d_goal);
      }
      if (!reachable_everywhere) continue;

      auto leg = shortest_path(ctx.graph, intersection, v, *w);
      if (!leg.has_value()) continue;

      Candidate c;
      c.cost_factor = ctx.alpha.travel * mean_leg + ctx.alpha.obs * ctx.c_obs +
                      ctx.alpha.goal * mean_goal_side;
      c.score = spread * c.cost_factor;
      c.vertex = *w;
      c.edge = e.id;
      c.leg = std::move(*leg);
      if (!best.has_value() || candidate_less(c, *best)) {
        best = std::move(c);
      }
    }
  }

  if (!best.has_value()) {
    // The hypotheses disagree but no determining edge can be reached safely;
    // sensing on the fly is all that is left.
    node->kind = PolicyNode::Kind::SwitchLeaf;
    return node;
  }

  std::vector<int> if_unblocked;
  std::vector<int> if_blocked;
  for (int i : y) {
    if (ctx.maps[i].blocked.count(best->edge) == 0) if_unblocked.push_back(i);
    if (ctx.maps[i].unblocked.count(best->edge) == 0) if_blocked.push_back(i);
  }
  if (if_unblocked.size() >= y.size() || if_blocked.size() >= y.size()) {
    throw ContractViolation("observation of " + best->edge + " fails to split the belief");
  }

  node->kind = PolicyNode::Kind::Observe;
  node->observe_edge = best->edge;
  node->observe_vertex = best->vertex;
  node->leg_vertices = std::move(best->leg.vertices);
  node->leg_edges = std::move(best->leg.edges);
  node->if_unblocked = build_node(ctx, std::move(if_unblocked), node->observe_vertex);
  node->if_blocked = build_node(ctx, std::move(if_blocked), node->observe_vertex);
  return node;
}

}  // namespace

PolicyTree build_policy(const NavGraph& graph, const std::vector<BeliefMap>& maps,
                        const std::string& start, const std::string& goal, double c_obs,
                        const PolicyWeights& alpha) {
  if (maps.empty()) throw ValidationError("policy needs at least one belief map");
  if (!graph.has_vertex(start)) throw ValidationError("policy start is not a vertex: " + start);
  if (!graph.has_vertex(goal)) throw ValidationError("policy goal is not a vertex: " + goal);
  double weight_sum = 0.0;
  for (const BeliefMap& m : maps) {
    if (m.weight < 0.0) throw ValidationError("belief weights must be nonnegative");
    weight_sum += m.weight;
  }
  if (weight_sum <= 0.0) throw ValidationError("belief weights must not all be zero");

  BuildContext ctx{graph, maps, {}, {}, goal, c_obs, alpha, 2.0 * graph.total_edge_cost()};
  ctx.masks.reserve(maps.size());
  ctx.dist_goal.reserve(maps.size());
  for (const BeliefMap& m : maps) {
    ctx.masks.push_back(mask_without(graph, m.blocked));
    ctx.dist_goal.push_back(shortest_path_distances(graph, ctx.masks.back(), goal));
  }

  std::vector<int> all(maps.size());
  for (std::size_t i = 0; i < maps.size(); ++i) all[i] = static_cast<int>(i);

  PolicyTree tree;
  tree.start = start;
  tree.goal = goal;
  tree.root = build_node(ctx, std::move(all), start);
  return tree;
}

namespace {

// Cost of carrying one hypothesis through the tree, mirroring the executor:
// incident edges resolve on every vertex arrival, arriving at the goal ends
// the task, and a switch leaf plays the reactive fallback to completion with
// everything sensed so far.
class HypothesisTrace {
 public:
  HypothesisTrace(const NavGraph& graph, const BeliefMap& map, std::string goal, double c_obs)
      : graph_(graph), map_(map), goal_(std::move(goal)), c_obs_(c_obs) {}

  double run(const PolicyNode* node, const std::string& start) {
    pos_ = start;
    sense();
    if (pos_ == goal_) return cost_;
    while (true) {
      switch (node->kind) {
        case PolicyNode::Kind::PathLeaf:
          if (walk(node->path_edges)) return cost_;
          throw ContractViolation("committed route ended away from the goal");
        case PolicyNode::Kind::Observe: {
          if (walk(node->leg_edges)) return cost_;
          cost_ += c_obs_;
          const bool unblocked = map_.blocked.count(node->observe_edge) == 0;
          node = unblocked ? node->if_unblocked.get() : node->if_blocked.get();
          break;
        }
        case PolicyNode::Kind::SwitchLeaf:
          return fallback();
      }
    }
  }

 private:
  void sense() {
    for (const int e_idx : graph_.incident(graph_.vertex_index(pos_))) {
      const std::string& id = graph_.edges()[e_idx].id;
      if (map_.blocked.count(id) > 0) {
        known_blocked_.insert(id);
      }
    }
  }

  // Walks the given edges from the current position; true when the goal was
  // reached on the way (the trailing portion of the route is then skipped,
  // exactly as the live task ends on goal arrival).
  bool walk(const std::vector<std::string>& edges) {
    for (const std::string& id : edges) {
      const Edge& e = graph_.edge(id);
      if (map_.blocked.count(id) > 0) {
        throw ContractViolation("traced route crossed an edge its own hypothesis blocks");
      }
      cost_ += e.cost;
      pos_ = graph_.other_endpoint(e, pos_);
      sense();
      if (pos_ == goal_) return true;
    }
    return false;
  }

  double fallback() {
    const int budget = 10 * static_cast<int>(graph_.vertices().size()) *
                       static_cast<int>(graph_.edges().size());
    for (int step = 0; step <= budget; ++step) {
      EdgeMask mask = full_edge_mask(graph_);
      for (const auto& id : known_blocked_) {
        mask[graph_.edge_index(id)] = 0;
      }
      auto path = shortest_path(graph_, mask, pos_, goal_);
      if (!path.has_value()) return cost_;  // provably cut off: give up
      const Edge& e = graph_.edge(path->edges.front());
      if (map_.blocked.count(e.id) > 0) {
        throw ContractViolation("fallback planned through a sensed-blocked edge");
      }
      cost_ += e.cost;
      pos_ = graph_.other_endpoint(e, pos_);
      sense();
      if (pos_ == goal_) return cost_;
    }
    throw ContractViolation("fallback trace exceeded the step budget");
  }

  const NavGraph& graph_;
  const BeliefMap& map_;
  std::string goal_;
  double c_obs_ = 0.0;
  std::string pos_;
  EdgeIdSet known_blocked_;
  double cost_ = 0.0;
};

}  // namespace

double expected_cost(const PolicyTree& tree, const NavGraph& graph,
                     const std::vector<BeliefMap>& maps, double c_obs) {
  if (tree.root == nullptr) throw ValidationError("expected_cost needs a built tree");
  double weight_sum = 0.0;
  for (const BeliefMap& m : maps) weight_sum += m.weight;
  if (weight_sum <= 0.0) throw ValidationError("belief weights must not all be zero");

  double total = 0.0;
  for (const BeliefMap& m : maps) {
    if (m.weight <= 0.0) continue;
    HypothesisTrace trace(graph, m, tree.goal, c_obs);
    total += (m.weight / weight_sum) * trace.run(tree.root.get(), tree.start);
  }
  return total;
}

namespace {

nlohmann::json node_to_json(const PolicyNode& node) {
  nlohmann::json doc;
  doc["maps"] = node.maps;
  switch (node.kind) {
    case PolicyNode::Kind::PathLeaf:
      doc["kind"] = "path";
      doc["vertices"] = node.path_vertices;
      doc["edges"] = node.path_edges;
      break;
    case PolicyNode::Kind::SwitchLeaf:
      doc["kind"] = "switch";
      break;
    case PolicyNode::Kind::Observe:
      doc["kind"] = "observe";
      doc["edge"] = node.observe_edge;
      doc["vertex"] = node.observe_vertex;
      doc["leg_vertices"] = node.leg_vertices;
      doc["leg_edges"] = node.leg_edges;
      doc["if_unblocked"] = node_to_json(*node.if_unblocked);
      doc["if_blocked"] = node_to_json(*node.if_blocked);
      break;
  }
  return doc;
}

}  // namespace

std::string policy_to_json(const PolicyTree& tree) {
  nlohmann::json doc;
  doc["start"] = tree.start;
  doc["goal"] = tree.goal;
  doc["root"] = tree.root != nullptr ? node_to_json(*tree.root) : nlohmann::json();
  return doc.dump(2) + "\n";
}

std::vector<BeliefMap> belief_from_store(const SuperMapStore& store) {
  std::vector<BeliefMap> out;
  out.reserve(store.maps.size());
  for (const SuperMap& m : store.maps) {
    BeliefMap b;
    b.blocked = m.record.blocked;
    b.unblocked = m.record.unblocked;
    out.push_back(std::move(b));
  }
  if (store.tasks_completed >= 1) {
    const std::vector<PmfEntry> pmf = estimate_pmf(store);
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i].weight = pmf[i].normalized;
    }
  } else {
    for (BeliefMap& b : out) {
      b.weight = 1.0 / static_cast<double>(out.size());
    }
  }
  return out;
}

}  // namespace memnav
