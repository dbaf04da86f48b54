#include "memnav/nav_graph.hpp"

#include <algorithm>
#include <limits>
#include <queue>

#include "memnav/error.hpp"

namespace memnav {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

NavGraph::NavGraph(std::vector<Vertex> vertices, std::vector<Edge> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges)) {
  vertex_index_.reserve(vertices_.size());
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (!vertex_index_.emplace(vertices_[i].id, static_cast<int>(i)).second) {
      throw ValidationError("duplicate vertex id: " + vertices_[i].id);
    }
  }
  incident_.resize(vertices_.size());
  edge_index_.reserve(edges_.size());
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    if (!edge_index_.emplace(e.id, static_cast<int>(i)).second) {
      throw ValidationError("duplicate edge id: " + e.id);
    }
    if (!(e.cost > 0.0)) {
      throw ValidationError("edge cost must be positive: " + e.id);
    }
    auto u_it = vertex_index_.find(e.u);
    auto v_it = vertex_index_.find(e.v);
    if (u_it == vertex_index_.end() || v_it == vertex_index_.end()) {
      throw ValidationError("edge endpoint is not a vertex: " + e.id);
    }
    incident_[u_it->second].push_back(static_cast<int>(i));
    if (v_it->second != u_it->second) {
      incident_[v_it->second].push_back(static_cast<int>(i));
    }
    total_edge_cost_ += e.cost;
  }
}

int NavGraph::vertex_index(const std::string& id) const {
  auto it = vertex_index_.find(id);
  if (it == vertex_index_.end()) {
    throw ValidationError("unknown vertex id: " + id);
  }
  return it->second;
}

int NavGraph::edge_index(const std::string& id) const {
  auto it = edge_index_.find(id);
  if (it == edge_index_.end()) {
    throw ValidationError("unknown edge id: " + id);
  }
  return it->second;
}

std::vector<std::string> NavGraph::incident_edge_ids(const std::string& vertex_id) const {
  std::vector<std::string> out;
  for (int ei : incident_[vertex_index(vertex_id)]) {
    out.push_back(edges_[ei].id);
  }
  return out;
}

const std::string& NavGraph::other_endpoint(const Edge& e, const std::string& from) const {
  if (e.u == from) return e.v;
  if (e.v == from) return e.u;
  throw ContractViolation("vertex " + from + " is not an endpoint of edge " + e.id);
}

EdgeMask make_edge_mask(const NavGraph& graph, const EdgeIdSet& traversable) {
  EdgeMask mask(graph.edges().size(), 0);
  for (const std::string& id : traversable) {
    mask[graph.edge_index(id)] = 1;
  }
  return mask;
}

EdgeMask full_edge_mask(const NavGraph& graph) {
  return EdgeMask(graph.edges().size(), 1);
}

std::vector<double> shortest_path_distances(const NavGraph& graph, const EdgeMask& traversable,
                                            const std::string& from) {
  const auto& edges = graph.edges();
  std::vector<double> dist(graph.vertices().size(), kInf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
  const int s = graph.vertex_index(from);
  dist[s] = 0.0;
  queue.emplace(0.0, s);
  while (!queue.empty()) {
    auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[v]) continue;
    for (int ei : graph.incident(v)) {
      if (!traversable[ei]) continue;
      const Edge& e = edges[ei];
      const int w = graph.vertex_index(e.u) == v ? graph.vertex_index(e.v) : graph.vertex_index(e.u);
      const double nd = d + e.cost;
      if (nd < dist[w]) {
        dist[w] = nd;
        queue.emplace(nd, w);
      }
    }
  }
  return dist;
}

std::optional<PathResult> shortest_path(const NavGraph& graph, const EdgeMask& traversable,
                                        const std::string& from, const std::string& to) {
  // Distances toward the target, then a greedy forward walk over the
  // shortest-path DAG choosing the smallest edge id at every hop. Greedy is
  // exact here: picking the smallest feasible first edge id is precisely the
  // lexicographic order on edge-id sequences, and costs are positive so the
  // walk strictly descends the distance table and terminates.
  const std::vector<double> dist_to_target = shortest_path_distances(graph, traversable, to);
  const int s = graph.vertex_index(from);
  if (dist_to_target[s] == kInf) return std::nullopt;

  PathResult result;
  result.vertices.push_back(from);
  std::string current = from;
  int current_idx = s;
  while (current != to) {
    const Edge* best = nullptr;
    int best_target = -1;
    for (int ei : graph.incident(current_idx)) {
      if (!traversable[ei]) continue;
      const Edge& e = graph.edges()[ei];
      const std::string& next = graph.other_endpoint(e, current);
      const int next_idx = graph.vertex_index(next);
      if (e.cost + dist_to_target[next_idx] == dist_to_target[current_idx]) {
        if (best == nullptr || e.id < best->id) {
          best = &e;
          best_target = next_idx;
        }
      }
    }
    if (best == nullptr) return std::nullopt;  // defensive; cannot happen with exact sums
    result.edges.push_back(best->id);
    result.cost += best->cost;
    current = graph.other_endpoint(*best, current);
    current_idx = best_target;
    result.vertices.push_back(current);
  }
  return result;
}

std::optional<PathResult> shortest_path(const NavGraph& graph, const EdgeIdSet& traversable,
                                        const std::string& from, const std::string& to) {
  return shortest_path(graph, make_edge_mask(graph, traversable), from, to);
}

}  // namespace memnav
