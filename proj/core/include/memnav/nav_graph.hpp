#pragma once

#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace memnav {

using EdgeIdSet = std::set<std::string>;

struct Vertex {
  std::string id;
  bool has_position = false;
  double x = 0.0;
  double y = 0.0;
};

// Undirected, positive-cost, multigraph edge. Edge ids are unique even when
// several edges share the same endpoints.
struct Edge {
  std::string id;
  std::string u;
  std::string v;
  double cost = 0.0;
  std::string submap;  // empty when the graph has no grid provenance
};

// Navigation graph. Vertices and edges are addressed by string id in the
// public API; the class keeps index tables so the solvers can run on ints.
class NavGraph {
 public:
  NavGraph() = default;
  NavGraph(std::vector<Vertex> vertices, std::vector<Edge> edges);

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }

  bool has_vertex(const std::string& id) const { return vertex_index_.count(id) > 0; }
  bool has_edge(const std::string& id) const { return edge_index_.count(id) > 0; }

  int vertex_index(const std::string& id) const;
  int edge_index(const std::string& id) const;

  const Vertex& vertex(const std::string& id) const { return vertices_[vertex_index(id)]; }
  const Edge& edge(const std::string& id) const { return edges_[edge_index(id)]; }

  // Edge indices incident to a vertex, in insertion order.
  const std::vector<int>& incident(int vertex_idx) const { return incident_[vertex_idx]; }
  std::vector<std::string> incident_edge_ids(const std::string& vertex_id) const;

  // The endpoint of `e` that is not `from`. Throws if `from` is not an endpoint.
  const std::string& other_endpoint(const Edge& e, const std::string& from) const;

  double total_edge_cost() const { return total_edge_cost_; }

 private:
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::unordered_map<std::string, int> vertex_index_;
  std::unordered_map<std::string, int> edge_index_;
  std::vector<std::vector<int>> incident_;
  double total_edge_cost_ = 0.0;
};

// A concrete path. `vertices` has one more entry than `edges`; a trivial path
// (already at the target) has a single vertex and no edges.
struct PathResult {
  std::vector<std::string> vertices;
  std::vector<std::string> edges;
  double cost = 0.0;
};

// Bitmask over edge indices; mask[i] != 0 means edge i may be traversed.
using EdgeMask = std::vector<unsigned char>;

EdgeMask make_edge_mask(const NavGraph& graph, const EdgeIdSet& traversable);
EdgeMask full_edge_mask(const NavGraph& graph);

// Minimum-cost path from `from` to `to` using only masked-in edges. Among
// equal-cost optima the path whose edge-id sequence is lexicographically
// smallest is returned, which keeps every caller deterministic. Returns
// nullopt when `to` is unreachable.
std::optional<PathResult> shortest_path(const NavGraph& graph, const EdgeMask& traversable,
                                        const std::string& from, const std::string& to);
std::optional<PathResult> shortest_path(const NavGraph& graph, const EdgeIdSet& traversable,
                                        const std::string& from, const std::string& to);

// Distance table from `from` over masked-in edges; unreachable vertices get
// +infinity. Index-aligned with graph.vertices().
std::vector<double> shortest_path_distances(const NavGraph& graph, const EdgeMask& traversable,
                                            const std::string& from);

}  // namespace memnav
