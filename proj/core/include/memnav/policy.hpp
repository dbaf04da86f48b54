#pragma once

#include <memory>
#include <string>
#include <vector>

#include "memnav/map_memory.hpp"
#include "memnav/nav_graph.hpp"

namespace memnav {

// Relative importance of the three cost terms in the observation score.
struct PolicyWeights {
  double travel = 1.0;
  double obs = 1.0;
  double goal = 1.0;
};

// One compressed world hypothesis as the planner sees it: the determined edge
// states plus the prior mass the weight estimator assigned to it. Edges in
// neither set are unknown and are treated as traversable when planning inside
// the hypothesis ("subset semantics": the traversable set is E minus blocked).
struct BeliefMap {
  EdgeIdSet blocked;
  EdgeIdSet unblocked;
  double weight = 0.0;
};

// Decision-tree node. A path leaf commits to a concrete route to the goal. A
// switch leaf hands control to the reactive fallback. An observation node
// walks a leg to `observe_vertex`, resolves `observe_edge` there, and then
// follows the child matching the outcome.
struct PolicyNode {
  enum class Kind { PathLeaf, SwitchLeaf, Observe };

  Kind kind = Kind::SwitchLeaf;
  std::vector<int> maps;  // belief-map indices still alive at this node

  // PathLeaf payload.
  std::vector<std::string> path_vertices;
  std::vector<std::string> path_edges;

  // Observe payload. The leg runs from the parent's anchor vertex to
  // `observe_vertex`, which is an endpoint of `observe_edge`.
  std::string observe_edge;
  std::string observe_vertex;
  std::vector<std::string> leg_vertices;
  std::vector<std::string> leg_edges;
  std::unique_ptr<PolicyNode> if_unblocked;
  std::unique_ptr<PolicyNode> if_blocked;
};

struct PolicyTree {
  std::string start;
  std::string goal;
  std::unique_ptr<PolicyNode> root;
};

// Builds the decision tree for the given belief. Weights need not be
// normalized; they are renormalized over the live maps at every node. The
// construction is deterministic: all score ties fall back to lexicographic
// vertex/edge-id order.
PolicyTree build_policy(const NavGraph& graph, const std::vector<BeliefMap>& maps,
                        const std::string& start, const std::string& goal, double c_obs,
                        const PolicyWeights& alpha);

// Exact expected task cost of the tree under the belief: each hypothesis is
// traced through the tree with the same movement, sensing, and fallback rules
// the live executor applies, and the per-hypothesis costs are averaged under
// the normalized weights.
double expected_cost(const PolicyTree& tree, const NavGraph& graph,
                     const std::vector<BeliefMap>& maps, double c_obs);

// Serializes the tree for inspection and for the policy-dump tool.
std::string policy_to_json(const PolicyTree& tree);

// Belief construction from the learned store: determined sets straight from
// the store records, weights from the count-based estimator (uniform over the
// seed map when no task has completed yet).
std::vector<BeliefMap> belief_from_store(const SuperMapStore& store);

}  // namespace memnav
