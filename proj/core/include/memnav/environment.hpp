#pragma once

#include <map>
#include <string>
#include <vector>

#include "memnav/nav_graph.hpp"
#include "memnav/rng.hpp"

namespace memnav {
class Rng;

enum class EdgeState { Unblocked, Blocked };

// One hidden world draw: the subset of edges that can actually be traversed.
struct Realization {
  EdgeIdSet unblocked;

  bool is_unblocked(const std::string& edge_id) const { return unblocked.count(edge_id) > 0; }
};

// An environment: the full graph, the start/goal pair, and a discrete
// distribution over realizations.
struct EnvironmentSpec {
  NavGraph graph;
  std::string start;
  std::string goal;
  std::vector<Realization> realizations;
  std::vector<double> pmf;
};

// Parse an environment document. Throws ParseError for malformed JSON and
// ValidationError (naming the invariant) for schema violations. The pmf must
// sum to 1 within 1e-9; it is checked, never silently renormalized.
EnvironmentSpec load_environment(const std::string& json_text);
EnvironmentSpec load_environment_file(const std::string& path);
std::string environment_to_json(const EnvironmentSpec& spec);

// Draw an index from a pmf by CDF inversion. Zero-probability entries are
// never produced. Identical seeds give identical sequences.
int sample_index(const std::vector<double>& pmf, Rng& rng);
int sample_realization(const EnvironmentSpec& spec, Rng& rng);

// States of all edges incident to `vertex_id` under `real`, keyed by edge id.
std::map<std::string, EdgeState> sense_incident(const Realization& real, const NavGraph& graph,
                                                const std::string& vertex_id);

}  // namespace memnav
