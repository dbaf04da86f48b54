#pragma once

#include <string>
#include <vector>

#include "memnav/nav_graph.hpp"

namespace memnav {
class Rng;

// What one task taught us: edges seen blocked and edges seen unblocked.
// Everything else is unknown. The two sets never intersect.
struct MapRecord {
  EdgeIdSet blocked;
  EdgeIdSet unblocked;
};

// Two records agree when neither claims blocked what the other claims
// unblocked. Unknown edges never conflict.
bool agrees(const MapRecord& a, const MapRecord& b);

// Union-merge of two agreeing records. Throws ContractViolation on
// disagreement. Commutative and associative over mutually agreeing records.
MapRecord merge(const MapRecord& a, const MapRecord& b);

// A stored map plus how many later task maps were merged into it.
struct SuperMap {
  MapRecord record;
  int merge_count = 0;
};

// Ordered compressed memory. Index 0 is always the optimistic seed map
// (nothing blocked, everything unblocked) with merge count 0.
struct SuperMapStore {
  std::vector<SuperMap> maps;
  int tasks_completed = 0;

  static SuperMapStore fresh(const NavGraph& graph);
  std::size_t size() const { return maps.size(); }
};

enum class MergeStrategy {
  FirstFit,          // lowest agreeing index
  MinAddedBlocked,   // agreeing index adding the fewest new blocked edges
};

// Fold one finished task's record into the store: merge into a stored map
// chosen by `strategy`, or append a new super map when nothing agrees.
// Ties in MinAddedBlocked go to the lowest index unless `tie_rng` is given,
// in which case a uniform choice among the tied candidates is drawn.
// Returns the index the record landed in. Increments tasks_completed.
int map_filter(const MapRecord& record, SuperMapStore& store, MergeStrategy strategy,
               Rng* tie_rng = nullptr);

struct PmfEntry {
  int index = 0;
  double raw = 0.0;         // (merge_count + 1) / tasks_completed
  double normalized = 0.0;  // raw rescaled to sum to 1 across the store
};

// Empirical weight of every stored map. Requires tasks_completed >= 1.
std::vector<PmfEntry> estimate_pmf(const SuperMapStore& store);

// Traversable edge set per stored map: everything not recorded blocked
// (unknown counts as unblocked). Index-aligned with store.maps.
std::vector<EdgeIdSet> to_edge_subsets(const SuperMapStore& store, const NavGraph& graph);

// Serialization (round-trips exactly).
std::string store_to_json(const SuperMapStore& store);
SuperMapStore store_from_json(const std::string& json_text, const NavGraph& graph);

}  // namespace memnav
