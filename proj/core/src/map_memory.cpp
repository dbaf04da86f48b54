#include "memnav/map_memory.hpp"

#include <algorithm>

#include <json.hpp>

#include "memnav/error.hpp"
#include "memnav/rng.hpp"

namespace memnav {

namespace {

bool intersects(const EdgeIdSet& a, const EdgeIdSet& b) {
  // Walk the smaller set, probe the larger.
  const EdgeIdSet& small = a.size() <= b.size() ? a : b;
  const EdgeIdSet& large = a.size() <= b.size() ? b : a;
  for (const auto& id : small) {
    if (large.count(id)) return true;
  }
  return false;
}

}  // namespace

bool agrees(const MapRecord& a, const MapRecord& b) {
  return !intersects(a.blocked, b.unblocked) && !intersects(b.blocked, a.unblocked);
}

MapRecord merge(const MapRecord& a, const MapRecord& b) {
  if (!agrees(a, b)) {
    throw ContractViolation("merge called on disagreeing map records");
  }
  MapRecord out = a;
  out.blocked.insert(b.blocked.begin(), b.blocked.end());
  out.unblocked.insert(b.unblocked.begin(), b.unblocked.end());
  return out;
}

SuperMapStore SuperMapStore::fresh(const NavGraph& graph) {
  SuperMapStore store;
  SuperMap seed;
  for (const Edge& e : graph.edges()) {
    seed.record.unblocked.insert(e.id);
  }
  store.maps.push_back(std::move(seed));
  return store;
}

int map_filter(const MapRecord& record, SuperMapStore& store, MergeStrategy strategy,
               Rng* tie_rng) {
  if (intersects(record.blocked, record.unblocked)) {
    throw ContractViolation("task record claims an edge both blocked and unblocked");
  }
  std::vector<int> agreeing;
  for (std::size_t i = 0; i < store.maps.size(); ++i) {
    if (agrees(record, store.maps[i].record)) {
      agreeing.push_back(static_cast<int>(i));
    }
  }
  store.tasks_completed += 1;
  if (agreeing.empty()) {
    SuperMap fresh;
    fresh.record = record;
    fresh.merge_count = 0;  // the estimator adds the +1 for the map itself
    store.maps.push_back(std::move(fresh));
    return static_cast<int>(store.maps.size()) - 1;
  }

  int chosen = agreeing.front();
  if (strategy == MergeStrategy::MinAddedBlocked) {
    // Cost of candidate j: how many blocked edges the merge would add to it.
    auto added_blocked = [&](int j) {
      const EdgeIdSet& have = store.maps[j].record.blocked;
      int added = 0;
      for (const auto& id : record.blocked) {
        if (!have.count(id)) ++added;
      }
      return added;
    };
    int best_cost = added_blocked(agreeing.front());
    std::vector<int> tied{agreeing.front()};
    for (std::size_t k = 1; k < agreeing.size(); ++k) {
      const int cost = added_blocked(agreeing[k]);
      if (cost < best_cost) {
        best_cost = cost;
        tied.assign(1, agreeing[k]);
      } else if (cost == best_cost) {
        tied.push_back(agreeing[k]);
      }
    }
    chosen = tie_rng != nullptr && tied.size() > 1
                 ? tied[static_cast<std::size_t>(tie_rng->below(tied.size()))]
                 : tied.front();
  }

  store.maps[chosen].record = merge(store.maps[chosen].record, record);
  store.maps[chosen].merge_count += 1;
  return chosen;
}

std::vector<PmfEntry> estimate_pmf(const SuperMapStore& store) {
  if (store.tasks_completed < 1) {
    throw ValidationError("estimate_pmf requires at least one completed task");
  }
  std::vector<PmfEntry> out;
  double total = 0.0;
  for (std::size_t i = 0; i < store.maps.size(); ++i) {
    PmfEntry entry;
    entry.index = static_cast<int>(i);
    entry.raw = static_cast<double>(store.maps[i].merge_count + 1) /
                static_cast<double>(store.tasks_completed);
    total += entry.raw;
    out.push_back(entry);
  }
  for (PmfEntry& entry : out) {
    entry.normalized = entry.raw / total;
  }
  return out;
}

std::vector<EdgeIdSet> to_edge_subsets(const SuperMapStore& store, const NavGraph& graph) {
  std::vector<EdgeIdSet> out;
  out.reserve(store.maps.size());
  for (const SuperMap& m : store.maps) {
    EdgeIdSet subset;
    for (const Edge& e : graph.edges()) {
      if (!m.record.blocked.count(e.id)) subset.insert(e.id);
    }
    out.push_back(std::move(subset));
  }
  return out;
}

std::string store_to_json(const SuperMapStore& store) {
  nlohmann::json doc;
  doc["tasks_completed"] = store.tasks_completed;
  doc["maps"] = nlohmann::json::array();
  for (const SuperMap& m : store.maps) {
    doc["maps"].push_back(nlohmann::json{{"blocked", m.record.blocked},
                                         {"unblocked", m.record.unblocked},
                                         {"merge_count", m.merge_count}});
  }
  return doc.dump(2) + "\n";
}

SuperMapStore store_from_json(const std::string& json_text, const NavGraph& graph) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("store JSON: ") + e.what());
  }
  if (!doc.contains("maps") || !doc["maps"].is_array() || doc["maps"].empty()) {
    throw ValidationError("store document needs a nonempty \"maps\" array");
  }
  SuperMapStore store;
  store.tasks_completed = doc.value("tasks_completed", 0);
  for (const nlohmann::json& jm : doc["maps"]) {
    SuperMap m;
    for (const auto& id : jm.at("blocked")) {
      const std::string edge_id = id.get<std::string>();
      if (!graph.has_edge(edge_id)) throw ValidationError("store names unknown edge: " + edge_id);
      m.record.blocked.insert(edge_id);
    }
    for (const auto& id : jm.at("unblocked")) {
      const std::string edge_id = id.get<std::string>();
      if (!graph.has_edge(edge_id)) throw ValidationError("store names unknown edge: " + edge_id);
      m.record.unblocked.insert(edge_id);
    }
    m.merge_count = jm.value("merge_count", 0);
    if (!agrees(m.record, m.record)) {
      throw ValidationError("stored map claims an edge both blocked and unblocked");
    }
    store.maps.push_back(std::move(m));
  }
  return store;
}

}  // namespace memnav
