#include <doctest.h>

#include <set>
#include <string>
#include <vector>

#include "memnav/error.hpp"
#include "memnav/map_memory.hpp"
#include "memnav/rng.hpp"
#include "support/fixtures.hpp"

using namespace memnav;

namespace {

MapRecord rec(EdgeIdSet blocked, EdgeIdSet unblocked) {
  return MapRecord{std::move(blocked), std::move(unblocked)};
}

}  // namespace

TEST_CASE("agreement ignores unknowns and flags direct conflicts") {
  CHECK(agrees(rec({}, {}), rec({"a"}, {"b"})));
  CHECK(agrees(rec({"a"}, {}), rec({"a"}, {"b"})));
  CHECK(agrees(rec({}, {"c"}), rec({"a"}, {"b"})));
  CHECK_FALSE(agrees(rec({"a"}, {}), rec({}, {"a"})));
  CHECK_FALSE(agrees(rec({}, {"a"}), rec({"a"}, {})));
}

TEST_CASE("merge unions agreeing records and rejects conflicts") {
  const MapRecord m = merge(rec({"a"}, {"b"}), rec({"c"}, {"b", "d"}));
  CHECK(m.blocked == EdgeIdSet{"a", "c"});
  CHECK(m.unblocked == EdgeIdSet{"b", "d"});
  CHECK_THROWS_AS(merge(rec({"a"}, {}), rec({}, {"a"})), ContractViolation);
}

TEST_CASE("a fresh store holds only the optimistic seed map") {
  const EnvironmentSpec env = test::load_env_fixture("two_door.json");
  const SuperMapStore store = SuperMapStore::fresh(env.graph);
  REQUIRE(store.size() == 1);
  CHECK(store.tasks_completed == 0);
  CHECK(store.maps[0].merge_count == 0);
  CHECK(store.maps[0].record.blocked.empty());
  CHECK(store.maps[0].record.unblocked.size() == env.graph.edges().size());
}

TEST_CASE("first-fit filing merges low, appends on total disagreement") {
  const EnvironmentSpec env = test::load_env_fixture("two_door.json");
  SuperMapStore store = SuperMapStore::fresh(env.graph);

  // A record with nothing blocked agrees with the seed map and lands there.
  CHECK(map_filter(rec({}, {"e_so", "e_sm"}), store, MergeStrategy::FirstFit) == 0);
  CHECK(store.size() == 1);
  CHECK(store.maps[0].merge_count == 1);
  CHECK(store.tasks_completed == 1);

  // A blocked door conflicts with the seed's everything-unblocked claim.
  CHECK(map_filter(rec({"door_right"}, {"e_so"}), store, MergeStrategy::FirstFit) == 1);
  REQUIRE(store.size() == 2);
  CHECK(store.maps[1].merge_count == 0);
  CHECK(store.tasks_completed == 2);

  // The same observation again merges into the map it spawned.
  CHECK(map_filter(rec({"door_right"}, {"e_sm", "e_ml"}), store, MergeStrategy::FirstFit) == 1);
  CHECK(store.size() == 2);
  CHECK(store.maps[1].merge_count == 1);
  CHECK(store.maps[1].record.unblocked == EdgeIdSet{"e_so", "e_sm", "e_ml"});

  // The seed map never accumulates blocked edges: conflicts always veer off.
  CHECK(store.maps[0].record.blocked.empty());
}

TEST_CASE("min-added-blocked picks the stingiest agreeing map") {
  const EnvironmentSpec env = test::load_env_fixture("three_routes.json");
  SuperMapStore store = SuperMapStore::fresh(env.graph);
  // Two stored maps that disagree with each other over door_blue.
  map_filter(rec({"door_blue"}, {"e_s_j0"}), store, MergeStrategy::FirstFit);
  map_filter(rec({"door_orange"}, {"door_blue"}), store, MergeStrategy::FirstFit);
  REQUIRE(store.size() == 3);

  // blocked {door_orange, e_c5_g} agrees with both: it would add two blocked
  // edges to map 1 but only one to map 2. First fit stops at the first match.
  SuperMapStore first = store;
  CHECK(map_filter(rec({"door_orange", "e_c5_g"}, {}), first, MergeStrategy::FirstFit) == 1);
  SuperMapStore min_added = store;
  CHECK(map_filter(rec({"door_orange", "e_c5_g"}, {}), min_added,
                   MergeStrategy::MinAddedBlocked) == 2);
}

TEST_CASE("min-added-blocked ties break low, or uniformly under a tie stream") {
  const EnvironmentSpec env = test::load_env_fixture("three_routes.json");
  SuperMapStore base = SuperMapStore::fresh(env.graph);
  map_filter(rec({"door_blue"}, {"e_s_j0"}), base, MergeStrategy::FirstFit);
  map_filter(rec({"door_orange"}, {"door_blue"}), base, MergeStrategy::FirstFit);
  REQUIRE(base.size() == 3);

  // blocked {e_c5_g} adds exactly one blocked edge to map 1 and one to
  // map 2 (the seed map disagrees): a genuine tie.
  SuperMapStore plain = base;
  CHECK(map_filter(rec({"e_c5_g"}, {}), plain, MergeStrategy::MinAddedBlocked) == 1);

  std::set<int> landed;
  for (std::uint64_t seed = 0; seed < 24; ++seed) {
    SuperMapStore s = base;
    Rng tie(seed);
    landed.insert(map_filter(rec({"e_c5_g"}, {}), s, MergeStrategy::MinAddedBlocked, &tie));
  }
  CHECK(landed == std::set<int>{1, 2});
}

TEST_CASE("self-contradictory records are rejected") {
  const EnvironmentSpec env = test::load_env_fixture("two_door.json");
  SuperMapStore store = SuperMapStore::fresh(env.graph);
  CHECK_THROWS_AS(map_filter(rec({"e_so"}, {"e_so"}), store, MergeStrategy::FirstFit),
                  ContractViolation);
}

TEST_CASE("pmf estimation weights maps by absorbed tasks") {
  const EnvironmentSpec env = test::load_env_fixture("two_door.json");
  SuperMapStore store = SuperMapStore::fresh(env.graph);
  CHECK_THROWS_AS(estimate_pmf(store), ValidationError);  // nothing completed yet

  map_filter(rec({}, {"e_so"}), store, MergeStrategy::FirstFit);          // -> map 0
  map_filter(rec({"door_right"}, {}), store, MergeStrategy::FirstFit);    // -> new map 1
  map_filter(rec({"door_right"}, {}), store, MergeStrategy::FirstFit);    // -> map 1
  map_filter(rec({"door_right"}, {}), store, MergeStrategy::FirstFit);    // -> map 1

  const auto pmf = estimate_pmf(store);
  REQUIRE(pmf.size() == 2);
  CHECK(pmf[0].index == 0);
  CHECK(pmf[0].raw == doctest::Approx(2.0 / 4.0));      // one merge + the map itself
  CHECK(pmf[1].raw == doctest::Approx(3.0 / 4.0));      // two merges + itself
  CHECK(pmf[0].normalized == doctest::Approx(2.0 / 5.0));
  CHECK(pmf[1].normalized == doctest::Approx(3.0 / 5.0));
}

TEST_CASE("edge subsets treat unknown as traversable") {
  const EnvironmentSpec env = test::load_env_fixture("two_door.json");
  SuperMapStore store = SuperMapStore::fresh(env.graph);
  map_filter(rec({"door_right"}, {"e_so"}), store, MergeStrategy::FirstFit);
  const auto subsets = to_edge_subsets(store, env.graph);
  REQUIRE(subsets.size() == 2);
  CHECK(subsets[0].size() == env.graph.edges().size());
  CHECK(subsets[1].size() == env.graph.edges().size() - 1);
  CHECK(subsets[1].count("door_right") == 0);
  CHECK(subsets[1].count("e_ml") == 1);  // never sensed, still usable
}

TEST_CASE("store serialization round-trips and validates edge ids") {
  const EnvironmentSpec env = test::load_env_fixture("two_door.json");
  SuperMapStore store = SuperMapStore::fresh(env.graph);
  map_filter(rec({"door_right"}, {"e_so", "e_or"}), store, MergeStrategy::FirstFit);
  map_filter(rec({}, {"e_sm"}), store, MergeStrategy::FirstFit);

  const SuperMapStore back = store_from_json(store_to_json(store), env.graph);
  CHECK(back.tasks_completed == store.tasks_completed);
  REQUIRE(back.size() == store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    CHECK(back.maps[i].merge_count == store.maps[i].merge_count);
    CHECK(back.maps[i].record.blocked == store.maps[i].record.blocked);
    CHECK(back.maps[i].record.unblocked == store.maps[i].record.unblocked);
  }

  CHECK_THROWS_AS(store_from_json(R"({"tasks_completed": 1,
    "maps": [{"blocked": ["zz"], "unblocked": [], "merge_count": 0}]})", env.graph),
                  ValidationError);
  CHECK_THROWS_AS(store_from_json("no json at all", env.graph), ParseError);
}

TEST_CASE("records drawn from one world can never grow a third map") {
  const EnvironmentSpec env = test::load_env_fixture("three_routes.json");
  const Realization& world = env.realizations[2];  // both doors shut
  Rng rng(77);
  for (int run = 0; run < 50; ++run) {
    SuperMapStore store = SuperMapStore::fresh(env.graph);
    for (int t = 0; t < 40; ++t) {
      MapRecord r;
      for (const Edge& e : env.graph.edges()) {
        if (rng.canonical() < 0.5) continue;  // unsensed this task
        if (world.is_unblocked(e.id)) {
          r.unblocked.insert(e.id);
        } else {
          r.blocked.insert(e.id);
        }
      }
      map_filter(r, store, run % 2 == 0 ? MergeStrategy::FirstFit
                                        : MergeStrategy::MinAddedBlocked);
    }
    CHECK(store.size() <= 2);
  }
}
