// Microbenchmarks for the planning hot paths: graph search, policy-tree
// construction, map filtering, and the grid sensing/resolution loop. All
// inputs are generated deterministically so numbers are comparable run to run.

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "memnav/grid.hpp"
#include "memnav/map_memory.hpp"
#include "memnav/nav_graph.hpp"
#include "memnav/policy.hpp"
#include "memnav/rng.hpp"

namespace {

using namespace memnav;

std::string lattice_vertex(int x, int y) {
  return "v" + std::to_string(x) + "_" + std::to_string(y);
}

// n-by-n four-connected lattice with mildly varied costs so Dijkstra has to
// discriminate between routes instead of walking a uniform front.
NavGraph make_lattice(int n) {
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      vertices.push_back(Vertex{lattice_vertex(x, y), false, 0.0, 0.0});
    }
  }
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double jitter = ((x * 7 + y * 13) % 5) * 0.01;
      if (x + 1 < n) {
        edges.push_back(Edge{"eh" + std::to_string(y) + "_" + std::to_string(x),
                             lattice_vertex(x, y), lattice_vertex(x + 1, y), 1.0 + jitter, ""});
      }
      if (y + 1 < n) {
        edges.push_back(Edge{"ev" + std::to_string(y) + "_" + std::to_string(x),
                             lattice_vertex(x, y), lattice_vertex(x, y + 1), 1.0 + jitter, ""});
      }
    }
  }
  return NavGraph(std::move(vertices), std::move(edges));
}

// Star of `routes` parallel two-hop routes from s to g, each with its own
// "door" edge, plus one belief hypothesis per blocked door and one all-clear
// hypothesis. Policy construction has to place one observation per door.
struct RoutesWorld {
  NavGraph graph;
  std::vector<BeliefMap> maps;
};

RoutesWorld make_routes(int routes) {
  std::vector<Vertex> vertices{Vertex{"s", false, 0.0, 0.0}, Vertex{"g", false, 0.0, 0.0}};
  std::vector<Edge> edges;
  for (int i = 0; i < routes; ++i) {
    const std::string mid = "m" + std::to_string(i);
    vertices.push_back(Vertex{mid, false, 0.0, 0.0});
    edges.push_back(Edge{"approach" + std::to_string(i), "s", mid, 1.0 + 0.01 * i, ""});
    edges.push_back(Edge{"door" + std::to_string(i), mid, "g", 1.0, ""});
  }
  RoutesWorld world{NavGraph(std::move(vertices), std::move(edges)), {}};
  BeliefMap clear;
  for (const Edge& e : world.graph.edges()) clear.unblocked.insert(e.id);
  clear.weight = 1.0;
  world.maps.push_back(clear);
  for (int i = 0; i < routes; ++i) {
    BeliefMap m = clear;
    m.unblocked.erase("door" + std::to_string(i));
    m.blocked.insert("door" + std::to_string(i));
    world.maps.push_back(std::move(m));
  }
  return world;
}

GridSpec make_two_rooms() {
  std::vector<std::string> rows;
  rows.push_back("###########");
  rows.push_back("#....#....#");
  rows.push_back("#.........#");
  rows.push_back("#....#....#");
  rows.push_back("###########");
  GridSpec spec;
  spec.base = parse_occupancy(rows);
  spec.cell_labels.assign(static_cast<std::size_t>(spec.base.width) * spec.base.height, "");
  for (int y = 0; y < spec.base.height; ++y) {
    for (int x = 0; x < spec.base.width; ++x) {
      if (spec.base.at(x, y) != 0) continue;
      spec.cell_labels[static_cast<std::size_t>(spec.base.index(x, y))] = x <= 5 ? "A" : "B";
    }
  }
  spec.start = GridCell{1, 2};
  spec.goal = GridCell{9, 2};
  spec.realizations.push_back({});
  spec.pmf.push_back(1.0);
  return spec;
}

void BM_ShortestPath(benchmark::State& state) {
  const NavGraph graph = make_lattice(static_cast<int>(state.range(0)));
  const EdgeMask mask = full_edge_mask(graph);
  const std::string from = lattice_vertex(0, 0);
  const std::string to = lattice_vertex(static_cast<int>(state.range(0)) - 1,
                                        static_cast<int>(state.range(0)) - 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(shortest_path(graph, mask, from, to));
  }
}
BENCHMARK(BM_ShortestPath)->Arg(8)->Arg(16)->Arg(32);

void BM_BuildPolicy(benchmark::State& state) {
  const RoutesWorld world = make_routes(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_policy(world.graph, world.maps, "s", "g", 0.0, PolicyWeights{}));
  }
}
BENCHMARK(BM_BuildPolicy)->Arg(3)->Arg(6)->Arg(9);

void BM_ExpectedCost(benchmark::State& state) {
  const RoutesWorld world = make_routes(static_cast<int>(state.range(0)));
  const PolicyTree tree = build_policy(world.graph, world.maps, "s", "g", 0.0, PolicyWeights{});
  for (auto _ : state) {
    benchmark::DoNotOptimize(expected_cost(tree, world.graph, world.maps, 0.0));
  }
}
BENCHMARK(BM_ExpectedCost)->Arg(3)->Arg(6)->Arg(9);

void BM_MapFilter(benchmark::State& state) {
  const RoutesWorld world = make_routes(6);
  // A fixed stream of task records: each one senses a random half of the
  // edges and sees each sensed door blocked with chance one in four.
  Rng rng(41);
  std::vector<MapRecord> records;
  for (int i = 0; i < 64; ++i) {
    MapRecord r;
    for (const Edge& e : world.graph.edges()) {
      if (rng.canonical() < 0.5) continue;
      if (e.id.rfind("door", 0) == 0 && rng.canonical() < 0.25) {
        r.blocked.insert(e.id);
      } else {
        r.unblocked.insert(e.id);
      }
    }
    records.push_back(std::move(r));
  }
  const MergeStrategy strategy =
      state.range(0) == 0 ? MergeStrategy::FirstFit : MergeStrategy::MinAddedBlocked;
  for (auto _ : state) {
    SuperMapStore store = SuperMapStore::fresh(world.graph);
    for (const MapRecord& r : records) {
      benchmark::DoNotOptimize(map_filter(r, store, strategy));
    }
  }
}
BENCHMARK(BM_MapFilter)->Arg(0)->Arg(1);

void BM_SenseSweep(benchmark::State& state) {
  ByteGrid base(40, 40, 0);
  for (int i = 0; i < 40; ++i) {
    base.set(i, 0, 1);
    base.set(i, 39, 1);
    base.set(0, i, 1);
    base.set(39, i, 1);
  }
  Rng rng(7);
  for (int i = 0; i < 120; ++i) {
    const int x = 1 + static_cast<int>(rng.below(38));
    const int y = 1 + static_cast<int>(rng.below(38));
    if (x == 20 && y == 20) continue;
    base.set(x, y, 1);
  }
  const ByteGrid overlay(40, 40, 0);
  for (auto _ : state) {
    SenseState sense = fresh_sense_state(base);
    benchmark::DoNotOptimize(sense_sweep(base, overlay, GridCell{20, 20}, 8.0, sense));
  }
}
BENCHMARK(BM_SenseSweep);

void BM_CellShortestPath(benchmark::State& state) {
  const int n = 64;
  ByteGrid passable(n, n, 1);
  Rng rng(11);
  for (int i = 0; i < n * n / 5; ++i) {
    const int x = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    passable.set(x, y, 0);
  }
  // Carve the two corners and a straight furrow so a route always exists.
  for (int i = 0; i < n; ++i) passable.set(i, n / 2, 1);
  passable.set(0, 0, 1);
  passable.set(0, n / 2, 1);
  passable.set(n - 1, n - 1, 1);
  passable.set(n - 1, n / 2, 1);
  for (int y = 0; y <= n / 2; ++y) passable.set(0, y, 1);
  for (int y = n / 2; y < n; ++y) passable.set(n - 1, y, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        cell_shortest_path(passable, GridCell{0, 0}, GridCell{n - 1, n - 1}));
  }
}
BENCHMARK(BM_CellShortestPath);

void BM_ResolveEdge(benchmark::State& state) {
  const GridContext ctx = build_grid_context(make_two_rooms());
  SenseState sense = fresh_sense_state(ctx.spec.base);
  const ByteGrid overlay(ctx.spec.base.width, ctx.spec.base.height, 0);
  sense_sweep(ctx.spec.base, overlay, ctx.spec.start, 8.0, sense);
  const std::string edge = ctx.graph.edges().front().id;
  for (auto _ : state) {
    benchmark::DoNotOptimize(resolve_edge(ctx, sense, edge, ctx.spec.start));
  }
}
BENCHMARK(BM_ResolveEdge);

}  // namespace

BENCHMARK_MAIN();
