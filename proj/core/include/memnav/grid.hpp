#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "memnav/nav_graph.hpp"

namespace memnav {

struct GridCell {
  int x = 0;
  int y = 0;

  bool operator==(const GridCell& o) const { return x == o.x && y == o.y; }
  bool operator!=(const GridCell& o) const { return !(*this == o); }
  bool operator<(const GridCell& o) const { return y != o.y ? y < o.y : x < o.x; }
};

// Plain byte raster; nonzero means occupied (or, depending on use, marked).
struct ByteGrid {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> cells;

  ByteGrid() = default;
  ByteGrid(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), cells(static_cast<std::size_t>(w) * h, fill) {}

  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  int index(int x, int y) const { return y * width + x; }
  std::uint8_t at(int x, int y) const { return cells[static_cast<std::size_t>(index(x, y))]; }
  void set(int x, int y, std::uint8_t v) { cells[static_cast<std::size_t>(index(x, y))] = v; }
};

// Parses a grid drawn as rows of characters, '#' occupied and '.' free.
ByteGrid parse_occupancy(const std::vector<std::string>& rows);

// A doorway between two submaps: a maximal contiguous strip of free cell
// pairs that face each other across the label boundary. The geometric center
// of all involved cells becomes the navigation vertex; each side keeps the
// member cell nearest the center as its anchor for cell-level planning.
struct Portal {
  std::string id;
  std::string label_a;             // lexicographically smaller label
  std::string label_b;
  std::vector<GridCell> cells_a;   // member cells carrying label_a
  std::vector<GridCell> cells_b;
  double center_x = 0.0;
  double center_y = 0.0;
  GridCell anchor_a;
  GridCell anchor_b;
};

// The static world description: base walls, the submap decomposition, the
// task endpoints, and the sensor range. Overlay obstacles come per
// realization and are unknown until sensed; the base map is known a priori.
struct GridSpec {
  ByteGrid base;
  std::vector<std::string> cell_labels;  // one label per cell; empty on walls
  GridCell start;
  GridCell goal;
  double r_max = 8.0;
  std::vector<std::vector<GridCell>> realizations;  // overlay obstacle cells
  std::vector<double> pmf;

  const std::string& label_at(const GridCell& c) const {
    return cell_labels[static_cast<std::size_t>(base.index(c.x, c.y))];
  }
};

GridSpec load_grid_spec(const std::string& json_text);
GridSpec load_grid_spec_file(const std::string& path);

// Everything derived from a GridSpec that execution and planning share:
// portals, the portal navigation graph, per-submap planning regions, and the
// anchor cells the graph vertices stand for inside each submap.
struct GridContext {
  GridSpec spec;
  std::vector<Portal> portals;
  NavGraph graph;
  std::string start_vertex;  // "s"
  std::string goal_vertex;   // "g"

  // Planning region of a submap: its own cells plus the portal cells on the
  // far side of its doorways, so a path may stand "in the doorway". Keyed by
  // label; values are rasters with nonzero meaning "inside the region".
  std::map<std::string, ByteGrid> regions;

  // Cell a vertex stands on when entered from a given submap. Portal
  // vertices anchor on their side facing the submap; the start and goal
  // anchor on their own cells regardless of submap.
  GridCell vertex_anchor(const std::string& vertex_id, const std::string& submap) const;
};

GridContext build_grid_context(GridSpec spec);

// Extracts the portals of a decomposition (exposed for tests and tooling).
std::vector<Portal> find_portals(const ByteGrid& base, const std::vector<std::string>& labels);

// Builds the portal navigation graph over the base map: one vertex per portal
// plus start ("s") and goal ("g"), and one edge per submap-interior connection
// between two of its vertices, costed by the metric length of the cell path.
// Several submaps connecting the same pair of portals yield parallel edges.
NavGraph build_nav_graph(const GridSpec& spec, const std::vector<Portal>& portals);

// What the robot has seen so far. `known` marks sensed cells; `obstacle` is
// meaningful only where `known` is set. Base walls are known a priori, so
// sensing only ever adds overlay surprises and confirms free space.
struct SenseState {
  ByteGrid known;
  ByteGrid obstacle;

  bool known_free(int x, int y) const { return known.at(x, y) != 0 && obstacle.at(x, y) == 0; }
  bool known_obstacle(int x, int y) const { return known.at(x, y) != 0 && obstacle.at(x, y) != 0; }
};

SenseState fresh_sense_state(const ByteGrid& base);

// Sweeps one full revolution of rays (one-degree spacing) from the center of
// `from`, marking every cell a ray crosses as known up to and including the
// first occupied cell, which ends the ray. Returns the number of cells newly
// marked known.
int sense_sweep(const ByteGrid& base, const ByteGrid& overlay, const GridCell& from,
                double r_max, SenseState& state);

// Cell-level route under the 8-connected metric (1 straight, sqrt(2)
// diagonal). Diagonal steps must not cut corners: both orthogonal neighbors
// have to be passable as well. `passable` is a raster with nonzero = usable.
struct CellPath {
  std::vector<GridCell> cells;
  double cost = 0.0;
};
std::optional<CellPath> cell_shortest_path(const ByteGrid& passable, const GridCell& from,
                                           const GridCell& to);

// Passability rasters over a submap region under current knowledge:
// optimistic keeps unknown base-free cells usable, confirmed keeps only
// known-free cells.
ByteGrid region_optimistic(const GridContext& ctx, const std::string& submap,
                           const SenseState& sense);
ByteGrid region_confirmed(const GridContext& ctx, const std::string& submap,
                          const SenseState& sense);

enum class Verdict { Unknown, Unblocked, Blocked };

// Judges one navigation edge from the current sensor picture. The query is
// only answered when the robot is inside the edge's submap or close enough
// (within r_max) to one of its endpoint anchors; otherwise the edge stays
// Unknown. The verdict chain: an endpoint anchor that cannot be free makes
// the edge Blocked; a confirmed-free cell path between the anchors makes it
// Unblocked; no possibly-free path left makes it Blocked; anything else stays
// Unknown.
Verdict resolve_edge(const GridContext& ctx, const SenseState& sense, const std::string& edge_id,
                     const GridCell& robot);

// Picks where to walk after the route through the current submap collapsed:
// a temporary vertex at the robot's cell is wired (straight-line costs) to
// every vertex of the submap still worth standing on, and the cheapest route
// to the goal over the graph minus the edges known blocked decides. Returns
// the vertex to walk to, or nullopt when nothing in the submap leads anywhere.
std::optional<std::string> replan_interior(const GridContext& ctx, const SenseState& sense,
                                           const GridCell& robot, const std::string& submap,
                                           const EdgeIdSet& known_blocked);

}  // namespace memnav
