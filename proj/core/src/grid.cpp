#include "memnav/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "memnav/error.hpp"

namespace memnav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = 1.4142135623730951;

double cell_distance(const GridCell& a, const GridCell& b) {
  const double dx = static_cast<double>(a.x - b.x);
  const double dy = static_cast<double>(a.y - b.y);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

ByteGrid parse_occupancy(const std::vector<std::string>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw ParseError("occupancy grid needs at least one nonempty row");
  }
  const int width = static_cast<int>(rows.front().size());
  const int height = static_cast<int>(rows.size());
  ByteGrid grid(width, height);
  for (int y = 0; y < height; ++y) {
    if (static_cast<int>(rows[y].size()) != width) {
      throw ParseError("occupancy grid rows differ in width");
    }
    for (int x = 0; x < width; ++x) {
      const char c = rows[y][static_cast<std::size_t>(x)];
      if (c == '#') {
        grid.set(x, y, 1);
      } else if (c != '.') {
        throw ParseError(std::string("occupancy grid cell must be '.' or '#', got '") + c + "'");
      }
    }
  }
  return grid;
}

namespace {

GridCell cell_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw ValidationError(std::string(what) + " must be an [x, y] integer pair");
  }
  return GridCell{j[0].get<int>(), j[1].get<int>()};
}

}  // namespace

GridSpec load_grid_spec(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("grid spec JSON: ") + e.what());
  }
  for (const char* key : {"base", "labels", "start", "goal", "realizations", "pmf"}) {
    if (!doc.contains(key)) {
      throw ValidationError(std::string("grid spec is missing \"") + key + "\"");
    }
  }

  GridSpec spec;
  spec.base = parse_occupancy(doc["base"].get<std::vector<std::string>>());

  const auto label_rows = doc["labels"].get<std::vector<std::string>>();
  if (static_cast<int>(label_rows.size()) != spec.base.height) {
    throw ValidationError("label rows do not match the base grid height");
  }
  spec.cell_labels.resize(static_cast<std::size_t>(spec.base.width) * spec.base.height);
  for (int y = 0; y < spec.base.height; ++y) {
    if (static_cast<int>(label_rows[y].size()) != spec.base.width) {
      throw ValidationError("label rows do not match the base grid width");
    }
    for (int x = 0; x < spec.base.width; ++x) {
      const char c = label_rows[y][static_cast<std::size_t>(x)];
      if (spec.base.at(x, y) != 0) continue;  // walls carry no label
      if (c == '#' || c == '.') {
        throw ValidationError("free cell without a submap label at (" + std::to_string(x) + ", " +
                              std::to_string(y) + ")");
      }
      spec.cell_labels[static_cast<std::size_t>(spec.base.index(x, y))] = std::string(1, c);
    }
  }

  spec.start = cell_from_json(doc["start"], "start");
  spec.goal = cell_from_json(doc["goal"], "goal");
  for (const GridCell* c : {&spec.start, &spec.goal}) {
    if (!spec.base.in_bounds(c->x, c->y) || spec.base.at(c->x, c->y) != 0) {
      throw ValidationError("start and goal must sit on free base cells");
    }
  }

  spec.r_max = doc.value("r_max", 8.0);
  if (!(spec.r_max > 0.0)) throw ValidationError("r_max must be positive");

  for (const nlohmann::json& jr : doc["realizations"]) {
    std::vector<GridCell> obstacles;
    for (const nlohmann::json& jc : jr.at("obstacles")) {
      const GridCell c = cell_from_json(jc, "obstacle");
      if (!spec.base.in_bounds(c.x, c.y) || spec.base.at(c.x, c.y) != 0) {
        throw ValidationError("overlay obstacles must sit on free base cells");
      }
      if (c == spec.start) {
        throw ValidationError("an overlay obstacle may not occupy the start cell");
      }
      obstacles.push_back(c);
    }
    spec.realizations.push_back(std::move(obstacles));
  }
  if (spec.realizations.empty()) throw ValidationError("grid spec needs at least one realization");

  if (!doc["pmf"].is_array() || doc["pmf"].size() != spec.realizations.size()) {
    throw ValidationError("pmf must list one probability per realization");
  }
  double sum = 0.0;
  for (const nlohmann::json& jp : doc["pmf"]) {
    const double p = jp.get<double>();
    if (p < 0.0) throw ValidationError("pmf entries must be nonnegative");
    spec.pmf.push_back(p);
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("pmf must sum to 1, got " + std::to_string(sum));
  }
  return spec;
}

GridSpec load_grid_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open grid spec file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_grid_spec(buffer.str());
}

namespace {

// One facing pair of free cells across a label boundary.
struct BoundaryPair {
  GridCell a;  // carries the smaller label
  GridCell b;
  std::string label_a;
  std::string label_b;
};

int chebyshev(const GridCell& p, const GridCell& q) {
  return std::max(std::abs(p.x - q.x), std::abs(p.y - q.y));
}

}  // namespace

std::vector<Portal> find_portals(const ByteGrid& base, const std::vector<std::string>& labels) {
  const auto label_of = [&](int x, int y) -> const std::string& {
    return labels[static_cast<std::size_t>(base.index(x, y))];
  };

  std::vector<BoundaryPair> pairs;
  for (int y = 0; y < base.height; ++y) {
    for (int x = 0; x < base.width; ++x) {
      if (base.at(x, y) != 0) continue;
      for (const auto& [dx, dy] : {std::pair{1, 0}, std::pair{0, 1}}) {
        const int nx = x + dx;
        const int ny = y + dy;
        if (!base.in_bounds(nx, ny) || base.at(nx, ny) != 0) continue;
        const std::string& la = label_of(x, y);
        const std::string& lb = label_of(nx, ny);
        if (la == lb) continue;
        BoundaryPair p;
        if (la < lb) {
          p = BoundaryPair{GridCell{x, y}, GridCell{nx, ny}, la, lb};
        } else {
          p = BoundaryPair{GridCell{nx, ny}, GridCell{x, y}, lb, la};
        }
        pairs.push_back(std::move(p));
      }
    }
  }

  // Greedy union of facing pairs into maximal contiguous strips: two pairs of
  // the same label pair belong together when both their sides touch.
  std::vector<int> parent(pairs.size());
  std::iota(parent.begin(), parent.end(), 0);
  const std::function<int(int)> find = [&](int i) {
    while (parent[static_cast<std::size_t>(i)] != i) {
      parent[static_cast<std::size_t>(i)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
      i = parent[static_cast<std::size_t>(i)];
    }
    return i;
  };
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (std::size_t j = i + 1; j < pairs.size(); ++j) {
      if (pairs[i].label_a != pairs[j].label_a || pairs[i].label_b != pairs[j].label_b) continue;
      if (chebyshev(pairs[i].a, pairs[j].a) <= 1 && chebyshev(pairs[i].b, pairs[j].b) <= 1) {
        parent[static_cast<std::size_t>(find(static_cast<int>(i)))] =
            find(static_cast<int>(j));
      }
    }
  }

  std::map<int, std::vector<const BoundaryPair*>> groups;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    groups[find(static_cast<int>(i))].push_back(&pairs[i]);
  }

  std::vector<Portal> portals;
  for (const auto& [root, members] : groups) {
    (void)root;
    Portal portal;
    portal.label_a = members.front()->label_a;
    portal.label_b = members.front()->label_b;
    std::set<GridCell> side_a;
    std::set<GridCell> side_b;
    for (const BoundaryPair* p : members) {
      side_a.insert(p->a);
      side_b.insert(p->b);
    }
    portal.cells_a.assign(side_a.begin(), side_a.end());
    portal.cells_b.assign(side_b.begin(), side_b.end());

    double sx = 0.0;
    double sy = 0.0;
    int n = 0;
    for (const auto* side : {&portal.cells_a, &portal.cells_b}) {
      for (const GridCell& c : *side) {
        sx += c.x + 0.5;
        sy += c.y + 0.5;
        n += 1;
      }
    }
    portal.center_x = sx / n;
    portal.center_y = sy / n;

    const auto pick_anchor = [&](const std::vector<GridCell>& side) {
      GridCell best = side.front();
      double best_d = kInf;
      for (const GridCell& c : side) {  // sides are sorted, so ties keep the first
        const double dx = c.x + 0.5 - portal.center_x;
        const double dy = c.y + 0.5 - portal.center_y;
        const double d = dx * dx + dy * dy;
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      return best;
    };
    portal.anchor_a = pick_anchor(portal.cells_a);
    portal.anchor_b = pick_anchor(portal.cells_b);
    portals.push_back(std::move(portal));
  }

  std::sort(portals.begin(), portals.end(), [](const Portal& p, const Portal& q) {
    if (p.label_a != q.label_a) return p.label_a < q.label_a;
    if (p.label_b != q.label_b) return p.label_b < q.label_b;
    return p.cells_a.front() < q.cells_a.front();
  });
  std::map<std::pair<std::string, std::string>, int> counters;
  for (Portal& portal : portals) {
    const int k = counters[{portal.label_a, portal.label_b}]++;
    portal.id = "p_" + portal.label_a + portal.label_b + "_" + std::to_string(k);
  }
  return portals;
}

namespace {

// Region raster of one submap: its labeled cells plus every member cell of
// its portals, so routes may stand in the doorway on either side.
ByteGrid make_region(const GridSpec& spec, const std::vector<Portal>& portals,
                     const std::string& submap) {
  ByteGrid region(spec.base.width, spec.base.height);
  for (int y = 0; y < spec.base.height; ++y) {
    for (int x = 0; x < spec.base.width; ++x) {
      if (spec.base.at(x, y) == 0 && spec.label_at(GridCell{x, y}) == submap) {
        region.set(x, y, 1);
      }
    }
  }
  for (const Portal& portal : portals) {
    if (portal.label_a != submap && portal.label_b != submap) continue;
    for (const auto* side : {&portal.cells_a, &portal.cells_b}) {
      for (const GridCell& c : *side) {
        region.set(c.x, c.y, 1);
      }
    }
  }
  return region;
}

}  // namespace

NavGraph build_nav_graph(const GridSpec& spec, const std::vector<Portal>& portals) {
  std::vector<Vertex> vertices;
  for (const Portal& portal : portals) {
    Vertex v;
    v.id = portal.id;
    v.has_position = true;
    v.x = portal.center_x;
    v.y = portal.center_y;
    vertices.push_back(std::move(v));
  }
  vertices.push_back(Vertex{"s", true, spec.start.x + 0.5, spec.start.y + 0.5});
  vertices.push_back(Vertex{"g", true, spec.goal.x + 0.5, spec.goal.y + 0.5});

  std::set<std::string> submaps;
  for (const std::string& label : spec.cell_labels) {
    if (!label.empty()) submaps.insert(label);
  }

  std::vector<Edge> edges;
  for (const std::string& submap : submaps) {
    const ByteGrid region = make_region(spec, portals, submap);

    // Vertices reachable from inside this submap, with their standing cells.
    std::vector<std::pair<std::string, GridCell>> members;
    for (const Portal& portal : portals) {
      if (portal.label_a == submap) members.emplace_back(portal.id, portal.anchor_a);
      if (portal.label_b == submap) members.emplace_back(portal.id, portal.anchor_b);
    }
    if (spec.label_at(spec.start) == submap) members.emplace_back("s", spec.start);
    if (spec.label_at(spec.goal) == submap) members.emplace_back("g", spec.goal);
    std::sort(members.begin(), members.end());

    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        const auto path = cell_shortest_path(region, members[i].second, members[j].second);
        if (!path.has_value()) continue;
        Edge e;
        e.id = "e_" + submap + "_" + members[i].first + "_" + members[j].first;
        e.u = members[i].first;
        e.v = members[j].first;
        e.cost = std::max(path->cost, 1e-6);  // anchors may coincide; keep costs positive
        e.submap = submap;
        edges.push_back(std::move(e));
      }
    }
  }
  return NavGraph(std::move(vertices), std::move(edges));
}

GridCell GridContext::vertex_anchor(const std::string& vertex_id, const std::string& submap) const {
  if (vertex_id == start_vertex) return spec.start;
  if (vertex_id == goal_vertex) return spec.goal;
  for (const Portal& portal : portals) {
    if (portal.id != vertex_id) continue;
    if (portal.label_a == submap) return portal.anchor_a;
    if (portal.label_b == submap) return portal.anchor_b;
    throw ContractViolation("portal " + vertex_id + " does not touch submap " + submap);
  }
  throw ContractViolation("unknown vertex for anchoring: " + vertex_id);
}

GridContext build_grid_context(GridSpec spec) {
  GridContext ctx;
  ctx.spec = std::move(spec);
  ctx.portals = find_portals(ctx.spec.base, ctx.spec.cell_labels);
  ctx.graph = build_nav_graph(ctx.spec, ctx.portals);
  ctx.start_vertex = "s";
  ctx.goal_vertex = "g";

  std::set<std::string> submaps;
  for (const std::string& label : ctx.spec.cell_labels) {
    if (!label.empty()) submaps.insert(label);
  }
  for (const std::string& submap : submaps) {
    ctx.regions.emplace(submap, make_region(ctx.spec, ctx.portals, submap));
  }
  return ctx;
}

SenseState fresh_sense_state(const ByteGrid& base) {
  SenseState state;
  state.known = ByteGrid(base.width, base.height);
  state.obstacle = ByteGrid(base.width, base.height);
  // The base walls are the robot's prior map; only overlay surprises and the
  // confirmation of free space wait to be sensed.
  for (int y = 0; y < base.height; ++y) {
    for (int x = 0; x < base.width; ++x) {
      if (base.at(x, y) != 0) {
        state.known.set(x, y, 1);
        state.obstacle.set(x, y, 1);
      }
    }
  }
  return state;
}

int sense_sweep(const ByteGrid& base, const ByteGrid& overlay, const GridCell& from,
                double r_max, SenseState& state) {
  const auto occupied = [&](int x, int y) { return base.at(x, y) != 0 || overlay.at(x, y) != 0; };
  int newly_known = 0;
  const auto mark = [&](int x, int y) {
    if (state.known.at(x, y) == 0) {
      state.known.set(x, y, 1);
      newly_known += 1;
    }
    state.obstacle.set(x, y, occupied(x, y) ? 1 : 0);
  };

  const double ox = from.x + 0.5;
  const double oy = from.y + 0.5;
  mark(from.x, from.y);
  constexpr double kStep = 0.25;
  for (int deg = 0; deg < 360; ++deg) {
    const double theta = deg * 3.14159265358979323846 / 180.0;
    const double cx = std::cos(theta);
    const double cy = std::sin(theta);
    int last_x = from.x;
    int last_y = from.y;
    for (double t = kStep; t <= r_max; t += kStep) {
      const int x = static_cast<int>(std::floor(ox + t * cx));
      const int y = static_cast<int>(std::floor(oy + t * cy));
      if (x == last_x && y == last_y) continue;
      if (!base.in_bounds(x, y)) break;
      last_x = x;
      last_y = y;
      mark(x, y);
      if (occupied(x, y)) break;  // the ray ends on the first occupied cell
    }
  }
  return newly_known;
}

std::optional<CellPath> cell_shortest_path(const ByteGrid& passable, const GridCell& from,
                                           const GridCell& to) {
  if (!passable.in_bounds(from.x, from.y) || !passable.in_bounds(to.x, to.y)) return std::nullopt;
  if (passable.at(from.x, from.y) == 0 || passable.at(to.x, to.y) == 0) return std::nullopt;

  const int n = passable.width * passable.height;
  std::vector<double> dist(static_cast<std::size_t>(n), kInf);
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;

  const int src = passable.index(from.x, from.y);
  const int dst = passable.index(to.x, to.y);
  dist[static_cast<std::size_t>(src)] = 0.0;
  heap.emplace(0.0, src);

  // Fixed neighbor order plus the (distance, index) heap keying make the
  // returned route deterministic across runs.
  constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  constexpr int kDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

  while (!heap.empty()) {
    const auto [d, idx] = heap.top();
    heap.pop();
    if (d > dist[static_cast<std::size_t>(idx)]) continue;
    if (idx == dst) break;
    const int x = idx % passable.width;
    const int y = idx / passable.width;
    for (int k = 0; k < 8; ++k) {
      const int nx = x + kDx[k];
      const int ny = y + kDy[k];
      if (!passable.in_bounds(nx, ny) || passable.at(nx, ny) == 0) continue;
      const bool diagonal = kDx[k] != 0 && kDy[k] != 0;
      if (diagonal) {
        // No corner cutting: both orthogonal neighbors must be usable too.
        if (passable.at(x + kDx[k], y) == 0 || passable.at(x, y + kDy[k]) == 0) continue;
      }
      const double nd = d + (diagonal ? kSqrt2 : 1.0);
      const int nidx = passable.index(nx, ny);
      if (nd < dist[static_cast<std::size_t>(nidx)]) {
        dist[static_cast<std::size_t>(nidx)] = nd;
        parent[static_cast<std::size_t>(nidx)] = idx;
        heap.emplace(nd, nidx);
      }
    }
  }

  if (dist[static_cast<std::size_t>(dst)] == kInf) return std::nullopt;
  CellPath path;
  path.cost = dist[static_cast<std::size_t>(dst)];
  for (int idx = dst; idx != -1; idx = parent[static_cast<std::size_t>(idx)]) {
    path.cells.push_back(GridCell{idx % passable.width, idx / passable.width});
  }
  std::reverse(path.cells.begin(), path.cells.end());
  return path;
}

ByteGrid region_optimistic(const GridContext& ctx, const std::string& submap,
                           const SenseState& sense) {
  const ByteGrid& region = ctx.regions.at(submap);
  ByteGrid usable(region.width, region.height);
  for (int y = 0; y < region.height; ++y) {
    for (int x = 0; x < region.width; ++x) {
      if (region.at(x, y) != 0 && !sense.known_obstacle(x, y)) usable.set(x, y, 1);
    }
  }
  return usable;
}

ByteGrid region_confirmed(const GridContext& ctx, const std::string& submap,
                          const SenseState& sense) {
  const ByteGrid& region = ctx.regions.at(submap);
  ByteGrid usable(region.width, region.height);
  for (int y = 0; y < region.height; ++y) {
    for (int x = 0; x < region.width; ++x) {
      if (region.at(x, y) != 0 && sense.known_free(x, y)) usable.set(x, y, 1);
    }
  }
  return usable;
}

Verdict resolve_edge(const GridContext& ctx, const SenseState& sense, const std::string& edge_id,
                     const GridCell& robot) {
  const Edge& edge = ctx.graph.edge(edge_id);
  const GridCell a_u = ctx.vertex_anchor(edge.u, edge.submap);
  const GridCell a_v = ctx.vertex_anchor(edge.v, edge.submap);

  // Only judge what the robot can plausibly speak to: its own submap, or an
  // edge whose endpoint it stands near enough to see into.
  const bool inside = ctx.spec.label_at(robot) == edge.submap;
  const bool near_endpoint = cell_distance(robot, a_u) <= ctx.spec.r_max ||
                             cell_distance(robot, a_v) <= ctx.spec.r_max;
  if (!inside && !near_endpoint) return Verdict::Unknown;

  if (sense.known_obstacle(a_u.x, a_u.y) || sense.known_obstacle(a_v.x, a_v.y)) {
    return Verdict::Blocked;
  }
  const ByteGrid confirmed = region_confirmed(ctx, edge.submap, sense);
  if (cell_shortest_path(confirmed, a_u, a_v).has_value()) {
    return Verdict::Unblocked;
  }
  const ByteGrid optimistic = region_optimistic(ctx, edge.submap, sense);
  if (!cell_shortest_path(optimistic, a_u, a_v).has_value()) {
    return Verdict::Blocked;
  }
  return Verdict::Unknown;
}

std::optional<std::string> replan_interior(const GridContext& ctx, const SenseState& sense,
                                           const GridCell& robot, const std::string& submap,
                                           const EdgeIdSet& known_blocked) {
  const ByteGrid optimistic = region_optimistic(ctx, submap, sense);

  // Vertices of this submap the robot could still walk to, sorted for
  // deterministic temp-edge numbering.
  std::vector<std::pair<std::string, GridCell>> reachable;
  for (const Vertex& v : ctx.graph.vertices()) {
    GridCell anchor;
    if (v.id == ctx.start_vertex) {
      if (ctx.spec.label_at(ctx.spec.start) != submap) continue;
      anchor = ctx.spec.start;
    } else if (v.id == ctx.goal_vertex) {
      if (ctx.spec.label_at(ctx.spec.goal) != submap) continue;
      anchor = ctx.spec.goal;
    } else {
      bool touches = false;
      for (const Portal& portal : ctx.portals) {
        if (portal.id != v.id) continue;
        touches = portal.label_a == submap || portal.label_b == submap;
        break;
      }
      if (!touches) continue;
      anchor = ctx.vertex_anchor(v.id, submap);
    }
    if (optimistic.at(anchor.x, anchor.y) == 0) continue;
    if (!cell_shortest_path(optimistic, robot, anchor).has_value()) continue;
    reachable.emplace_back(v.id, anchor);
  }
  std::sort(reachable.begin(), reachable.end());
  if (reachable.empty()) return std::nullopt;

  // Temporary graph: the live position, wired straight-line to everything it
  // can still reach in this submap, on top of the learned edge picture.
  std::vector<Vertex> vertices = ctx.graph.vertices();
  std::vector<Edge> edges = ctx.graph.edges();
  const std::string robot_id = "__robot__";
  vertices.push_back(Vertex{robot_id, true, robot.x + 0.5, robot.y + 0.5});
  int counter = 0;
  for (const auto& [vertex_id, anchor] : reachable) {
    Edge e;
    e.id = "__t" + std::to_string(counter++);
    e.u = robot_id;
    e.v = vertex_id;
    e.cost = std::max(cell_distance(robot, anchor), 1e-6);
    e.submap = submap;
    edges.push_back(std::move(e));
  }
  const NavGraph temp(std::move(vertices), std::move(edges));

  EdgeMask mask = full_edge_mask(temp);
  for (const auto& id : known_blocked) {
    if (temp.has_edge(id)) mask[temp.edge_index(id)] = 0;
  }
  const auto route = shortest_path(temp, mask, robot_id, ctx.goal_vertex);
  if (!route.has_value() || route->vertices.size() < 2) return std::nullopt;
  return route->vertices[1];
}

}  // namespace memnav
