#include "memnav/environment.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "memnav/error.hpp"

namespace memnav {

namespace {

using nlohmann::json;

double require_number(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ValidationError(where + ": missing or non-numeric \"" + key + "\"");
  }
  return j[key].get<double>();
}

std::string require_string(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw ValidationError(where + ": missing or non-string \"" + key + "\"");
  }
  return j[key].get<std::string>();
}

}  // namespace

EnvironmentSpec load_environment(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("environment JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("environment document must be a JSON object");
  for (const char* key : {"vertices", "edges", "start", "goal", "realizations", "pmf"}) {
    if (!doc.contains(key)) {
      throw ValidationError(std::string("environment document: missing \"") + key + "\"");
    }
  }

  std::vector<Vertex> vertices;
  for (const json& jv : doc["vertices"]) {
    Vertex v;
    v.id = require_string(jv, "id", "vertex");
    const bool has_x = jv.contains("x");
    const bool has_y = jv.contains("y");
    if (has_x != has_y) {
      throw ValidationError("vertex " + v.id + ": x and y must be given together");
    }
    if (has_x) {
      v.has_position = true;
      v.x = require_number(jv, "x", "vertex " + v.id);
      v.y = require_number(jv, "y", "vertex " + v.id);
    }
    vertices.push_back(std::move(v));
  }

  std::vector<Edge> edges;
  for (const json& je : doc["edges"]) {
    Edge e;
    e.id = require_string(je, "id", "edge");
    e.u = require_string(je, "u", "edge " + e.id);
    e.v = require_string(je, "v", "edge " + e.id);
    e.cost = require_number(je, "cost", "edge " + e.id);
    if (je.contains("submap") && !je["submap"].is_null()) {
      e.submap = je["submap"].get<std::string>();
    }
    edges.push_back(std::move(e));
  }

  EnvironmentSpec spec;
  spec.graph = NavGraph(std::move(vertices), std::move(edges));  // validates ids, costs, endpoints
  spec.start = doc["start"].get<std::string>();
  spec.goal = doc["goal"].get<std::string>();
  if (!spec.graph.has_vertex(spec.start)) throw ValidationError("start is not a vertex: " + spec.start);
  if (!spec.graph.has_vertex(spec.goal)) throw ValidationError("goal is not a vertex: " + spec.goal);

  for (const json& jr : doc["realizations"]) {
    if (!jr.contains("unblocked") || !jr["unblocked"].is_array()) {
      throw ValidationError("realization: missing \"unblocked\" array");
    }
    Realization real;
    for (const json& je : jr["unblocked"]) {
      const std::string id = je.get<std::string>();
      if (!spec.graph.has_edge(id)) {
        throw ValidationError("realization names unknown edge: " + id);
      }
      real.unblocked.insert(id);
    }
    spec.realizations.push_back(std::move(real));
  }
  if (spec.realizations.empty()) throw ValidationError("environment needs at least one realization");

  for (const json& jp : doc["pmf"]) {
    if (!jp.is_number()) throw ValidationError("pmf entries must be numbers");
    const double p = jp.get<double>();
    if (p < 0.0) throw ValidationError("pmf entries must be nonnegative");
    spec.pmf.push_back(p);
  }
  if (spec.pmf.size() != spec.realizations.size()) {
    throw ValidationError("pmf length must equal the number of realizations");
  }
  double sum = 0.0;
  for (double p : spec.pmf) sum += p;
  if (std::abs(sum - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "pmf must sum to 1 within 1e-9 (got " << sum << ")";
    throw ValidationError(msg.str());
  }
  return spec;
}

EnvironmentSpec load_environment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open environment file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_environment(buffer.str());
}

std::string environment_to_json(const EnvironmentSpec& spec) {
  json doc;
  doc["vertices"] = json::array();
  for (const Vertex& v : spec.graph.vertices()) {
    json jv{{"id", v.id}};
    if (v.has_position) {
      jv["x"] = v.x;
      jv["y"] = v.y;
    }
    doc["vertices"].push_back(jv);
  }
  doc["edges"] = json::array();
  for (const Edge& e : spec.graph.edges()) {
    json je{{"id", e.id}, {"u", e.u}, {"v", e.v}, {"cost", e.cost}};
    if (!e.submap.empty()) je["submap"] = e.submap;
    doc["edges"].push_back(je);
  }
  doc["start"] = spec.start;
  doc["goal"] = spec.goal;
  doc["realizations"] = json::array();
  for (const Realization& r : spec.realizations) {
    doc["realizations"].push_back(json{{"unblocked", r.unblocked}});
  }
  doc["pmf"] = spec.pmf;
  return doc.dump(2) + "\n";
}

int sample_index(const std::vector<double>& pmf, Rng& rng) {
  const double u = rng.canonical();
  double cum = 0.0;
  int last_positive = -1;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    if (pmf[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    cum += pmf[i];
    if (u < cum) return static_cast<int>(i);
  }
  if (last_positive < 0) throw ValidationError("pmf has no positive mass");
  return last_positive;  // guards against cum < 1 from rounding
}

int sample_realization(const EnvironmentSpec& spec, Rng& rng) {
  return sample_index(spec.pmf, rng);
}

std::map<std::string, EdgeState> sense_incident(const Realization& real, const NavGraph& graph,
                                                const std::string& vertex_id) {
  std::map<std::string, EdgeState> out;
  for (int ei : graph.incident(graph.vertex_index(vertex_id))) {
    const Edge& e = graph.edges()[ei];
    out[e.id] = real.is_unblocked(e.id) ? EdgeState::Unblocked : EdgeState::Blocked;
  }
  return out;
}

}  // namespace memnav
