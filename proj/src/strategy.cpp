#include "patrol/strategy.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "patrol/error.hpp"
#include "patrol/scc.hpp"

namespace patrol {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void malformed(const std::string& message) {
  throw Error(ErrorCode::kMalformedDocument, message);
}

const json& require(const json& object, const char* key, const char* where) {
  auto it = object.find(key);
  if (it == object.end()) {
    malformed(std::string(where) + ": missing field '" + key + "'");
  }
  return *it;
}

std::string require_string(const json& object, const char* key,
                           const char* where) {
  const json& value = require(object, key, where);
  if (!value.is_string()) {
    malformed(std::string(where) + ": field '" + key + "' must be a string");
  }
  return value.get<std::string>();
}

const json& require_array(const json& object, const char* key) {
  const json& value = require(object, key, "strategy");
  if (!value.is_array()) {
    malformed(std::string("strategy: field '") + key + "' must be an array");
  }
  return value;
}

}  // namespace

Strategy Strategy::build(std::string name, std::vector<LocationDecl> locations,
                         std::vector<NodeDecl> nodes,
                         std::vector<EdgeDecl> edges) {
  Strategy s;
  s.name_ = std::move(name);

  s.locations_.reserve(locations.size());
  for (auto& decl : locations) {
    if (decl.id.empty()) malformed("location with empty id");
    auto [it, inserted] =
        s.location_by_id_.emplace(decl.id, s.locations_.size());
    if (!inserted) {
      throw Error(ErrorCode::kDuplicateId, "duplicate location id '" + decl.id + "'",
                  decl.id);
    }
    s.locations_.push_back(Location{std::move(decl.id), std::move(decl.label), {}});
  }

  s.nodes_.reserve(nodes.size());
  for (auto& decl : nodes) {
    if (decl.id.empty()) malformed("memory node with empty id");
    auto loc = s.location_by_id_.find(decl.location);
    if (loc == s.location_by_id_.end()) {
      throw Error(ErrorCode::kUnknownReference,
                  "node '" + decl.id + "' names unknown location '" +
                      decl.location + "'",
                  decl.location);
    }
    auto [it, inserted] = s.node_by_id_.emplace(decl.id, s.nodes_.size());
    if (!inserted) {
      throw Error(ErrorCode::kDuplicateId, "duplicate node id '" + decl.id + "'",
                  decl.id);
    }
    s.locations_[loc->second].member_nodes.push_back(s.nodes_.size());
    s.nodes_.push_back(MemoryNode{std::move(decl.id), loc->second});
  }
  for (const auto& location : s.locations_) {
    if (location.member_nodes.empty()) {
      malformed("location '" + location.id + "' has no memory nodes");
    }
  }

  s.out_edges_.resize(s.nodes_.size());
  std::set<std::pair<NodeIndex, NodeIndex>> seen;
  for (const auto& decl : edges) {
    auto from = s.find_node(decl.from);
    if (!from) {
      throw Error(ErrorCode::kUnknownReference,
                  "edge names unknown node '" + decl.from + "'", decl.from);
    }
    auto to = s.find_node(decl.to);
    if (!to) {
      throw Error(ErrorCode::kUnknownReference,
                  "edge names unknown node '" + decl.to + "'", decl.to);
    }
    if (!std::isfinite(decl.p) || decl.p < 0.0 || decl.p > 1.0) {
      malformed("edge " + decl.from + "->" + decl.to +
                " has probability outside [0,1]");
    }
    if (!seen.emplace(*from, *to).second) {
      throw Error(ErrorCode::kDuplicateId,
                  "duplicate edge " + decl.from + "->" + decl.to, decl.from);
    }
    if (decl.p == 0.0) continue;
    s.out_edges_[*from].push_back(s.edges_.size());
    s.edges_.push_back(Edge{*from, *to, decl.p});
  }

  for (NodeIndex v = 0; v < s.nodes_.size(); ++v) {
    double sum = 0.0;
    for (std::size_t e : s.out_edges_[v]) sum += s.edges_[e].p;
    if (std::abs(sum - 1.0) > kStochasticTolerance) {
      std::ostringstream msg;
      msg.precision(12);
      msg << "outgoing probabilities of node '" << s.nodes_[v].id
          << "' sum to " << sum;
      throw Error(ErrorCode::kRowNotStochastic, msg.str(), s.nodes_[v].id, sum,
                  true);
    }
  }

  Adjacency graph(s.nodes_.size());
  for (const auto& edge : s.edges_) graph[edge.from].push_back(edge.to);
  const SccResult scc = strongly_connected_components(graph);
  if (scc.count() > 1) {
    s.irreducible_ = false;
    s.warnings_.push_back("strategy is not irreducible: " +
                          std::to_string(scc.count()) +
                          " strongly connected components");
  }
  return s;
}

std::optional<NodeIndex> Strategy::find_node(std::string_view id) const {
  auto it = node_by_id_.find(std::string(id));
  if (it == node_by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<LocationIndex> Strategy::find_location(std::string_view id) const {
  auto it = location_by_id_.find(std::string(id));
  if (it == location_by_id_.end()) return std::nullopt;
  return it->second;
}

NodeIndex Strategy::node_index(std::string_view id) const {
  if (auto index = find_node(id)) return *index;
  throw Error(ErrorCode::kUnknownReference,
              "unknown memory node '" + std::string(id) + "'", std::string(id));
}

LocationIndex Strategy::location_index(std::string_view id) const {
  if (auto index = find_location(id)) return *index;
  throw Error(ErrorCode::kUnknownReference,
              "unknown location '" + std::string(id) + "'", std::string(id));
}

std::optional<double> Strategy::edge_probability(NodeIndex from,
                                                 NodeIndex to) const {
  for (std::size_t e : out_edges_[from]) {
    if (edges_[e].to == to) return edges_[e].p;
  }
  return std::nullopt;
}

std::optional<std::size_t> TransitionMatrix::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] == id) return i;
  }
  return std::nullopt;
}

Strategy parse_strategy(std::string_view document) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    malformed(std::string("syntax error: ") + e.what());
  }
  if (!root.is_object()) malformed("strategy document must be an object");

  std::string name = require_string(root, "name", "strategy");

  std::vector<LocationDecl> locations;
  for (const auto& item : require_array(root, "locations")) {
    if (!item.is_object()) malformed("location entries must be objects");
    LocationDecl decl{require_string(item, "id", "location"), {}};
    auto label = item.find("label");
    if (label != item.end()) {
      if (!label->is_string()) malformed("location: 'label' must be a string");
      decl.label = label->get<std::string>();
    } else {
      decl.label = decl.id;
    }
    locations.push_back(std::move(decl));
  }

  std::vector<NodeDecl> nodes;
  for (const auto& item : require_array(root, "nodes")) {
    if (!item.is_object()) malformed("node entries must be objects");
    nodes.push_back(NodeDecl{require_string(item, "id", "node"),
                             require_string(item, "location", "node")});
  }

  std::vector<EdgeDecl> edges;
  for (const auto& item : require_array(root, "edges")) {
    if (!item.is_object()) malformed("edge entries must be objects");
    const json& p = require(item, "p", "edge");
    if (!p.is_number()) malformed("edge: 'p' must be a number");
    edges.push_back(EdgeDecl{require_string(item, "from", "edge"),
                             require_string(item, "to", "edge"),
                             p.get<double>()});
  }

  return Strategy::build(std::move(name), std::move(locations),
                         std::move(nodes), std::move(edges));
}

std::string serialize_strategy(const Strategy& strategy) {
  ordered_json root;
  root["name"] = strategy.name();
  root["locations"] = ordered_json::array();
  for (const auto& location : strategy.locations()) {
    root["locations"].push_back({{"id", location.id}, {"label", location.label}});
  }
  root["nodes"] = ordered_json::array();
  for (const auto& node : strategy.nodes()) {
    root["nodes"].push_back(
        {{"id", node.id}, {"location", strategy.locations()[node.location].id}});
  }
  root["edges"] = ordered_json::array();
  for (const auto& edge : strategy.edges()) {
    root["edges"].push_back({{"from", strategy.nodes()[edge.from].id},
                             {"to", strategy.nodes()[edge.to].id},
                             {"p", edge.p}});
  }
  return root.dump(2) + "\n";
}

TransitionMatrix to_matrix(const Strategy& strategy) {
  TransitionMatrix matrix;
  const std::size_t n = strategy.node_count();
  matrix.order.reserve(n);
  for (const auto& node : strategy.nodes()) matrix.order.push_back(node.id);
  matrix.entries.assign(n * n, 0.0);
  for (const auto& edge : strategy.edges()) matrix(edge.from, edge.to) = edge.p;
  return matrix;
}

Strategy from_matrix(const TransitionMatrix& matrix,
                     const LocationMap& location_map, std::string name) {
  const std::size_t n = matrix.size();
  if (matrix.entries.size() != n * n) {
    malformed("matrix entry count does not match its order");
  }
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += matrix(i, j);
    if (std::abs(sum - 1.0) > kStochasticTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "row '" << matrix.order[i] << "' sums to " << sum;
      throw Error(ErrorCode::kRowNotStochastic, msg.str(), matrix.order[i], sum,
                  true);
    }
  }

  std::unordered_map<std::string, std::string> location_of;
  for (const auto& [node, location] : location_map) {
    if (!matrix.index_of(node)) {
      throw Error(ErrorCode::kUnknownReference,
                  "location map names unknown node '" + node + "'", node);
    }
    if (!location_of.emplace(node, location).second) {
      throw Error(ErrorCode::kDuplicateId,
                  "node '" + node + "' mapped twice", node);
    }
  }

  std::vector<LocationDecl> locations;
  std::set<std::string> declared;
  std::vector<NodeDecl> nodes;
  for (const auto& id : matrix.order) {
    auto it = location_of.find(id);
    if (it == location_of.end()) {
      throw Error(ErrorCode::kUnknownReference,
                  "location map misses node '" + id + "'", id);
    }
    if (declared.insert(it->second).second) {
      locations.push_back(LocationDecl{it->second, it->second});
    }
    nodes.push_back(NodeDecl{id, it->second});
  }

  std::vector<EdgeDecl> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (matrix(i, j) != 0.0) {
        edges.push_back(EdgeDecl{matrix.order[i], matrix.order[j], matrix(i, j)});
      }
    }
  }
  return Strategy::build(std::move(name), std::move(locations),
                         std::move(nodes), std::move(edges));
}

namespace {

std::string trim(std::string_view text) {
  const char* ws = " \t\r\n\"";
  auto begin = text.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  auto end = text.find_last_not_of(ws);
  return std::string(text.substr(begin, end - begin + 1));
}

std::vector<std::vector<std::string>> split_csv(std::string_view csv) {
  std::vector<std::vector<std::string>> rows;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    auto eol = csv.find('\n', pos);
    if (eol == std::string_view::npos) eol = csv.size();
    std::string_view line = csv.substr(pos, eol - pos);
    pos = eol + 1;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      auto comma = line.find(',', start);
      cells.push_back(trim(line.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

double parse_probability(const std::string& cell) {
  if (cell.empty()) return 0.0;
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(cell, &consumed);
  } catch (const std::exception&) {
    malformed("matrix cell '" + cell + "' is not a number");
  }
  if (consumed != cell.size()) malformed("matrix cell '" + cell + "' is not a number");
  if (!(value >= 0.0 && value <= 1.0)) {
    malformed("matrix cell '" + cell + "' is outside [0,1]");
  }
  return value;
}

}  // namespace

TransitionMatrix parse_matrix_csv(std::string_view csv) {
  auto rows = split_csv(csv);
  if (rows.empty()) malformed("empty matrix CSV");
  TransitionMatrix matrix;
  const auto& header = rows.front();
  matrix.order.assign(header.begin() + 1, header.end());
  const std::size_t n = matrix.order.size();
  if (rows.size() != n + 1) {
    malformed("matrix CSV must have one row per column node");
  }
  std::set<std::string> unique(matrix.order.begin(), matrix.order.end());
  if (unique.size() != n) throw Error(ErrorCode::kDuplicateId, "duplicate node id in CSV header");
  matrix.entries.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = rows[i + 1];
    if (row.size() != n + 1) malformed("matrix CSV row " + std::to_string(i + 1) + " has wrong width");
    if (row.front() != matrix.order[i]) {
      malformed("row id '" + row.front() + "' does not match column order");
    }
    for (std::size_t j = 0; j < n; ++j) matrix(i, j) = parse_probability(row[j + 1]);
  }
  return matrix;
}

LocationMap parse_location_map_csv(std::string_view csv) {
  LocationMap map;
  auto rows = split_csv(csv);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 2) malformed("location map rows need exactly two columns");
    if (r == 0 && row[0] == "node_id" && row[1] == "location_id") continue;
    map.emplace_back(row[0], row[1]);
  }
  return map;
}

namespace {

std::string position_id(int i) { return "pos" + std::to_string(i); }

}  // namespace

Strategy generate_corridor(int intersections, bool with_memory) {
  if (intersections < 0) {
    throw Error(ErrorCode::kInvalidArgument, "corridor needs n >= 0");
  }
  const int n = intersections;
  const int last = n + 1;
  std::vector<LocationDecl> locations;
  std::vector<NodeDecl> nodes;
  std::vector<EdgeDecl> edges;
  for (int i = 0; i <= last; ++i) {
    std::string label = i == 0 ? "left end" : i == last ? "right end"
                                           : "intersection " + std::to_string(i);
    locations.push_back(LocationDecl{position_id(i), std::move(label)});
  }

  if (!with_memory) {
    for (int i = 0; i <= last; ++i) nodes.push_back(NodeDecl{position_id(i), position_id(i)});
    edges.push_back(EdgeDecl{position_id(0), position_id(1), 1.0});
    for (int i = 1; i < last; ++i) {
      edges.push_back(EdgeDecl{position_id(i), position_id(i - 1), 0.5});
      edges.push_back(EdgeDecl{position_id(i), position_id(i + 1), 0.5});
    }
    edges.push_back(EdgeDecl{position_id(last), position_id(last - 1), 1.0});
    return Strategy::build("corridor-" + std::to_string(n), std::move(locations),
                           std::move(nodes), std::move(edges));
  }

  auto right = [&](int i) {
    return i == 0 || i == last ? position_id(i) : position_id(i) + ".R";
  };
  auto left = [&](int i) {
    return i == 0 || i == last ? position_id(i) : position_id(i) + ".L";
  };
  nodes.push_back(NodeDecl{position_id(0), position_id(0)});
  for (int i = 1; i < last; ++i) {
    nodes.push_back(NodeDecl{right(i), position_id(i)});
    nodes.push_back(NodeDecl{left(i), position_id(i)});
  }
  nodes.push_back(NodeDecl{position_id(last), position_id(last)});
  for (int i = 0; i < last; ++i) edges.push_back(EdgeDecl{right(i), right(i + 1), 1.0});
  for (int i = last; i > 0; --i) edges.push_back(EdgeDecl{left(i), left(i - 1), 1.0});
  return Strategy::build("memory-corridor-" + std::to_string(n),
                         std::move(locations), std::move(nodes),
                         std::move(edges));
}

std::vector<std::string> corridor_straight_path(int intersections,
                                                bool with_memory) {
  std::vector<std::string> path;
  const int last = intersections + 1;
  for (int i = 0; i <= last; ++i) {
    if (with_memory && i != 0 && i != last) {
      path.push_back(position_id(i) + ".R");
    } else {
      path.push_back(position_id(i));
    }
  }
  return path;
}

}  // namespace patrol
