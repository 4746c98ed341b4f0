#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace patrol {

using NodeIndex = std::size_t;
using LocationIndex = std::size_t;

/// Row sums of a stochastic row must be within this distance of 1.
inline constexpr double kStochasticTolerance = 1e-9;

struct Location {
  std::string id;
  std::string label;
  std::vector<NodeIndex> member_nodes;  // declaration order of the nodes
};

struct MemoryNode {
  std::string id;
  LocationIndex location = 0;
};

struct Edge {
  NodeIndex from = 0;
  NodeIndex to = 0;
  double p = 0.0;
};

// Raw declarations as they appear in a document, before validation.
struct LocationDecl {
  std::string id;
  std::string label;
};
struct NodeDecl {
  std::string id;
  std::string location;
};
struct EdgeDecl {
  std::string from;
  std::string to;
  double p = 0.0;
};

/// A patrolling strategy: locations, their memory nodes and a row-stochastic
/// transition structure on the memory nodes. Immutable once built.
class Strategy {
 public:
  /// Validates and builds. Edges with p == 0 are dropped, declaration order
  /// is kept. Throws patrol::Error on any violation.
  static Strategy build(std::string name, std::vector<LocationDecl> locations,
                        std::vector<NodeDecl> nodes,
                        std::vector<EdgeDecl> edges);

  const std::string& name() const noexcept { return name_; }
  std::span<const Location> locations() const noexcept { return locations_; }
  std::span<const MemoryNode> nodes() const noexcept { return nodes_; }
  std::span<const Edge> edges() const noexcept { return edges_; }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t location_count() const noexcept { return locations_.size(); }

  std::optional<NodeIndex> find_node(std::string_view id) const;
  std::optional<LocationIndex> find_location(std::string_view id) const;
  /// Throws UnknownReference.
  NodeIndex node_index(std::string_view id) const;
  LocationIndex location_index(std::string_view id) const;

  /// Indices into edges() of the node's outgoing edges, in edge order.
  std::span<const std::size_t> out_edges(NodeIndex node) const {
    return out_edges_[node];
  }
  std::optional<double> edge_probability(NodeIndex from, NodeIndex to) const;

  /// Non-fatal findings (currently: reducibility).
  std::span<const std::string> warnings() const noexcept { return warnings_; }
  bool irreducible() const noexcept { return irreducible_; }

 private:
  Strategy() = default;

  std::string name_;
  std::vector<Location> locations_;
  std::vector<MemoryNode> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> out_edges_;
  std::unordered_map<std::string, NodeIndex> node_by_id_;
  std::unordered_map<std::string, LocationIndex> location_by_id_;
  std::vector<std::string> warnings_;
  bool irreducible_ = true;
};

/// Dense row-stochastic matrix over memory nodes; row = from, column = to.
struct TransitionMatrix {
  std::vector<std::string> order;
  std::vector<double> entries;  // row-major, order.size()^2

  std::size_t size() const noexcept { return order.size(); }
  double operator()(std::size_t row, std::size_t col) const {
    return entries[row * order.size() + col];
  }
  double& operator()(std::size_t row, std::size_t col) {
    return entries[row * order.size() + col];
  }
  std::optional<std::size_t> index_of(std::string_view id) const;
};

/// Parses the JSON strategy document. Throws patrol::Error.
Strategy parse_strategy(std::string_view document);
/// Canonical JSON text; parse_strategy(serialize_strategy(s)) reproduces s.
std::string serialize_strategy(const Strategy& strategy);

TransitionMatrix to_matrix(const Strategy& strategy);

/// node id -> location id. Locations are created in first-appearance order
/// following the matrix order; labels equal ids.
using LocationMap = std::vector<std::pair<std::string, std::string>>;
Strategy from_matrix(const TransitionMatrix& matrix,
                     const LocationMap& location_map,
                     std::string name = "imported");

/// CSV import: header row and first column hold node ids.
TransitionMatrix parse_matrix_csv(std::string_view csv);
/// Two columns: node_id, location_id. A header row "node_id,location_id" is
/// skipped if present.
LocationMap parse_location_map_csv(std::string_view csv);

/// Corridor of n intersections between two ends. Without memory each
/// position is one node doing a reflecting random walk; with memory the
/// interior positions carry "heading right"/"heading left" nodes and the
/// patrol walks straight there and back.
Strategy generate_corridor(int intersections, bool with_memory);

/// Node ids along the straight walk from the left end to the right end.
std::vector<std::string> corridor_straight_path(int intersections,
                                                bool with_memory);

}  // namespace patrol
