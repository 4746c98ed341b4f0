#include "patrol/fixtures.hpp"

#include <utility>

#include "patrol/error.hpp"

namespace patrol::fixtures {
namespace {

// Builder for fixtures where most locations hold a single node.
struct Draft {
  std::vector<LocationDecl> locations;
  std::vector<NodeDecl> nodes;
  std::vector<EdgeDecl> edges;

  void single(const std::string& id, const std::string& label = {}) {
    locations.push_back(LocationDecl{id, label.empty() ? id : label});
    nodes.push_back(NodeDecl{id, id});
  }
  void edge(const std::string& from, const std::string& to, double p) {
    edges.push_back(EdgeDecl{from, to, p});
  }
  Strategy build(std::string name) {
    return Strategy::build(std::move(name), std::move(locations),
                           std::move(nodes), std::move(edges));
  }
};

}  // namespace

Strategy three_node_example() {
  Draft d;
  for (int i = 0; i < 3; ++i) {
    d.locations.push_back(LocationDecl{"L" + std::to_string(i), "L" + std::to_string(i)});
    d.nodes.push_back(NodeDecl{"n" + std::to_string(i), "L" + std::to_string(i)});
  }
  d.edge("n0", "n1", 1.0);
  d.edge("n1", "n1", 2.0 / 3.0);
  d.edge("n1", "n2", 1.0 / 3.0);
  d.edge("n2", "n0", 0.5);
  d.edge("n2", "n1", 0.5);
  return d.build("three-node-example");
}

Strategy two_cycle() {
  Draft d;
  d.single("a");
  d.single("b");
  d.edge("a", "b", 1.0);
  d.edge("b", "a", 1.0);
  return d.build("two-cycle");
}

Strategy uniform_complete(int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "uniform_complete needs k >= 1");
  Draft d;
  for (int i = 0; i < k; ++i) d.single("u" + std::to_string(i));
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      d.edge("u" + std::to_string(i), "u" + std::to_string(j), 1.0 / k);
    }
  }
  return d.build("uniform-complete-" + std::to_string(k));
}

Strategy airport() {
  Draft d;
  d.locations.push_back(LocationDecl{"C", "central hall"});
  d.nodes.push_back(NodeDecl{"C.main", "C"});
  d.nodes.push_back(NodeDecl{std::string(kAirportSpareNode), "C"});
  for (int k = 1; k <= 3; ++k) {
    const std::string hall = "H" + std::to_string(k);
    const std::string gate = "G" + std::to_string(k);
    d.locations.push_back(LocationDecl{hall, "hall " + std::to_string(k)});
    d.nodes.push_back(NodeDecl{hall + ".out", hall});
    d.nodes.push_back(NodeDecl{hall + ".in", hall});
    d.locations.push_back(LocationDecl{gate, "gate " + std::to_string(k)});
    d.nodes.push_back(NodeDecl{gate, gate});
  }
  for (int k = 1; k <= 3; ++k) {
    const std::string hall = "H" + std::to_string(k);
    const std::string gate = "G" + std::to_string(k);
    d.edge("C.main", hall + ".out", 1.0 / 3.0);
    d.edge(hall + ".out", gate, 1.0);
    d.edge(gate, hall + ".in", 1.0);
    d.edge(hall + ".in", "C.main", 0.99);
    d.edge(hall + ".in", std::string(kAirportSpareNode), 0.01);
  }
  // The spare node fans out over low-probability edges.
  d.edge(std::string(kAirportSpareNode), "H1.out", 0.96);
  d.edge(std::string(kAirportSpareNode), "H2.out", 0.02);
  d.edge(std::string(kAirportSpareNode), "H3.out", 0.02);
  return d.build("airport");
}

Strategy inner_loop_with_outer_ring() {
  Draft d;
  for (int i = 0; i < 4; ++i) d.single("in" + std::to_string(i));
  for (int i = 0; i < 6; ++i) d.single("out" + std::to_string(i));
  d.edge("in0", "in1", 0.999);
  d.edge("in0", "out0", 0.001);
  d.edge("in1", "in2", 1.0);
  d.edge("in2", "in3", 1.0);
  d.edge("in3", "in0", 1.0);
  for (int i = 0; i < 5; ++i) {
    d.edge("out" + std::to_string(i), "out" + std::to_string(i + 1), 1.0);
  }
  d.edge("out5", "in2", 1.0);
  return d.build("inner-loop-outer-ring");
}

Strategy office_floor() {
  constexpr int kJunctions = 5;
  constexpr int kOffices[kJunctions] = {2, 3, 2, 3, 2};
  Draft d;
  for (int j = 0; j < kJunctions; ++j) d.single("h" + std::to_string(j), "hallway junction");
  for (int j = 0; j < kJunctions; ++j) {
    const std::string junction = "h" + std::to_string(j);
    const std::string next = "h" + std::to_string((j + 1) % kJunctions);
    d.edge(junction, next, 0.5);
    for (int o = 0; o < kOffices[j]; ++o) {
      const std::string office = "o" + std::to_string(j) + "." + std::to_string(o);
      d.single(office, "office");
      d.edge(junction, office, 0.5 / kOffices[j]);
      d.edge(office, junction, 1.0);
    }
  }
  return d.build("office-floor");
}

Strategy two_disjoint_cycles() {
  Draft d;
  for (const char* id : {"a", "b", "c", "d"}) d.single(id);
  d.edge("a", "b", 1.0);
  d.edge("b", "a", 1.0);
  d.edge("c", "d", 1.0);
  d.edge("d", "c", 1.0);
  return d.build("two-disjoint-cycles");
}

std::vector<std::string> names() {
  return {"three-node", "two-cycle", "uniform-5",     "corridor",
          "memory-corridor", "airport", "outer-ring", "office",
          "two-disjoint-cycles"};
}

Strategy by_name(std::string_view name, int corridor_n) {
  if (name == "three-node") return three_node_example();
  if (name == "two-cycle") return two_cycle();
  if (name == "uniform-5") return uniform_complete(5);
  if (name == "corridor") return generate_corridor(corridor_n, false);
  if (name == "memory-corridor") return generate_corridor(corridor_n, true);
  if (name == "airport") return airport();
  if (name == "outer-ring") return inner_loop_with_outer_ring();
  if (name == "office") return office_floor();
  if (name == "two-disjoint-cycles") return two_disjoint_cycles();
  throw Error(ErrorCode::kUnknownReference,
              "unknown fixture '" + std::string(name) + "'", std::string(name));
}

}  // namespace patrol::fixtures
