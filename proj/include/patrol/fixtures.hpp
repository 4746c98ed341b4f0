#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "patrol/strategy.hpp"

// Small synthetic strategies with known analytic behavior. Used by the test
// suites, the `generate` CLI subcommand and the documentation.
namespace patrol::fixtures {

/// Three single-node locations L0..L2 (nodes n0..n2) with
/// P = [[0,1,0],[0,2/3,1/3],[1/2,1/2,0]].
Strategy three_node_example();

/// Two nodes swapping deterministically: [[0,1],[1,0]].
Strategy two_cycle();

/// k single-node locations, all transitions 1/k.
Strategy uniform_complete(int k);

/// Central location with a regular node and a spare node that is entered
/// only through 1 % edges; three halls lead from the center to gates and
/// back. Raising the edge threshold to 2 % leaves exactly the spare node
/// outside every loop.
Strategy airport();
inline constexpr std::string_view kAirportSpareNode = "C.spare";

/// Inner 4-cycle in0..in3 with a single 0.1 % exit from in0 into an outer
/// ring out0..out5 that returns to in2.
Strategy inner_loop_with_outer_ring();

/// Memory-less office floor: a one-way ring of junctions, each with two or
/// three side offices the patrol may step into and back out of.
Strategy office_floor();
inline constexpr std::string_view kOfficeStartNode = "h0";

/// Two disjoint 2-cycles: valid file, reducible chain.
Strategy two_disjoint_cycles();

/// All fixtures by name, for the CLI and parameterized tests.
std::vector<std::string> names();
Strategy by_name(std::string_view name, int corridor_n = 4);

}  // namespace patrol::fixtures
