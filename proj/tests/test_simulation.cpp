#include <gtest/gtest.h>

#include <cstdint>
#include <random>

#include "oracles.hpp"
#include "patrol/chain.hpp"
#include "patrol/error.hpp"
#include "patrol/fixtures.hpp"
#include "patrol/rng.hpp"
#include "patrol/simulation.hpp"

namespace {

double worst_tv(const patrol::Strategy& s, const patrol::AgentEnsemble& ensemble) {
  const auto exact = patrol::visit_distribution(patrol::to_matrix(s), s.nodes()[ensemble.start()].id,
                                                ensemble.horizon());
  double worst = 0.0;
  for (std::size_t t = 1; t <= ensemble.horizon(); ++t) {
    const auto counts = patrol::occupancy(ensemble, t);
    std::vector<double> empirical(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
      empirical[i] = static_cast<double>(counts[i]) / static_cast<double>(ensemble.count());
    }
    worst = std::max(worst, patrol::total_variation(empirical, exact.rows[t - 1]));
  }
  return worst;
}

std::uint64_t fnv1a(const std::vector<std::size_t>& values, std::uint64_t hash) {
  for (std::size_t v : values) {
    for (int byte = 0; byte < 8; ++byte) {
      hash ^= (static_cast<std::uint64_t>(v) >> (8 * byte)) & 0xff;
      hash *= 0x100000001b3ull;
    }
  }
  return hash;
}

TEST(Rng, KnownOutputs) {
  // SplitMix64 reference values for seed 0.
  patrol::SplitMix64 mix(0);
  EXPECT_EQ(mix.next(), 0xe220a8397b1dcdafull);
  EXPECT_EQ(mix.next(), 0x6e789e6aa1b965f4ull);
  patrol::PatrolRng a(5, 1);
  patrol::PatrolRng b(5, 1);
  patrol::PatrolRng c(5, 2);
  const auto first = a.next();
  EXPECT_EQ(first, b.next());
  EXPECT_NE(first, c.next());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Simulation, StartAndShape) {
  const auto s = patrol::fixtures::three_node_example();
  const auto e = patrol::spawn_agents(s, "n2", 50, 20, 1);
  EXPECT_EQ(e.count(), 50u);
  EXPECT_EQ(e.horizon(), 20u);
  EXPECT_EQ(e.start(), 2u);
  const auto at_zero = patrol::occupancy(e, 0);
  EXPECT_EQ(at_zero[2], 50u);
  EXPECT_EQ(e.path(3).size(), 21u);
}

TEST(Simulation, DeterministicCycleIsAMovingPointMass) {
  const auto s = patrol::generate_corridor(3, true);
  const auto e = patrol::spawn_agents(s, "pos0", 64, 30, 123);
  const auto path = patrol::single_agent(e);
  for (std::size_t t = 0; t <= 30; ++t) {
    const auto counts = patrol::occupancy(e, t);
    EXPECT_EQ(counts[path[t]], 64u) << "t=" << t;
  }
  // 2n+2 = 8 nodes in the cycle.
  EXPECT_EQ(path[0], path[8]);
}

TEST(Simulation, PathsOnlyUseStrategyEdges) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = oracle::random_strategy(rng);
    const auto e = patrol::spawn_agents(s, s.nodes()[0].id, 100, 100, trial);
    for (std::size_t a = 0; a < e.count(); ++a) {
      for (std::size_t t = 0; t < e.horizon(); ++t) {
        ASSERT_GT(s.edge_probability(e.position(a, t), e.position(a, t + 1)), 0.0);
      }
    }
  }
}

TEST(Simulation, SameSeedSamePathsOtherSeedDiffers) {
  const auto s = patrol::fixtures::office_floor();
  const auto a = patrol::spawn_agents(s, "h0", 400, 100, 77);
  const auto b = patrol::spawn_agents(s, "h0", 400, 100, 77);
  const auto c = patrol::spawn_agents(s, "h0", 400, 100, 78);
  bool differs = false;
  for (std::size_t i = 0; i < 400; ++i) {
    ASSERT_EQ(a.path(i), b.path(i));
    differs = differs || a.path(i) != c.path(i);
  }
  EXPECT_TRUE(differs);
}

TEST(Simulation, AgentPathDoesNotDependOnEnsembleSize) {
  const auto s = patrol::fixtures::airport();
  const auto small = patrol::spawn_agents(s, "C.main", 10, 50, 4);
  const auto large = patrol::spawn_agents(s, "C.main", 5000, 50, 4);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(small.path(i), large.path(i));
}

TEST(Simulation, EmpiricalMatchesExactOnExample) {
  const auto s = patrol::fixtures::three_node_example();
  EXPECT_LT(worst_tv(s, patrol::spawn_agents(s, "n0", 10000, 100, 2024)), 0.05);
}

TEST(Simulation, GoldenOccupancy) {
  // Frozen from a reference run; guards the sampling contract across builds.
  const auto s = patrol::fixtures::office_floor();
  const auto e = patrol::spawn_agents(s, "h0", 1000, 100, 20240501);
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (std::size_t t = 0; t <= 100; ++t) hash = fnv1a(patrol::occupancy(e, t), hash);
  EXPECT_EQ(hash, PATROL_GOLDEN_OCCUPANCY_HASH);
}

TEST(Simulation, OfficeAgentsRevisitOffices) {
  // Without memory an agent can bounce back into an office it just left.
  const auto s = patrol::fixtures::office_floor();
  int seeds_with_revisit = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto path = patrol::single_agent(patrol::spawn_agents(s, "h0", 1, 100, seed));
    for (std::size_t t = 0; t + 2 < path.size(); ++t) {
      if (path[t] == path[t + 2] && s.nodes()[path[t]].id[0] == 'o') {
        ++seeds_with_revisit;
        break;
      }
    }
  }
  EXPECT_GE(seeds_with_revisit, 1);
}

TEST(Simulation, Errors) {
  const auto s = patrol::fixtures::two_cycle();
  EXPECT_THROW(patrol::spawn_agents(s, "zzz", 10, 10, 0), patrol::Error);
  const auto e = patrol::spawn_agents(s, "a", 10, 10, 0);
  try {
    patrol::occupancy(e, 11);
    FAIL();
  } catch (const patrol::Error& err) {
    EXPECT_EQ(err.code(), patrol::ErrorCode::kCursorOutOfRange);
  }
}

}  // namespace
