#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stop_token>
#include <string>
#include <thread>
#include <tuple>
#include <unordered_map>

#include "patrol/aggregation.hpp"
#include "patrol/chain.hpp"
#include "patrol/error.hpp"
#include "patrol/layout.hpp"
#include "patrol/reachability.hpp"
#include "patrol/simulation.hpp"
#include "patrol/strategy.hpp"

namespace patrol {

/// One loaded strategy plus everything the explorer derives from it.
///
/// Mutations take the session lock exclusively and bump the revision;
/// queries take it shared. Derived analyses are cached behind their own
/// mutex and dropped whenever an input they depend on changes. The layout
/// lives in a separately locked snapshot so a background worker can keep
/// stepping it while queries read.
class Session {
 public:
  Session(std::string id, Strategy strategy, LayoutParams params);
  ~Session();

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const noexcept { return id_; }
  const Strategy& strategy() const noexcept { return strategy_; }
  const TransitionMatrix& matrix() const noexcept { return matrix_; }

  std::shared_mutex& mutex() const { return mutex_; }

  // --- guarded by mutex() ---
  std::uint64_t revision() const noexcept { return revision_; }
  const ViewState& view() const noexcept { return view_; }

  std::uint64_t set_threshold(double threshold);
  std::uint64_t toggle_location(LocationIndex location);
  std::uint64_t set_rule(AggregationRule rule);
  std::uint64_t set_display_mode(DisplayMode mode);
  std::uint64_t spawn(std::string_view start, std::size_t count,
                      std::size_t horizon, std::uint64_t seed);
  std::uint64_t set_cursor(std::size_t t);
  std::uint64_t step_layout(std::size_t iterations);
  std::uint64_t converge_layout(double tol, std::size_t max_iter, bool& converged);
  std::uint64_t start_layout_worker();
  std::uint64_t stop_layout_worker();

  const std::optional<AgentEnsemble>& ensemble() const noexcept { return ensemble_; }
  std::size_t cursor() const noexcept { return cursor_; }
  bool layout_worker_running() const noexcept { return worker_.joinable(); }

  // --- cached derivations; safe under a shared lock ---
  /// Throws the stored error if the stationary distribution does not exist.
  std::shared_ptr<const StationaryDistribution> stationary() const;
  std::shared_ptr<const ViewGraph> view_graph() const;
  std::shared_ptr<const LoopReport> loops() const;
  std::shared_ptr<const VisitDistributionSeries> visits(NodeIndex start,
                                                        std::size_t horizon) const;
  std::shared_ptr<const LayoutState> layout() const;

 private:
  void invalidate_view();

  std::string id_;
  Strategy strategy_;
  TransitionMatrix matrix_;
  LayoutParams params_;

  mutable std::shared_mutex mutex_;
  std::uint64_t revision_ = 1;
  ViewState view_;
  std::optional<AgentEnsemble> ensemble_;
  std::size_t cursor_ = 0;

  mutable std::mutex cache_mutex_;
  mutable bool stationary_done_ = false;
  mutable std::shared_ptr<const StationaryDistribution> stationary_;
  mutable std::optional<Error> stationary_error_;
  mutable std::shared_ptr<const ViewGraph> view_graph_;
  mutable std::shared_ptr<const LoopReport> loops_;
  mutable std::map<std::pair<NodeIndex, std::size_t>,
                   std::shared_ptr<const VisitDistributionSeries>> visits_;

  mutable std::mutex layout_mutex_;
  std::shared_ptr<const LayoutState> layout_;
  std::jthread worker_;
};

class SessionManager {
 public:
  explicit SessionManager(LayoutParams params = {}) : params_(params) {}

  std::shared_ptr<Session> create(Strategy strategy);
  /// Throws SessionNotFound.
  std::shared_ptr<Session> get(const std::string& id) const;
  bool erase(const std::string& id);

 private:
  LayoutParams params_;
  mutable std::mutex mutex_;
  std::uint64_t next_id_ = 1;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace patrol
