#include "patrol/session.hpp"

#include <chrono>

#include "patrol/error.hpp"

namespace patrol {

Session::Session(std::string id, Strategy strategy, LayoutParams params)
    : id_(std::move(id)),
      strategy_(std::move(strategy)),
      matrix_(to_matrix(strategy_)),
      params_(params) {
  layout_ = std::make_shared<const LayoutState>(init_layout(*view_graph(), params_));
}

Session::~Session() {
  if (worker_.joinable()) {
    worker_.request_stop();
    worker_.join();
  }
}

std::shared_ptr<const StationaryDistribution> Session::stationary() const {
  std::lock_guard lock(cache_mutex_);
  if (!stationary_done_) {
    try {
      stationary_ = std::make_shared<const StationaryDistribution>(
          stationary_distribution(matrix_));
    } catch (const Error& e) {
      stationary_error_ = e;
    }
    stationary_done_ = true;
  }
  if (stationary_error_) throw *stationary_error_;
  return stationary_;
}

std::shared_ptr<const ViewGraph> Session::view_graph() const {
  std::shared_ptr<const StationaryDistribution> pi;
  try {
    pi = stationary();
  } catch (const Error&) {
    // Strategy view still works without flows.
  }
  std::lock_guard lock(cache_mutex_);
  if (!view_graph_) {
    view_graph_ = std::make_shared<const ViewGraph>(build_view(strategy_, view_, pi.get()));
  }
  return view_graph_;
}

std::shared_ptr<const LoopReport> Session::loops() const {
  auto graph = view_graph();
  std::lock_guard lock(cache_mutex_);
  if (!loops_) loops_ = std::make_shared<const LoopReport>(loop_report(*graph, view_));
  return loops_;
}

std::shared_ptr<const VisitDistributionSeries> Session::visits(NodeIndex start,
                                                               std::size_t horizon) const {
  std::lock_guard lock(cache_mutex_);
  auto& slot = visits_[{start, horizon}];
  if (!slot) {
    slot = std::make_shared<const VisitDistributionSeries>(
        visit_distribution(matrix_, strategy_.nodes()[start].id, horizon));
  }
  return slot;
}

std::shared_ptr<const LayoutState> Session::layout() const {
  std::lock_guard lock(layout_mutex_);
  return layout_;
}

void Session::invalidate_view() {
  std::lock_guard lock(cache_mutex_);
  view_graph_.reset();
  loops_.reset();
}

std::uint64_t Session::set_threshold(double threshold) {
  validate_threshold(threshold);
  view_.threshold = threshold;
  {
    std::lock_guard lock(cache_mutex_);
    loops_.reset();
  }
  return ++revision_;
}

std::uint64_t Session::toggle_location(LocationIndex location) {
  if (location >= strategy_.location_count()) {
    throw Error(ErrorCode::kUnknownReference, "unknown location");
  }
  if (!view_.open_locations.erase(location)) view_.open_locations.insert(location);
  invalidate_view();
  auto graph = view_graph();
  {
    std::lock_guard lock(layout_mutex_);
    LayoutState next = *layout_;
    sync_layout(next, *graph, params_);
    layout_ = std::make_shared<const LayoutState>(std::move(next));
  }
  return ++revision_;
}

std::uint64_t Session::set_rule(AggregationRule rule) {
  view_.rule = rule;
  invalidate_view();
  return ++revision_;
}

std::uint64_t Session::set_display_mode(DisplayMode mode) {
  if (mode == DisplayMode::kPathPreference) stationary();  // throws if undefined
  view_.display_mode = mode;
  {
    std::lock_guard lock(cache_mutex_);
    loops_.reset();
  }
  return ++revision_;
}

std::uint64_t Session::spawn(std::string_view start, std::size_t count,
                             std::size_t horizon, std::uint64_t seed) {
  ensemble_ = spawn_agents(strategy_, start, count, horizon, seed);
  cursor_ = 0;
  return ++revision_;
}

std::uint64_t Session::set_cursor(std::size_t t) {
  if (!ensemble_) throw Error(ErrorCode::kInvalidArgument, "no agents spawned");
  if (t > ensemble_->horizon()) {
    throw Error(ErrorCode::kCursorOutOfRange, "cursor beyond horizon", {},
                static_cast<double>(t), true);
  }
  cursor_ = t;
  return ++revision_;
}

std::uint64_t Session::step_layout(std::size_t iterations) {
  auto graph = view_graph();
  std::lock_guard lock(layout_mutex_);
  LayoutState state = *layout_;
  for (std::size_t i = 0; i < iterations; ++i) state = patrol::step_layout(state, *graph, params_);
  layout_ = std::make_shared<const LayoutState>(std::move(state));
  return ++revision_;
}

std::uint64_t Session::converge_layout(double tol, std::size_t max_iter, bool& converged) {
  auto graph = view_graph();
  std::lock_guard lock(layout_mutex_);
  auto result = run_until_converged(*layout_, *graph, params_, tol, max_iter);
  converged = result.converged;
  layout_ = std::make_shared<const LayoutState>(std::move(result.state));
  return ++revision_;
}

std::uint64_t Session::start_layout_worker() {
  if (!worker_.joinable()) {
    worker_ = std::jthread([this](std::stop_token stop) {
      using namespace std::chrono_literals;
      while (!stop.stop_requested()) {
        // Mutators hold the session lock while stopping the worker; never
        // block on it here.
        if (!mutex_.try_lock_shared()) {
          std::this_thread::sleep_for(2ms);
          continue;
        }
        auto graph = view_graph();
        {
          std::lock_guard lock(layout_mutex_);
          layout_ = std::make_shared<const LayoutState>(
              patrol::step_layout(*layout_, *graph, params_));
        }
        mutex_.unlock_shared();
        std::this_thread::sleep_for(16ms);
      }
    });
  }
  return ++revision_;
}

std::uint64_t Session::stop_layout_worker() {
  if (worker_.joinable()) {
    worker_.request_stop();
    worker_.join();
    worker_ = std::jthread();
  }
  return ++revision_;
}

std::shared_ptr<Session> SessionManager::create(Strategy strategy) {
  std::lock_guard lock(mutex_);
  std::string id = "s" + std::to_string(next_id_++);
  auto session = std::make_shared<Session>(id, std::move(strategy), params_);
  sessions_.emplace(id, session);
  return session;
}

std::shared_ptr<Session> SessionManager::get(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) {
    throw Error(ErrorCode::kSessionNotFound, "no session '" + id + "'", id);
  }
  return it->second;
}

bool SessionManager::erase(const std::string& id) {
  std::lock_guard lock(mutex_);
  return sessions_.erase(id) > 0;
}

}  // namespace patrol
