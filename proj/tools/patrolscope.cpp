#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "patrol/aggregation.hpp"
#include "patrol/error.hpp"
#include "patrol/fixtures.hpp"
#include "patrol/layout.hpp"
#include "patrol/report.hpp"
#include "patrol/rng.hpp"
#include "patrol/service.hpp"
#include "patrol/simulation.hpp"
#include "patrol/strategy.hpp"

namespace {

using patrol::ordered_json;

enum Exit : int { kOk = 0, kIoFailure = 1, kInvalid = 2, kAnalysisFailure = 3 };

int exit_code_for(patrol::ErrorCode code) {
  switch (code) {
    case patrol::ErrorCode::kIo:
      return kIoFailure;
    case patrol::ErrorCode::kMalformedDocument:
    case patrol::ErrorCode::kUnknownReference:
    case patrol::ErrorCode::kRowNotStochastic:
    case patrol::ErrorCode::kDuplicateId:
    case patrol::ErrorCode::kInvalidArgument:
    case patrol::ErrorCode::kCursorOutOfRange:
      return kInvalid;
    default:
      return kAnalysisFailure;
  }
}

// One JSON object per line on stderr.
void diagnose(const char* level, std::string_view code, const std::string& message,
              const std::string& subject = {}, const double* value = nullptr) {
  ordered_json line = {{"level", level}, {"code", code}};
  if (!subject.empty()) line["subject"] = subject;
  if (value) line["value"] = patrol::round_report(*value);
  line["message"] = message;
  std::cerr << line.dump() << '\n';
}

int report_error(const patrol::Error& e) {
  const double value = e.value();
  diagnose("error", patrol::error_code_name(e.code()), e.what(), e.subject(),
           e.has_value() ? &value : nullptr);
  return exit_code_for(e.code());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw patrol::Error(patrol::ErrorCode::kIo, "cannot read '" + path + "'", path);
  std::ostringstream content;
  content << in.rdbuf();
  return content.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) {
    throw patrol::Error(patrol::ErrorCode::kIo, "cannot write '" + path + "'", path);
  }
}

patrol::Strategy load(const std::string& path) {
  patrol::Strategy strategy = patrol::parse_strategy(read_file(path));
  for (const auto& warning : strategy.warnings()) {
    diagnose("warning", "NOT_IRREDUCIBLE", warning);
  }
  return strategy;
}

std::uint64_t draw_seed() {
  std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) | device();
}

ordered_json point(patrol::Vec2 v) {
  return ordered_json::array({patrol::round_report(v.x), patrol::round_report(v.y)});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"patrolscope: analysis of randomized patrolling strategies"};
  app.require_subcommand(1);

  std::string file;
  std::string out_path;
  std::uint64_t seed = 0;
  bool seed_given = false;

  auto* validate = app.add_subcommand("validate", "check a strategy file");
  validate->add_option("file", file, "strategy JSON")->required();

  auto* analyze = app.add_subcommand("analyze", "full analysis report");
  analyze->add_option("file", file, "strategy JSON")->required();
  analyze->add_option("--report", out_path, "write the report here instead of stdout");
  analyze->add_option("--seed", seed, "seed for the simulation cross-check (default 0)");

  std::string start;
  std::size_t count = patrol::kDefaultAgentCount;
  std::size_t horizon = patrol::kDefaultAgentHorizon;
  auto* simulate = app.add_subcommand("simulate", "occupancy trace of simulated agents");
  simulate->add_option("file", file, "strategy JSON")->required();
  simulate->add_option("--start", start, "start node id")->required();
  simulate->add_option("--count", count, "number of agents")->capture_default_str();
  simulate->add_option("--horizon", horizon, "steps per agent")->capture_default_str();
  auto* seed_option = simulate->add_option("--seed", seed, "seed (drawn and echoed if omitted)");

  auto* sweep = app.add_subcommand("sweep", "thresholds at which loops break");
  sweep->add_option("file", file, "strategy JSON")->required();

  std::size_t max_iter = 2000;
  double tol = 0.01;
  bool open_all = false;
  auto* layout = app.add_subcommand("layout", "run the force layout to rest");
  layout->add_option("file", file, "strategy JSON")->required();
  layout->add_option("--seed", seed, "initial placement seed")->capture_default_str();
  layout->add_option("--max-iter", max_iter, "iteration cap")->capture_default_str();
  layout->add_option("--tol", tol, "max displacement per step at rest")->capture_default_str();
  layout->add_flag("--open-all", open_all, "lay out with every location opened");

  auto* export_dot = app.add_subcommand("export-dot", "Graphviz rendering of the strategy");
  export_dot->add_option("file", file, "strategy JSON")->required();

  int port = patrol::default_port();
  auto* serve = app.add_subcommand("serve", "run the local session service");
  serve->add_option("--port", port, "TCP port (PATROLSCOPE_PORT overrides the default)")
      ->capture_default_str();

  std::string fixture;
  int corridor_n = 4;
  auto* generate = app.add_subcommand("generate", "write a built-in fixture as strategy JSON");
  generate->add_option("fixture", fixture, "fixture name")
      ->required()
      ->check(CLI::IsMember(patrol::fixtures::names()));
  generate->add_option("--n", corridor_n, "corridor intersections")->capture_default_str();

  std::string matrix_csv;
  std::string locations_csv;
  std::string import_name = "imported";
  auto* import = app.add_subcommand("import", "build a strategy from a raw transition matrix");
  import->add_option("matrix", matrix_csv, "CSV with a header row of node ids")->required();
  import->add_option("locations", locations_csv, "CSV of node_id,location_id")->required();
  import->add_option("--name", import_name, "strategy name")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }
  seed_given = seed_option->count() > 0;

  try {
    if (*validate) {
      const patrol::Strategy strategy = load(file);
      ordered_json summary = {{"valid", true},
                              {"name", strategy.name()},
                              {"locations", strategy.location_count()},
                              {"nodes", strategy.node_count()},
                              {"edges", strategy.edges().size()},
                              {"irreducible", strategy.irreducible()}};
      std::cout << summary.dump() << '\n';
      return kOk;
    }
    if (*analyze) {
      patrol::ReportOptions options;
      options.seed = seed;
      const auto report = patrol::build_report(load(file), options);
      write_output(out_path, report.dump(2) + "\n");
      return kOk;
    }
    if (*simulate) {
      const patrol::Strategy strategy = load(file);
      if (!seed_given) seed = draw_seed();
      const auto ensemble = patrol::spawn_agents(strategy, start, count, horizon, seed);
      ordered_json trace = ordered_json::array();
      for (std::size_t t = 0; t <= ensemble.horizon(); ++t) {
        const auto counts = patrol::occupancy(ensemble, t);
        ordered_json by_node = ordered_json::object();
        for (std::size_t v = 0; v < counts.size(); ++v) {
          if (counts[v] > 0) by_node[strategy.nodes()[v].id] = counts[v];
        }
        trace.push_back({{"t", t}, {"counts", by_node}});
      }
      ordered_json document = {{"strategy", strategy.name()},
                               {"start", start},
                               {"count", ensemble.count()},
                               {"horizon", ensemble.horizon()},
                               {"seed", ensemble.seed()},
                               {"rng", patrol::PatrolRng::kAlgorithm},
                               {"occupancy", trace}};
      std::cout << document.dump(2) << '\n';
      return kOk;
    }
    if (*sweep) {
      std::cout << patrol::build_sweep_table(load(file)).dump(2) << '\n';
      return kOk;
    }
    if (*layout) {
      const patrol::Strategy strategy = load(file);
      patrol::ViewState view;
      if (open_all) {
        for (patrol::LocationIndex loc = 0; loc < strategy.location_count(); ++loc) {
          view.open_locations.insert(loc);
        }
      }
      patrol::LayoutParams params;
      params.seed = seed;
      patrol::validate(params);
      const auto graph = patrol::build_view(strategy, view);
      const auto result = patrol::run_until_converged(patrol::init_layout(graph, params), graph,
                                                      params, tol, max_iter);
      ordered_json locations = ordered_json::object();
      for (patrol::LocationIndex loc = 0; loc < strategy.location_count(); ++loc) {
        locations[strategy.locations()[loc].id] = point(result.state.location_position[loc]);
      }
      ordered_json nodes = ordered_json::object();
      for (patrol::NodeIndex v = 0; v < strategy.node_count(); ++v) {
        nodes[strategy.nodes()[v].id] = point(result.state.node_position[v]);
      }
      ordered_json document = {{"strategy", strategy.name()},
                               {"seed", seed},
                               {"converged", result.converged},
                               {"iterations", result.iterations},
                               {"locations", locations},
                               {"nodes", nodes}};
      std::cout << document.dump(2) << '\n';
      return kOk;
    }
    if (*export_dot) {
      std::cout << patrol::export_dot(load(file));
      return kOk;
    }
    if (*serve) {
      patrol::ExplorerService service;
      std::fprintf(stderr, "serving on http://127.0.0.1:%d\n", port);
      if (!patrol::serve_http(service, "127.0.0.1", port)) {
        throw patrol::Error(patrol::ErrorCode::kIo,
                            "cannot listen on port " + std::to_string(port));
      }
      return kOk;
    }
    if (*generate) {
      std::cout << patrol::serialize_strategy(patrol::fixtures::by_name(fixture, corridor_n));
      return kOk;
    }
    if (*import) {
      const auto matrix = patrol::parse_matrix_csv(read_file(matrix_csv));
      const auto map = patrol::parse_location_map_csv(read_file(locations_csv));
      std::cout << patrol::serialize_strategy(patrol::from_matrix(matrix, map, import_name));
      return kOk;
    }
  } catch (const patrol::Error& e) {
    return report_error(e);
  }
  return kOk;
}
