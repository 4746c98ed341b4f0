#include "patrol/service.hpp"

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include <httplib.h>

#include "patrol/error.hpp"
#include "patrol/fixtures.hpp"

namespace patrol {
namespace {

using nlohmann::json;

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSessionNotFound:
    case ErrorCode::kUnknownReference:
      return 404;
    case ErrorCode::kMalformedDocument:
    case ErrorCode::kRowNotStochastic:
    case ErrorCode::kDuplicateId:
      return 422;
    case ErrorCode::kNotIrreducible:
    case ErrorCode::kNoConvergence:
    case ErrorCode::kUnreachable:
      return 409;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kCursorOutOfRange:
    case ErrorCode::kOrderMismatch:
    case ErrorCode::kIo:
      return 400;
    case ErrorCode::kCancelled:
      return 503;
  }
  return 500;
}

ServiceResponse error_response(int status, std::string_view code, const std::string& message,
                               const std::string& subject = {}) {
  json error = {{"code", code}, {"message", message}};
  if (!subject.empty()) error["subject"] = subject;
  return {status, {{"error", error}}};
}

ServiceResponse error_response(const Error& e) {
  ServiceResponse response =
      error_response(status_for(e.code()), error_code_name(e.code()), e.what(), e.subject());
  if (e.has_value()) response.body["error"]["value"] = e.value();
  return response;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream stream(path);
  std::string part;
  while (std::getline(stream, part, '/')) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

json point(Vec2 v) { return json::array({v.x, v.y}); }

std::string element_id(const Strategy& strategy, const ViewElement& element) {
  return element.kind == ElementKind::kNode ? strategy.nodes()[element.node].id
                                            : strategy.locations()[element.location].id;
}

std::shared_ptr<const StationaryDistribution> try_stationary(const Session& session) {
  try {
    return session.stationary();
  } catch (const Error&) {
    return nullptr;
  }
}

json graph_payload(const Session& session) {
  const Strategy& strategy = session.strategy();
  const ViewState& view = session.view();
  const auto graph = session.view_graph();
  const auto loops = session.loops();
  const auto layout = session.layout();
  const auto pi = try_stationary(session);

  std::vector<double> element_mass;
  if (pi) element_mass = aggregate_stationary(*pi, view, strategy);

  json open = json::array();
  for (LocationIndex loc : view.open_locations) open.push_back(strategy.locations()[loc].id);

  json elements = json::array();
  for (std::size_t i = 0; i < graph->elements.size(); ++i) {
    const ViewElement& element = graph->elements[i];
    json members = json::array();
    for (NodeIndex v : element.members) members.push_back(strategy.nodes()[v].id);
    elements.push_back({
        {"index", i},
        {"kind", element.kind == ElementKind::kNode ? "node" : "location"},
        {"id", element_id(strategy, element)},
        {"location", strategy.locations()[element.location].id},
        {"members", members},
        {"position", point(element.kind == ElementKind::kNode
                               ? layout->node_position[element.node]
                               : layout->location_position[element.location])},
        {"mass", pi ? json(element_mass[i]) : json(nullptr)},
        {"scc", loops->scc_id[i]},
        {"on_loop", static_cast<bool>(loops->on_loop[i])},
    });
  }

  std::vector<bool> surviving(graph->edges.size(), false);
  for (std::size_t e : loops->surviving_edges) surviving[e] = true;
  json edges = json::array();
  for (std::size_t e = 0; e < graph->edges.size(); ++e) {
    const ViewEdge& edge = graph->edges[e];
    json provenance = json::array();
    for (std::size_t k : edge.provenance) {
      const Edge& raw = strategy.edges()[k];
      provenance.push_back({{"from", strategy.nodes()[raw.from].id},
                            {"to", strategy.nodes()[raw.to].id},
                            {"p", raw.p}});
    }
    json entry = {{"from", edge.from},
                  {"to", edge.to},
                  {"weight", edge.weight},
                  {"internal", edge.internal},
                  {"surviving", static_cast<bool>(surviving[e])},
                  {"provenance", provenance}};
    if (graph->has_flows) {
      entry["flow"] = edge.flow;
      entry["relative_flow"] = edge.relative_flow;
    }
    entry["display_weight"] = graph->display_weight(edge, view.display_mode);
    edges.push_back(std::move(entry));
  }

  json nodes = json::array();
  for (NodeIndex v = 0; v < strategy.node_count(); ++v) {
    const std::size_t element = graph->node_element[v];
    nodes.push_back({{"id", strategy.nodes()[v].id},
                     {"location", strategy.locations()[strategy.nodes()[v].location].id},
                     {"element", element},
                     {"position", point(layout->node_position[v])},
                     {"mass", pi ? json(pi->mass[v]) : json(nullptr)},
                     {"on_loop", static_cast<bool>(loops->on_loop[element])}});
  }

  json locations = json::array();
  std::vector<double> loc_mass;
  if (pi) loc_mass = location_mass(*pi, strategy);
  for (LocationIndex loc = 0; loc < strategy.location_count(); ++loc) {
    locations.push_back({{"id", strategy.locations()[loc].id},
                         {"label", strategy.locations()[loc].label},
                         {"open", static_cast<bool>(graph->location_open[loc])},
                         {"position", point(layout->location_position[loc])},
                         {"mass", pi ? json(loc_mass[loc]) : json(nullptr)}});
  }

  return {{"revision", session.revision()},
          {"view",
           {{"rule", to_string(view.rule)},
            {"threshold", view.threshold},
            {"display_mode", to_string(view.display_mode)},
            {"open_locations", open}}},
          {"elements", elements},
          {"edges", edges},
          {"nodes", nodes},
          {"locations", locations},
          {"layout_iteration", layout->iteration}};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read '" + path + "'", path);
  std::ostringstream content;
  content << in.rdbuf();
  return content.str();
}

Strategy load_strategy(const json& body) {
  if (auto it = body.find("strategy"); it != body.end()) {
    return parse_strategy(it->is_string() ? it->get<std::string>() : it->dump());
  }
  if (auto it = body.find("path"); it != body.end()) {
    return parse_strategy(read_file(it->get<std::string>()));
  }
  if (auto it = body.find("fixture"); it != body.end()) {
    return fixtures::by_name(it->get<std::string>(), body.value("n", 4));
  }
  throw Error(ErrorCode::kInvalidArgument,
              "session body needs one of 'strategy', 'path' or 'fixture'");
}

// Start/target of a distribution query may name a node or a location; a
// location stands for a uniformly chosen member node.
std::vector<NodeIndex> resolve_members(const Strategy& strategy, const std::string& id) {
  if (auto node = strategy.find_node(id)) return {*node};
  if (auto loc = strategy.find_location(id)) return strategy.locations()[*loc].member_nodes;
  throw Error(ErrorCode::kUnknownReference, "unknown node or location '" + id + "'", id);
}

json distribution_payload(const Session& session, const json& body) {
  const Strategy& strategy = session.strategy();
  const std::string start = body.at("start").get<std::string>();
  const std::size_t horizon = body.value("horizon", kDefaultHorizon);
  if (horizon < 1) throw Error(ErrorCode::kInvalidArgument, "horizon must be >= 1");
  const auto sources = resolve_members(strategy, start);

  std::vector<std::vector<double>> rows(horizon, std::vector<double>(strategy.node_count(), 0.0));
  const double share = 1.0 / static_cast<double>(sources.size());
  for (NodeIndex source : sources) {
    const auto series = session.visits(source, horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      for (std::size_t j = 0; j < rows[t].size(); ++j) rows[t][j] += share * series->rows[t][j];
    }
  }

  json payload = {{"revision", session.revision()},
                  {"start", start},
                  {"horizon", horizon}};
  if (auto pi = try_stationary(session)) {
    json tv = json::array();
    for (const auto& row : rows) tv.push_back(total_variation(row, pi->mass));
    payload["tv_to_stationary"] = tv;
  }
  if (auto target = body.find("target"); target != body.end() && !target->is_null()) {
    const auto targets = resolve_members(strategy, target->get<std::string>());
    json series = json::array();
    for (const auto& row : rows) {
      double p = 0.0;
      for (NodeIndex v : targets) p += row[v];
      series.push_back(p);
    }
    payload["target"] = *target;
    payload["series"] = series;
  } else {
    json order = json::array();
    for (const auto& node : strategy.nodes()) order.push_back(node.id);
    payload["order"] = order;
    payload["rows"] = rows;
  }
  return payload;
}

json occupancy_payload(const Session& session) {
  const auto& ensemble = session.ensemble();
  if (!ensemble) throw Error(ErrorCode::kInvalidArgument, "no agents spawned");
  const auto counts = occupancy(*ensemble, session.cursor());
  json by_node = json::object();
  std::size_t total = 0;
  for (NodeIndex v = 0; v < counts.size(); ++v) {
    total += counts[v];
    if (counts[v] > 0) by_node[session.strategy().nodes()[v].id] = counts[v];
  }
  return {{"revision", session.revision()},
          {"cursor", session.cursor()},
          {"horizon", ensemble->horizon()},
          {"seed", ensemble->seed()},
          {"total", total},
          {"counts", by_node},
          {"single_agent",
           session.strategy().nodes()[ensemble->position(0, session.cursor())].id}};
}

json layout_payload(const Session& session) {
  const auto layout = session.layout();
  json locations = json::object();
  for (LocationIndex loc = 0; loc < session.strategy().location_count(); ++loc) {
    locations[session.strategy().locations()[loc].id] = point(layout->location_position[loc]);
  }
  json nodes = json::object();
  for (NodeIndex v = 0; v < session.strategy().node_count(); ++v) {
    nodes[session.strategy().nodes()[v].id] = point(layout->node_position[v]);
  }
  return {{"revision", session.revision()},
          {"iteration", layout->iteration},
          {"worker_running", session.layout_worker_running()},
          {"locations", locations},
          {"nodes", nodes}};
}

ServiceResponse route_session(Session& session, const std::string& method,
                              const std::vector<std::string>& rest, const json& body) {
  const std::string resource = rest.empty() ? "" : rest[0];
  auto route_is = [&](std::initializer_list<const char*> parts) {
    if (rest.size() != parts.size()) return false;
    std::size_t i = 0;
    for (const char* p : parts) {
      if (std::string_view(p) != "*" && rest[i] != p) return false;
      ++i;
    }
    return true;
  };

  if (method == "GET") {
    std::shared_lock lock(session.mutex());
    if (route_is({"graph"})) return {200, graph_payload(session)};
    if (route_is({"matrix"})) {
      const TransitionMatrix& m = session.matrix();
      json locations = json::array();
      for (const auto& node : session.strategy().nodes()) {
        locations.push_back(session.strategy().locations()[node.location].id);
      }
      return {200, {{"revision", session.revision()},
                    {"size", m.size()},
                    {"order", m.order},
                    {"locations", locations},
                    {"entries", m.entries}}};
    }
    if (route_is({"distribution"})) return {200, distribution_payload(session, body)};
    if (route_is({"agents", "occupancy"})) return {200, occupancy_payload(session)};
    if (route_is({"agents"})) {
      const auto& ensemble = session.ensemble();
      if (!ensemble) throw Error(ErrorCode::kInvalidArgument, "no agents spawned");
      json path = json::array();
      for (NodeIndex v : single_agent(*ensemble)) path.push_back(session.strategy().nodes()[v].id);
      return {200, {{"revision", session.revision()},
                    {"start", session.strategy().nodes()[ensemble->start()].id},
                    {"count", ensemble->count()},
                    {"horizon", ensemble->horizon()},
                    {"seed", ensemble->seed()},
                    {"cursor", session.cursor()},
                    {"single_agent_path", path}}};
    }
    if (route_is({"layout"})) return {200, layout_payload(session)};
    return error_response(404, "ROUTE_NOT_FOUND", "no such endpoint");
  }

  if (method != "POST") return error_response(405, "METHOD_NOT_ALLOWED", "unsupported method");

  // Queries that take a body.
  if (route_is({"distribution"})) {
    std::shared_lock lock(session.mutex());
    return {200, distribution_payload(session, body)};
  }

  std::unique_lock lock(session.mutex());
  if (route_is({"threshold"})) {
    const std::uint64_t revision = session.set_threshold(body.at("threshold").get<double>());
    return {200, {{"revision", revision}, {"threshold", session.view().threshold}}};
  }
  if (route_is({"location", "*", "toggle"})) {
    const LocationIndex loc = session.strategy().location_index(rest[1]);
    const std::uint64_t revision = session.toggle_location(loc);
    return {200, {{"revision", revision},
                  {"location", rest[1]},
                  {"open", session.view().open_locations.contains(loc)}}};
  }
  if (route_is({"rule"})) {
    const std::uint64_t revision =
        session.set_rule(parse_rule(body.at("rule").get<std::string>()));
    return {200, {{"revision", revision}, {"rule", to_string(session.view().rule)}}};
  }
  if (route_is({"mode"})) {
    const std::uint64_t revision =
        session.set_display_mode(parse_display_mode(body.at("mode").get<std::string>()));
    return {200, {{"revision", revision}, {"mode", to_string(session.view().display_mode)}}};
  }
  if (route_is({"agents"})) {
    std::uint64_t seed = 0;
    if (auto it = body.find("seed"); it != body.end() && !it->is_null()) {
      seed = it->get<std::uint64_t>();
    } else {
      std::random_device device;
      seed = (static_cast<std::uint64_t>(device()) << 32) | device();
    }
    session.spawn(body.at("start").get<std::string>(),
                  body.value("count", kDefaultAgentCount),
                  body.value("horizon", kDefaultAgentHorizon), seed);
    return {200, occupancy_payload(session)};
  }
  if (route_is({"agents", "occupancy"})) {
    session.set_cursor(body.at("t").get<std::size_t>());
    return {200, occupancy_payload(session)};
  }
  if (route_is({"layout", "step"})) {
    json extra = json::object();
    if (auto run = body.find("run"); run != body.end()) {
      run->get<bool>() ? session.start_layout_worker() : session.stop_layout_worker();
    } else if (body.value("converge", false)) {
      bool converged = false;
      session.converge_layout(body.value("tol", 0.01), body.value("max_iter", std::size_t{2000}),
                              converged);
      extra["converged"] = converged;
    } else {
      session.step_layout(body.value("iterations", std::size_t{1}));
    }
    json payload = layout_payload(session);
    payload.update(extra);
    return {200, payload};
  }
  return error_response(404, "ROUTE_NOT_FOUND", "no such endpoint");
}

}  // namespace

ServiceResponse ExplorerService::handle(const ServiceRequest& request) {
  try {
    const auto parts = split_path(request.path);
    if (parts.empty() || parts[0] != "session") {
      return error_response(404, "ROUTE_NOT_FOUND", "no such endpoint");
    }
    if (parts.size() == 1) {
      if (request.method != "POST") {
        return error_response(405, "METHOD_NOT_ALLOWED", "use POST to create a session");
      }
      auto session = sessions_.create(load_strategy(request.body));
      std::shared_lock lock(session->mutex());
      json warnings = json::array();
      for (const auto& w : session->strategy().warnings()) warnings.push_back(w);
      return {201, {{"session", session->id()},
                    {"revision", session->revision()},
                    {"name", session->strategy().name()},
                    {"irreducible", session->strategy().irreducible()},
                    {"warnings", warnings}}};
    }
    if (parts.size() == 2 && request.method == "DELETE") {
      if (!sessions_.erase(parts[1])) {
        throw Error(ErrorCode::kSessionNotFound, "no session '" + parts[1] + "'", parts[1]);
      }
      return {200, {{"deleted", parts[1]}}};
    }
    auto session = sessions_.get(parts[1]);
    return route_session(*session, request.method,
                         std::vector<std::string>(parts.begin() + 2, parts.end()),
                         request.body);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const nlohmann::json::exception& e) {
    return error_response(400, error_code_name(ErrorCode::kInvalidArgument),
                          std::string("bad request body: ") + e.what());
  }
}

namespace {

// Query parameters become body fields; numbers and booleans keep their type.
nlohmann::json query_to_body(const httplib::Params& params) {
  nlohmann::json body = nlohmann::json::object();
  for (const auto& [key, value] : params) {
    nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
    body[key] = (parsed.is_number() || parsed.is_boolean()) ? parsed : nlohmann::json(value);
  }
  return body;
}

void dispatch(ExplorerService& service, const httplib::Request& req, httplib::Response& res) {
  ServiceRequest request{req.method, req.path, query_to_body(req.params)};
  if (!req.body.empty()) {
    nlohmann::json parsed = nlohmann::json::parse(req.body, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
      res.status = 400;
      res.set_content(R"({"error":{"code":"INVALID_ARGUMENT","message":"body is not a JSON object"}})",
                      "application/json");
      return;
    }
    request.body.update(parsed);
  }
  const ServiceResponse response = service.handle(request);
  res.status = response.status;
  res.set_content(response.body.dump(), "application/json");
}

}  // namespace

bool serve_http(ExplorerService& service, const std::string& host, int port,
                std::stop_token stop) {
  httplib::Server server;
  auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
    dispatch(service, req, res);
  };
  server.Get(R"(/.*)", handler);
  server.Post(R"(/.*)", handler);
  server.Delete(R"(/.*)", handler);
  if (!server.bind_to_port(host, port)) return false;
  // stop() is a no-op until the accept loop runs, so wait for it before
  // registering the callback.
  std::thread loop([&server] { server.listen_after_bind(); });
  server.wait_until_ready();
  std::stop_callback on_stop(stop, [&server] { server.stop(); });
  loop.join();
  return true;
}

int default_port() {
  if (const char* env = std::getenv("PATROLSCOPE_PORT")) {
    const int port = std::atoi(env);
    if (port > 0 && port < 65536) return port;
  }
  return 8077;
}

}  // namespace patrol
