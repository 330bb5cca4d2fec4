// SPDX-License-Identifier: Apache-2.0
#include "kecr/server.hpp"

#include <spdlog/spdlog.h>

#include "kecr/errors.hpp"

namespace kecr {

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message, const std::string& field = {}) {
  nlohmann::json body{{"error", message}};
  if (!field.empty()) body["field"] = field;
  send_json(res, status, body);
}

}  // namespace

void register_routes(httplib::Server& server, SessionManager& sessions) {
  server.Post("/session", [&sessions](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"session_id", sessions.create()}});
  });

  server.Post(R"(/session/([^/]+)/utterance)", [&sessions](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error&) {
      send_error(res, 400, "body is not valid JSON", "body");
      return;
    }
    if (!body.is_object() || !body.contains("text")) {
      send_error(res, 400, "missing field \"text\"", "text");
      return;
    }
    if (!body["text"].is_string()) {
      send_error(res, 400, "field \"text\" must be a string", "text");
      return;
    }
    try {
      send_json(res, 200, sessions.utterance(id, body["text"].get<std::string>()));
    } catch (const NotFoundError& e) {
      send_error(res, 404, e.what());
    } catch (const std::exception& e) {
      spdlog::error("utterance failed: {}", e.what());
      send_error(res, 500, e.what());
    }
  });

  server.Get(R"(/session/([^/]+))", [&sessions](const httplib::Request& req, httplib::Response& res) {
    try {
      send_json(res, 200, sessions.describe(req.matches[1]));
    } catch (const NotFoundError& e) {
      send_error(res, 404, e.what());
    }
  });

  server.Delete(R"(/session/([^/]+))", [&sessions](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!sessions.close(id)) {
      send_error(res, 404, "unknown session: " + id);
      return;
    }
    send_json(res, 200, {{"session_id", id}, {"closed", true}});
  });
}

void serve(const Engine& engine, const std::string& host, int port) {
  SessionManager sessions(engine);
  httplib::Server server;
  register_routes(server, sessions);
  spdlog::info("listening on {}:{}", host, port);
  if (!server.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace kecr
