// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "httplib.h"

#include "kecr/engine.hpp"

namespace kecr {

/// Session routes:
///   POST   /session                 -> {"session_id"}
///   POST   /session/{id}/utterance  {"text"} -> decision JSON
///   GET    /session/{id}            -> transcript and state summary
///   DELETE /session/{id}            -> {"session_id", "closed": true}
/// Unknown sessions answer 404, malformed bodies 400 with {"error", "field"}.
void register_routes(httplib::Server& server, SessionManager& sessions);

/// Blocks serving on host:port until the server is stopped.
void serve(const Engine& engine, const std::string& host, int port);

}  // namespace kecr
