#pragma once

#include <cstddef>
#include <string>

#include "crbgate/scene_store.hpp"

namespace httplib {
class Server;
}

namespace crbgate {

struct ServiceOptions {
  /// Upper bound on Monte Carlo trials accepted by one request.
  std::size_t trial_cap = 10000;
  /// Directory of static planner assets served under /, if non-empty.
  std::string static_dir;
};

/// JSON-over-HTTP front end. Every computational endpoint decodes its
/// inputs, calls the matching library operation and encodes the result.
///
///   GET  /health
///   POST /scenes                      scene JSON -> record (201)
///   GET  /scenes/{id}
///   PUT  /scenes/{id}                 {"revision", "scene"}; 409 if stale
///   POST /scenes/{id}/heatmap         {"sigma"?, "grid": [nx, ny]}
///   POST /scenes/{id}/simulate        {"sigmas", "trials", "seed", "targets"?}
///   POST /scenes/{id}/coverage        {"alpha", "trials", "seed", "targets"?}
///   POST /scenes/{id}/probe           {"point", "sigma"?, "alpha"?, "n_points"?}
///   POST /scenes/{id}/gate?alpha=A    measurement JSONL -> gate JSONL
///
/// Errors are {"code", "message", "detail"} with 400 (validation), 404
/// (unknown scene), 409 (stale revision) or 422 (unlocalizable geometry).
class Service {
 public:
  Service(SceneStore& store, ServiceOptions options = {});

  void mount(httplib::Server& server);

 private:
  SceneStore& store_;
  ServiceOptions options_;
};

/// Blocks serving on 0.0.0.0:port until the process is stopped.
int run_server(const std::string& data_dir, int port, ServiceOptions options = {});

}  // namespace crbgate
