#include "crbgate/service.hpp"

#include <httplib.h>

#include <iostream>
#include <sstream>

#include "crbgate/errors.hpp"
#include "crbgate/io.hpp"
#include "crbgate/montecarlo_sim.hpp"
#include "crbgate/search_gate.hpp"

namespace crbgate {

using nlohmann::json;

namespace {

// Raised inside handlers; converted to the JSON error envelope.
struct HttpError {
  int status;
  std::string code;
  std::string message;
  json detail = json::object();
};

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SingularFim:
    case ErrorKind::InsufficientAnchors:
    case ErrorKind::DegenerateDistance:
    case ErrorKind::BehindCamera:
    case ErrorKind::RegionOutsideImage:
      return 422;
    default:
      return 400;
  }
}

json detail_for(const Error& e) {
  if (const auto* s = dynamic_cast<const SingularFimError*>(&e)) {
    return {{"eigenvalues", json::array({s->eigenvalues()[0], s->eigenvalues()[1]})}};
  }
  if (const auto* d = dynamic_cast<const DegenerateDistanceError*>(&e)) {
    return {{"anchor_id", d->anchor_id()}, {"distance", d->distance()}};
  }
  return json::object();
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const HttpError& e) {
  send_json(res, e.status, {{"code", e.code}, {"message", e.message}, {"detail", e.detail}});
}

template <typename Handler>
httplib::Server::Handler guarded(Handler&& h) {
  return [h = std::forward<Handler>(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const HttpError& e) {
      send_error(res, e);
    } catch (const RevisionConflict& e) {
      send_error(res, {409, "stale_revision", e.what(), {{"current_revision", e.current()}}});
    } catch (const Error& e) {
      send_error(res, {status_for(e.kind()), std::string(to_string(e.kind())), e.what(), detail_for(e)});
    } catch (const json::exception& e) {
      send_error(res, {400, "parse_error", e.what()});
    } catch (const std::exception& e) {
      send_error(res, {500, "internal", e.what()});
    }
  };
}

json parse_body(const httplib::Request& req) {
  try {
    return req.body.empty() ? json::object() : json::parse(req.body);
  } catch (const json::exception& e) {
    throw HttpError{400, "parse_error", std::string("request body is not JSON: ") + e.what()};
  }
}

template <typename T>
T field(const json& body, const char* name, T fallback) {
  if (!body.contains(name)) return fallback;
  try {
    return body.at(name).get<T>();
  } catch (const json::exception&) {
    throw HttpError{400, "invalid_argument", std::string("field '") + name + "' has the wrong type"};
  }
}

template <typename T>
T required(const json& body, const char* name) {
  if (!body.contains(name)) {
    throw HttpError{400, "invalid_argument", std::string("missing field '") + name + "'"};
  }
  return field<T>(body, name, T{});
}

std::vector<Vec2> targets_from(const json& body, const Scene& scene) {
  if (!body.contains("targets")) return default_targets(scene.bounds);
  std::vector<Vec2> out;
  for (const auto& t : body.at("targets")) {
    if (!t.is_array() || t.size() != 2) {
      throw HttpError{400, "invalid_argument", "targets must be [[x, y], ...]"};
    }
    out.emplace_back(t.at(0).get<double>(), t.at(1).get<double>());
  }
  return out;
}

}  // namespace

Service::Service(SceneStore& store, ServiceOptions options) : store_(store), options_(std::move(options)) {}

void Service::mount(httplib::Server& server) {
  auto load = [this](const httplib::Request& req) {
    const std::string id = req.matches[1];
    auto rec = store_.get(id);
    if (!rec) throw HttpError{404, "not_found", "unknown scene '" + id + "'"};
    return std::pair{*rec, io::scene_from_json(rec->scene)};
  };
  auto check_trials = [this](std::size_t trials) {
    if (trials < 1 || trials > options_.trial_cap) {
      throw HttpError{400, "invalid_argument",
                      "trials must be in [1, " + std::to_string(options_.trial_cap) + "]",
                      {{"trial_cap", options_.trial_cap}}};
    }
  };

  server.Get("/health", guarded([](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}});
  }));

  server.Post("/scenes", guarded([this](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 201, to_json(store_.create(parse_body(req))));
  }));

  server.Get(R"(/scenes/([^/]+))", guarded([load](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, to_json(load(req).first));
  }));

  server.Put(R"(/scenes/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const auto revision = required<std::uint64_t>(body, "revision");
    if (!body.contains("scene")) throw HttpError{400, "invalid_argument", "missing field 'scene'"};
    const std::string id = req.matches[1];
    auto rec = store_.update(id, body.at("scene"), revision);
    if (!rec) throw HttpError{404, "not_found", "unknown scene '" + id + "'"};
    send_json(res, 200, to_json(*rec));
  }));

  server.Post(R"(/scenes/([^/]+)/heatmap)",
              guarded([load](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                auto [rec, scene] = load(req);
                if (body.contains("sigma")) scene = scene.with_sigma(body.at("sigma").get<double>());
                const auto grid = field<std::vector<std::size_t>>(body, "grid", {40, 40});
                if (grid.size() != 2) throw HttpError{400, "invalid_argument", "grid must be [nx, ny]"};
                json out = io::to_json(crb_heatmap(scene, grid[0], grid[1]));
                out["sigma"] = scene.noise.sigma();
                send_json(res, 200, out);
              }));

  server.Post(R"(/scenes/([^/]+)/simulate)",
              guarded([load, check_trials](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                const auto [rec, scene] = load(req);
                const auto sigmas = required<std::vector<double>>(body, "sigmas");
                const auto trials = required<std::size_t>(body, "trials");
                const auto seed = field<std::uint64_t>(body, "seed", 0);
                check_trials(trials);
                const auto targets = targets_from(body, scene);
                const SimReport report = run_mse(scene, sigmas, trials, targets, seed);
                for (const auto& row : report.per_sigma) {
                  if (row.failures == row.trials) {
                    throw HttpError{422, "unlocalizable", "every trial failed for this geometry",
                                    {{"sigma", row.sigma}}};
                  }
                }
                send_json(res, 200, io::to_json(report));
              }));

  server.Post(R"(/scenes/([^/]+)/coverage)",
              guarded([load, check_trials](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                const auto [rec, scene] = load(req);
                const auto alpha = field<double>(body, "alpha", 0.05);
                const auto trials = required<std::size_t>(body, "trials");
                const auto seed = field<std::uint64_t>(body, "seed", 0);
                check_trials(trials);
                const auto cov = run_coverage(scene, alpha, trials, targets_from(body, scene), seed);
                if (cov.failures == cov.trials) {
                  throw HttpError{422, "unlocalizable", "every trial failed for this geometry",
                                  {{"failures", cov.failures}}};
                }
                send_json(res, 200,
                          {{"alpha", alpha},
                           {"coverage", cov.fraction},
                           {"trials", cov.trials},
                           {"failures", cov.failures},
                           {"seed", seed}});
              }));

  server.Post(R"(/scenes/([^/]+)/probe)",
              guarded([load](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                auto [rec, scene] = load(req);
                if (body.contains("sigma")) scene = scene.with_sigma(body.at("sigma").get<double>());
                const auto pt = required<std::vector<double>>(body, "point");
                if (pt.size() != 2) throw HttpError{400, "invalid_argument", "point must be [x, y]"};
                const auto alpha = field<double>(body, "alpha", 0.05);
                const auto n_points = field<std::size_t>(body, "n_points", kDefaultBoundaryPoints);
                const Vec2 p(pt[0], pt[1]);
                const Fim2 f = fim(jacobian(scene.anchors, TargetState{p, 0.0}),
                                   scene_noise_information(scene));
                const auto e = confidence_ellipse(p, f, alpha);
                json boundary = json::array();
                for (const auto& q : ellipse_boundary(e, n_points)) boundary.push_back({q.x(), q.y()});
                json cams = json::array();
                const std::array<double, 2> z_levels{0.0, scene.person_height};
                for (const auto& cam : scene.cameras) {
                  try {
                    const auto region = project_region(cam, e, z_levels, n_points);
                    json poly = json::array();
                    for (const auto& q : region.polygon) poly.push_back({q.x(), q.y()});
                    cams.push_back({{"camera_id", cam.id()},
                                    {"polygon", poly},
                                    {"box", {region.box.x_min, region.box.y_min, region.box.x_max, region.box.y_max}},
                                    {"clipped", region.box.clipped},
                                    {"error", nullptr}});
                  } catch (const Error& err) {
                    cams.push_back({{"camera_id", cam.id()},
                                    {"error", {{"kind", std::string(to_string(err.kind()))}, {"message", err.what()}}}});
                  }
                }
                send_json(res, 200,
                          {{"point", {p.x(), p.y()}},
                           {"sigma", scene.noise.is_gaussian() ? json(scene.noise.sigma()) : json(nullptr)},
                           {"best_rmse_m", best_rmse(f)},
                           {"ellipse", io::to_json(e)},
                           {"boundary", boundary},
                           {"cameras", cams}});
              }));

  server.Post(R"(/scenes/([^/]+)/gate)",
              guarded([load](const httplib::Request& req, httplib::Response& res) {
                const auto [rec, scene] = load(req);
                double alpha = 0.05;
                if (req.has_param("alpha")) {
                  try {
                    alpha = std::stod(req.get_param_value("alpha"));
                  } catch (const std::exception&) {
                    throw HttpError{400, "invalid_argument", "alpha must be a number"};
                  }
                }
                chi2_quantile(alpha);
                std::istringstream in(req.body);
                auto frames = std::make_shared<std::vector<MeasurementFrame>>(io::read_frames_jsonl(in));
                for (std::size_t k = 1; k < frames->size(); ++k) {
                  if ((*frames)[k].timestamp < (*frames)[k - 1].timestamp) {
                    throw Error(ErrorKind::StreamOrderViolation,
                                "frame " + std::to_string(k) + " has a decreasing timestamp");
                  }
                }
                auto stream_scene = std::make_shared<Scene>(scene);
                auto gate = std::make_shared<GateStream>(*stream_scene, alpha, stream_scene->estimator_config());
                auto next = std::make_shared<std::size_t>(0);
                res.status = 200;
                res.set_chunked_content_provider(
                    "application/x-ndjson",
                    [frames, stream_scene, gate, next](std::size_t, httplib::DataSink& sink) {
                      if (*next >= frames->size()) {
                        sink.done();
                        return true;
                      }
                      const std::string line = io::to_json(gate->push((*frames)[(*next)++])).dump() + "\n";
                      return sink.write(line.data(), line.size());
                    });
              }));

  if (!options_.static_dir.empty()) {
    server.set_mount_point("/", options_.static_dir);
  }
}

int run_server(const std::string& data_dir, int port, ServiceOptions options) {
  SceneStore store(data_dir);
  Service service(store, std::move(options));
  httplib::Server server;
  service.mount(server);
  std::cerr << "crbgate: serving " << data_dir << " on port " << port << "\n";
  if (!server.listen("0.0.0.0", port)) {
    std::cerr << "crbgate: cannot listen on port " << port << "\n";
    return 1;
  }
  return 0;
}

}  // namespace crbgate
