// crbgate: command line front end for the CRB search-region toolkit.
//
//   heatmap   best achievable RMSE over a floor grid
//   simulate  Monte Carlo RMSE vs noise level
//   coverage  empirical coverage of the plug-in confidence region
//   gate      measurement stream -> per-camera search regions
//   eval      recall / success curve / AUC against ground truth
//   serve     HTTP service with file-backed scenes
//   init-scene  write the built-in reference scene

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "crbgate/errors.hpp"
#include "crbgate/io.hpp"
#include "crbgate/montecarlo_sim.hpp"
#include "crbgate/search_gate.hpp"
#include "crbgate/service.hpp"
#include "crbgate/tracking_eval.hpp"

namespace {

using namespace crbgate;
using nlohmann::json;

// Runtime failures leave the process with exit code 1.
struct Failure {
  std::string kind;
  std::string message;
};

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--sigmas", "'" + item + "' is not a number");
    }
  }
  if (out.empty()) throw CLI::ValidationError("--sigmas", "at least one value is required");
  return out;
}

std::pair<std::size_t, std::size_t> parse_grid(const std::string& text) {
  const auto x = text.find_first_of("xX");
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t a = 0;
    std::size_t b = 0;
    const auto nx = std::stoul(text.substr(0, x), &a);
    const auto ny = std::stoul(text.substr(x + 1), &b);
    if (a != x || b != text.size() - x - 1) throw std::invalid_argument(text);
    return {nx, ny};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--grid", "expected NXxNY, e.g. 40x40");
  }
}

std::vector<Vec2> parse_targets(const std::string& text, const Scene& scene) {
  if (text.empty()) return default_targets(scene.bounds);
  std::vector<Vec2> out;
  std::stringstream ss(text);
  std::string pair;
  while (std::getline(ss, pair, ';')) {
    const auto v = parse_list(pair);
    if (v.size() != 2) throw CLI::ValidationError("--targets", "expected x,y;x,y;...");
    out.emplace_back(v[0], v[1]);
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << content) || !out.flush()) {
    throw Failure{"io_error", "cannot write '" + path + "'"};
  }
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? v : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wireless CRB confidence regions as visual-tracker search regions"};
  app.require_subcommand(1);

  std::string scene_path;
  std::string out_path;
  std::string targets_spec;
  double sigma = 0.0;
  double alpha = 0.05;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;

  auto* heatmap = app.add_subcommand("heatmap", "Best achievable RMSE over a floor grid (CSV)");
  std::string grid_spec = "40x40";
  heatmap->add_option("--scene", scene_path, "Scene JSON")->required()->check(CLI::ExistingFile);
  heatmap->add_option("--sigma", sigma, "Gaussian RSS noise std (dBm); default: the scene's");
  heatmap->add_option("--grid", grid_spec, "Grid as NXxNY")->capture_default_str();
  heatmap->add_option("--out", out_path, "Output CSV")->required();

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo RMSE versus RSS noise (CSV)");
  std::string sigmas_spec = "3,5,7,9,11";
  std::string json_out;
  simulate->add_option("--scene", scene_path, "Scene JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--sigmas", sigmas_spec, "Comma-separated noise levels (dBm)")->capture_default_str();
  simulate->add_option("--trials", trials, "Trials per noise level")->capture_default_str();
  simulate->add_option("--seed", seed, "Random seed")->capture_default_str();
  simulate->add_option("--targets", targets_spec, "Evaluation points x,y;x,y (default: built-in)");
  simulate->add_option("--out", out_path, "Output CSV")->required();
  simulate->add_option("--json", json_out, "Also write the report as JSON");

  auto* coverage = app.add_subcommand("coverage", "Coverage of the plug-in confidence region (JSON on stdout)");
  coverage->add_option("--scene", scene_path, "Scene JSON")->required()->check(CLI::ExistingFile);
  coverage->add_option("--alpha", alpha, "Region level alpha")->capture_default_str();
  coverage->add_option("--trials", trials, "Number of trials")->capture_default_str();
  coverage->add_option("--seed", seed, "Random seed")->capture_default_str();
  coverage->add_option("--targets", targets_spec, "Evaluation points x,y;x,y (default: built-in)");

  auto* gate = app.add_subcommand("gate", "Measurement JSONL to per-camera search regions (JSONL)");
  std::string measurements_path;
  gate->add_option("--scene", scene_path, "Scene JSON")->required()->check(CLI::ExistingFile);
  gate->add_option("--measurements", measurements_path, "Measurement JSONL")->required()->check(CLI::ExistingFile);
  gate->add_option("--alpha", alpha, "Region level alpha")->capture_default_str();
  gate->add_option("--out", out_path, "Output JSONL")->required();

  auto* eval = app.add_subcommand("eval", "Recall, success curve and AUC against ground truth");
  std::string pred_path;
  std::string gt_path;
  eval->add_option("--pred", pred_path, "Predictions: gate JSONL or frame CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", gt_path, "Ground truth CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", out_path, "Output directory")->required();

  auto* serve = app.add_subcommand("serve", "HTTP service with file-backed scenes");
  std::string data_dir = env_or("CRBGATE_DATA_DIR", "./crbgate-data");
  int port = std::stoi(env_or("CRBGATE_PORT", "8080"));
  ServiceOptions service_options;
  serve->add_option("--data-dir", data_dir, "Scene directory (env CRBGATE_DATA_DIR)")->capture_default_str();
  serve->add_option("--port", port, "Port (env CRBGATE_PORT)")->capture_default_str();
  serve->add_option("--trial-cap", service_options.trial_cap, "Max trials per request")->capture_default_str();
  serve->add_option("--static-dir", service_options.static_dir, "Planner assets to serve under /");

  auto* init_scene = app.add_subcommand("init-scene", "Write the built-in 32-anchor reference scene");
  init_scene->add_option("--out", out_path, "Output scene JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*heatmap) {
      const auto [nx, ny] = parse_grid(grid_spec);
      Scene scene = io::load_scene(scene_path);
      if (heatmap->count("--sigma")) scene = scene.with_sigma(sigma);
      write_file(out_path, io::to_csv(crb_heatmap(scene, nx, ny)));
    } else if (*simulate) {
      const auto sigmas = parse_list(sigmas_spec);
      const Scene scene = io::load_scene(scene_path);
      const auto report = run_mse(scene, sigmas, trials, parse_targets(targets_spec, scene), seed);
      write_file(out_path, io::to_csv(report));
      if (!json_out.empty()) write_file(json_out, io::to_json(report).dump(2) + "\n");
    } else if (*coverage) {
      const Scene scene = io::load_scene(scene_path);
      const auto cov = run_coverage(scene, alpha, trials, parse_targets(targets_spec, scene), seed);
      std::cout << json{{"alpha", alpha},
                        {"coverage", cov.fraction},
                        {"trials", cov.trials},
                        {"failures", cov.failures},
                        {"seed", seed}}
                       .dump()
                << "\n";
    } else if (*gate) {
      const Scene scene = io::load_scene(scene_path);
      std::ifstream in(measurements_path);
      const auto frames = io::read_frames_jsonl(in);
      std::ostringstream out;
      for (const auto& r : gate_stream(scene, frames, alpha, scene.estimator_config())) {
        out << io::to_json(r).dump() << "\n";
      }
      write_file(out_path, out.str());
    } else if (*eval) {
      std::ifstream gt_in(gt_path);
      const auto gt = io::read_gt_csv(gt_in);
      std::ifstream pred_in(pred_path);
      const bool jsonl = std::filesystem::path(pred_path).extension() == ".jsonl";
      const auto pred = jsonl ? io::read_prediction_jsonl(pred_in) : io::read_prediction_csv(pred_in);
      const auto thresholds = default_thresholds();
      const auto curve = success_curve(pred, gt, thresholds);
      std::filesystem::create_directories(out_path);
      write_file((std::filesystem::path(out_path) / "curve.csv").string(), io::curve_to_csv(curve));
      const json summary{{"auc", auc(curve)}, {"recall", recall_rate(pred, gt)}, {"frames", gt.size()}};
      write_file((std::filesystem::path(out_path) / "summary.json").string(), summary.dump(2) + "\n");
    } else if (*serve) {
      return run_server(data_dir, port, service_options);
    } else if (*init_scene) {
      write_file(out_path, io::to_json(default_scene()).dump(2) + "\n");
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << json{{"error", {{"kind", "usage"}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  } catch (const Failure& f) {
    std::cerr << json{{"error", {{"kind", f.kind}, {"message", f.message}}}}.dump() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << json{{"error", {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}}}}.dump()
              << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }
  return 0;
}
