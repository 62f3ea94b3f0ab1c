#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crbgate/camera_projection.hpp"
#include "crbgate/crb_region.hpp"
#include "crbgate/montecarlo_sim.hpp"
#include "crbgate/search_gate.hpp"
#include "crbgate/tracking_eval.hpp"
#include "crbgate/wireless_model.hpp"

// JSON, JSONL and CSV encodings of the library types. Decoders throw
// crbgate::Error with ErrorKind::ParseError (malformed input) or
// InvalidArgument (well-formed but invalid values).
namespace crbgate::io {

using nlohmann::json;

json to_json(const Anchor& anchor);
Anchor anchor_from_json(const json& j);

/// {"id", "K", "R", "T", "image_size"}; any other key (distortion terms
/// included) is rejected.
json to_json(const CameraModel& camera);
CameraModel camera_from_json(const json& j);

/// {"anchors", "cameras", "noise": {"type": "gaussian", "sigma"}, "bounds",
/// "person_height"}.
json to_json(const Scene& scene);
Scene scene_from_json(const json& j);
Scene load_scene(const std::string& path);

/// {"t": seconds, "rss": {"<anchor_id>": dBm, ...}}
json to_json(const MeasurementFrame& frame);
MeasurementFrame frame_from_json(const json& j);
/// Blank lines are skipped; errors name the offending line.
std::vector<MeasurementFrame> read_frames_jsonl(std::istream& in);

json to_json(const ConfidenceEllipse& e);
json to_json(const SearchRegion& region);
/// {"t", "regions": [...], "error": null | {"kind", "message"}}
json to_json(const GateResult& result);

json to_json(const SimReport& report);
/// sigma_dbm,rmse_m,crb_rmse_m,coverage,trials,failures
std::string to_csv(const SimReport& report);

/// Values as nested rows (y-major); unlocalizable cells are null.
json to_json(const Heatmap& heatmap);
/// x_m,y_m,best_rmse_m with an empty last field for unlocalizable cells.
std::string to_csv(const Heatmap& heatmap);

/// frame_index,x,y,w,h,present with an optional header row.
std::vector<GtBox> read_gt_csv(std::istream& in);
/// Same column layout as ground truth; rows with present=0 carry no box.
std::vector<std::optional<Box>> read_prediction_csv(std::istream& in);
/// First region's box of each gate record; error records and frames with
/// no region yield no box.
std::vector<std::optional<Box>> read_prediction_jsonl(std::istream& in);

std::string curve_to_csv(const std::vector<CurvePoint>& curve);

/// Shortest representation that round-trips.
std::string format_number(double v);

}  // namespace crbgate::io
