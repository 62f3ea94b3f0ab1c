#include "crbgate/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "crbgate/errors.hpp"

namespace crbgate::io {

namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorKind::ParseError, what); }

// Runs a decoder, turning nlohmann type/key errors into ParseError.
template <typename F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    parse_fail(std::string(what) + ": " + e.what());
  }
}

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec(m.row(r).transpose()));
  return rows;
}

Eigen::VectorXd read_vec(const json& j, Eigen::Index n, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) {
    parse_fail(std::string(name) + " must be an array of " + std::to_string(n) + " numbers");
  }
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

Eigen::Matrix3d read_mat3(const json& j, const char* name) {
  if (!j.is_array() || j.size() != 3) parse_fail(std::string(name) + " must be a 3x3 row-major array");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) m.row(r) = read_vec(j.at(static_cast<std::size_t>(r)), 3, name).transpose();
  return m;
}

json point(const Vec2& p) { return json::array({p.x(), p.y()}); }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    parse_fail("line " + std::to_string(line_no) + ": '" + s + "' is not a number");
  }
  return v;
}

bool is_header(const std::string& line) {
  const auto pos = line.find_first_not_of(' ');
  return pos != std::string::npos && !(std::isdigit(static_cast<unsigned char>(line[pos])) ||
                                       line[pos] == '-' || line[pos] == '.');
}

struct CsvRow {
  std::size_t frame_index;
  Box box;
  bool present;
};

std::vector<CsvRow> read_box_csv(std::istream& in) {
  std::vector<CsvRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line_no == 1 && is_header(line)) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) {
      parse_fail("line " + std::to_string(line_no) + ": expected frame_index,x,y,w,h,present");
    }
    const double idx = parse_double(f[0], line_no);
    if (idx < 0.0 || idx != std::floor(idx)) {
      parse_fail("line " + std::to_string(line_no) + ": frame_index must be a non-negative integer");
    }
    CsvRow row{static_cast<std::size_t>(idx),
               {parse_double(f[1], line_no), parse_double(f[2], line_no), parse_double(f[3], line_no),
                parse_double(f[4], line_no)},
               parse_double(f[5], line_no) != 0.0};
    if (row.box.w < 0.0 || row.box.h < 0.0) {
      parse_fail("line " + std::to_string(line_no) + ": box extents must be non-negative");
    }
    if (!rows.empty() && row.frame_index != rows.back().frame_index + 1) {
      parse_fail("line " + std::to_string(line_no) + ": frame indices must be consecutive");
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

json to_json(const Anchor& a) {
  return {{"id", a.id},
          {"position", json::array({a.position.x(), a.position.y(), a.position.z()})},
          {"A", a.path_loss_a},
          {"B", a.path_loss_b}};
}

Anchor anchor_from_json(const json& j) {
  return guarded("anchor", [&] {
    Anchor a;
    a.id = j.at("id").get<std::string>();
    a.position = read_vec(j.at("position"), 3, "anchor position");
    a.path_loss_a = j.at("A").get<double>();
    a.path_loss_b = j.at("B").get<double>();
    validate(a);
    return a;
  });
}

json to_json(const CameraModel& c) {
  return {{"id", c.id()},
          {"K", mat(c.intrinsics())},
          {"R", mat(c.rotation())},
          {"T", vec(c.translation())},
          {"image_size", json::array({c.width(), c.height()})}};
}

CameraModel camera_from_json(const json& j) {
  return guarded("camera", [&] {
    if (!j.is_object()) parse_fail("camera must be a JSON object");
    static const std::set<std::string> allowed{"id", "K", "R", "T", "image_size"};
    for (const auto& [key, _] : j.items()) {
      if (!allowed.contains(key)) {
        parse_fail("camera field '" + key +
                   "' is not supported (pinhole model only; lens distortion is rejected)");
      }
    }
    const auto& size = j.at("image_size");
    if (!size.is_array() || size.size() != 2) parse_fail("image_size must be [width, height]");
    return CameraModel(j.at("id").get<std::string>(), read_mat3(j.at("K"), "K"), read_mat3(j.at("R"), "R"),
                       read_vec(j.at("T"), 3, "T"), size.at(0).get<int>(), size.at(1).get<int>());
  });
}

json to_json(const Scene& s) {
  if (!s.noise.is_gaussian()) {
    throw Error(ErrorKind::InvalidArgument, "only Gaussian noise has a JSON encoding");
  }
  json anchors = json::array();
  for (const auto& a : s.anchors) anchors.push_back(to_json(a));
  json cameras = json::array();
  for (const auto& c : s.cameras) cameras.push_back(to_json(c));
  return {{"anchors", anchors},
          {"cameras", cameras},
          {"noise", {{"type", "gaussian"}, {"sigma", s.noise.sigma()}}},
          {"bounds", json::array({s.bounds.x0, s.bounds.y0, s.bounds.x1, s.bounds.y1})},
          {"person_height", s.person_height}};
}

Scene scene_from_json(const json& j) {
  return guarded("scene", [&] {
    if (!j.is_object()) parse_fail("scene must be a JSON object");
    Scene s;
    for (const auto& a : j.at("anchors")) s.anchors.push_back(anchor_from_json(a));
    if (j.contains("cameras")) {
      for (const auto& c : j.at("cameras")) s.cameras.push_back(camera_from_json(c));
    }
    const auto& noise = j.at("noise");
    const auto type = noise.at("type").get<std::string>();
    if (type != "gaussian") parse_fail("unsupported noise type '" + type + "'");
    s.noise = NoiseModel::gaussian(noise.at("sigma").get<double>());
    const auto b = read_vec(j.at("bounds"), 4, "bounds");
    s.bounds = {b[0], b[1], b[2], b[3]};
    s.person_height = j.value("person_height", kDefaultPersonHeight);
    validate(s);
    return s;
  });
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open scene file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    parse_fail("scene file '" + path + "': " + e.what());
  }
  return scene_from_json(j);
}

json to_json(const MeasurementFrame& f) {
  json rss = json::object();
  for (const auto& r : f.readings) rss[r.anchor_id] = r.rss;
  return {{"t", f.timestamp}, {"rss", rss}};
}

MeasurementFrame frame_from_json(const json& j) {
  return guarded("measurement frame", [&] {
    MeasurementFrame f;
    f.timestamp = j.at("t").get<double>();
    const auto& rss = j.at("rss");
    if (!rss.is_object()) parse_fail("rss must be an object of anchor_id -> dBm");
    for (const auto& [id, v] : rss.items()) f.readings.push_back({id, v.get<double>()});
    return f;
  });
}

std::vector<MeasurementFrame> read_frames_jsonl(std::istream& in) {
  std::vector<MeasurementFrame> frames;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      frames.push_back(frame_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      parse_fail("measurements line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      parse_fail("measurements line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return frames;
}

json to_json(const ConfidenceEllipse& e) {
  return {{"center", point(e.center)},
          {"fim", mat(e.fim.matrix())},
          {"alpha", e.level_alpha},
          {"threshold", e.threshold}};
}

json to_json(const SearchRegion& r) {
  json poly = json::array();
  for (const auto& p : r.polygon_px) poly.push_back(point(p));
  return {{"camera_id", r.camera_id},
          {"estimate", point(r.estimate_xy)},
          {"ellipse", to_json(r.ellipse)},
          {"polygon", poly},
          {"box", json::array({r.box.x_min, r.box.y_min, r.box.x_max, r.box.y_max})},
          {"clipped", r.box.clipped},
          {"alpha", r.level_alpha}};
}

json to_json(const GateResult& g) {
  json regions = json::array();
  for (const auto& r : g.regions) regions.push_back(to_json(r));
  json error = nullptr;
  if (g.error) error = {{"kind", std::string(to_string(g.error->kind))}, {"message", g.error->message}};
  return {{"t", g.t}, {"regions", regions}, {"error", error}};
}

json to_json(const SimReport& report) {
  json rows = json::array();
  for (const auto& r : report.per_sigma) {
    rows.push_back({{"sigma_dbm", r.sigma},
                    {"rmse_m", r.rmse_m},
                    {"crb_rmse_m", r.crb_rmse_m},
                    {"coverage", r.coverage},
                    {"mse_standard_error", r.mse_standard_error},
                    {"trials", r.trials},
                    {"failures", r.failures}});
  }
  return {{"seed", report.seed}, {"per_sigma", rows}};
}

std::string to_csv(const SimReport& report) {
  std::ostringstream os;
  os << "sigma_dbm,rmse_m,crb_rmse_m,coverage,trials,failures\n";
  for (const auto& r : report.per_sigma) {
    os << format_number(r.sigma) << ',' << format_number(r.rmse_m) << ','
       << format_number(r.crb_rmse_m) << ',' << format_number(r.coverage) << ',' << r.trials << ','
       << r.failures << '\n';
  }
  return os.str();
}

json to_json(const Heatmap& h) {
  json rows = json::array();
  std::size_t unlocalizable = 0;
  for (std::size_t j = 0; j < h.ny; ++j) {
    json row = json::array();
    for (std::size_t i = 0; i < h.nx; ++i) {
      const auto& v = h.at(i, j);
      if (v) {
        row.push_back(*v);
      } else {
        row.push_back(nullptr);
        ++unlocalizable;
      }
    }
    rows.push_back(row);
  }
  return {{"nx", h.nx},
          {"ny", h.ny},
          {"bounds", json::array({h.bounds.x0, h.bounds.y0, h.bounds.x1, h.bounds.y1})},
          {"values", rows},
          {"unlocalizable_cells", unlocalizable}};
}

std::string to_csv(const Heatmap& h) {
  std::ostringstream os;
  os << "x_m,y_m,best_rmse_m\n";
  for (std::size_t j = 0; j < h.ny; ++j) {
    for (std::size_t i = 0; i < h.nx; ++i) {
      const Vec2 c = h.cell_center(i, j);
      os << format_number(c.x()) << ',' << format_number(c.y()) << ',';
      if (const auto& v = h.at(i, j)) os << format_number(*v);
      os << '\n';
    }
  }
  return os.str();
}

std::vector<GtBox> read_gt_csv(std::istream& in) {
  std::vector<GtBox> out;
  for (const auto& row : read_box_csv(in)) {
    out.push_back({row.frame_index, row.present ? row.box : Box{}, row.present});
  }
  return out;
}

std::vector<std::optional<Box>> read_prediction_csv(std::istream& in) {
  std::vector<std::optional<Box>> out;
  for (const auto& row : read_box_csv(in)) {
    out.push_back(row.present ? std::optional<Box>(row.box) : std::nullopt);
  }
  return out;
}

std::vector<std::optional<Box>> read_prediction_jsonl(std::istream& in) {
  std::vector<std::optional<Box>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json rec = json::parse(line);
      const auto& regions = rec.at("regions");
      if (regions.empty()) {
        out.emplace_back();
        continue;
      }
      const auto b = read_vec(regions.at(0).at("box"), 4, "box");
      out.emplace_back(Box{b[0], b[1], b[2] - b[0], b[3] - b[1]});
    } catch (const json::exception& e) {
      parse_fail("predictions line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string curve_to_csv(const std::vector<CurvePoint>& curve) {
  std::ostringstream os;
  os << "threshold,osr\n";
  for (const auto& p : curve) os << format_number(p.threshold) << ',' << format_number(p.osr) << '\n';
  return os.str();
}

}  // namespace crbgate::io
