#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <limits>
#include <map>

#include "crbgate/camera_projection.hpp"
#include "crbgate/crb_region.hpp"
#include "crbgate/errors.hpp"
#include "crbgate/montecarlo_sim.hpp"
#include "crbgate/position_estimator.hpp"
#include "crbgate/search_gate.hpp"
#include "crbgate/tracking_eval.hpp"
#include "crbgate/wireless_model.hpp"

namespace py = pybind11;
using namespace crbgate;

namespace {

MeasurementFrame frame_from(const std::map<std::string, double>& rss, double t) {
  MeasurementFrame f{t, {}};
  for (const auto& [id, v] : rss) f.readings.push_back({id, v});
  return f;
}

Fim2 as_fim(const Eigen::Matrix2d& m) { return Fim2(m); }

std::optional<Box> box_from(const std::optional<std::array<double, 4>>& b) {
  if (!b) return std::nullopt;
  return Box{(*b)[0], (*b)[1], (*b)[2], (*b)[3]};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cramer-Rao search regions for RSS-assisted camera tracking";

  py::exception<Error>(m, "CrbgateError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object cls = py::module_::import("crbgate._core").attr("CrbgateError");
      py::object exc = cls(py::str(e.what()));
      exc.attr("kind") = py::str(std::string(to_string(e.kind())));
      PyErr_SetObject(cls.ptr(), exc.ptr());
    }
  });

  py::class_<Anchor>(m, "Anchor")
      .def(py::init([](std::string id, Vec3 position, double a, double b) {
             Anchor out{std::move(id), position, a, b};
             validate(out);
             return out;
           }),
           py::arg("id"), py::arg("position"), py::arg("A") = -45.0, py::arg("B") = -2.0)
      .def_readonly("id", &Anchor::id)
      .def_readonly("position", &Anchor::position)
      .def_readonly("A", &Anchor::path_loss_a)
      .def_readonly("B", &Anchor::path_loss_b)
      .def("__repr__", [](const Anchor& a) { return "<Anchor " + a.id + ">"; });

  py::class_<CameraModel>(m, "CameraModel")
      .def(py::init<std::string, const Eigen::Matrix3d&, const Eigen::Matrix3d&, const Vec3&, int, int>(),
           py::arg("id"), py::arg("K"), py::arg("R"), py::arg("T"), py::arg("width"), py::arg("height"))
      .def_static("look_at", &CameraModel::look_at, py::arg("id"), py::arg("eye"), py::arg("target"),
                  py::arg("up"), py::arg("focal_px"), py::arg("width"), py::arg("height"))
      .def_property_readonly("id", &CameraModel::id)
      .def_property_readonly("K", &CameraModel::intrinsics)
      .def_property_readonly("R", &CameraModel::rotation)
      .def_property_readonly("T", &CameraModel::translation)
      .def_property_readonly("width", &CameraModel::width)
      .def_property_readonly("height", &CameraModel::height)
      .def("projection_matrix", &CameraModel::projection_matrix);

  py::class_<Scene>(m, "Scene")
      .def(py::init([](std::vector<Anchor> anchors, std::vector<CameraModel> cameras, double sigma,
                       std::array<double, 4> bounds, double person_height) {
             Scene s;
             s.anchors = std::move(anchors);
             s.cameras = std::move(cameras);
             s.noise = NoiseModel::gaussian(sigma);
             s.bounds = {bounds[0], bounds[1], bounds[2], bounds[3]};
             s.person_height = person_height;
             validate(s);
             return s;
           }),
           py::arg("anchors"), py::arg("cameras") = std::vector<CameraModel>{}, py::arg("sigma") = 3.0,
           py::arg("bounds"), py::arg("person_height") = kDefaultPersonHeight)
      .def_readonly("anchors", &Scene::anchors)
      .def_readonly("cameras", &Scene::cameras)
      .def_property_readonly("sigma", [](const Scene& s) { return s.noise.sigma(); })
      .def_property_readonly("bounds",
                             [](const Scene& s) {
                               return std::array<double, 4>{s.bounds.x0, s.bounds.y0, s.bounds.x1, s.bounds.y1};
                             })
      .def_readonly("person_height", &Scene::person_height)
      .def("with_sigma", &Scene::with_sigma);

  m.def("default_scene", &default_scene);
  m.def("default_targets", [](const Scene& s) { return default_targets(s.bounds); });

  m.def(
      "predict_rss",
      [](const std::vector<Anchor>& anchors, const Vec2& xy, double z) {
        return predict_all(anchors, {xy, z});
      },
      py::arg("anchors"), py::arg("xy"), py::arg("z") = 0.0);
  m.def(
      "jacobian",
      [](const std::vector<Anchor>& anchors, const Vec2& xy, double z) {
        return Eigen::MatrixXd(jacobian(anchors, {xy, z}));
      },
      py::arg("anchors"), py::arg("xy"), py::arg("z") = 0.0);
  m.def(
      "fim",
      [](const std::vector<Anchor>& anchors, const Vec2& xy, double sigma, double z) {
        return fim(jacobian(anchors, {xy, z}), 1.0 / (sigma * sigma)).matrix();
      },
      py::arg("anchors"), py::arg("xy"), py::arg("sigma"), py::arg("z") = 0.0);
  m.def("crb", [](const Eigen::Matrix2d& f) { return crb(as_fim(f)); }, py::arg("fim"));
  m.def("best_rmse", [](const Eigen::Matrix2d& f) { return best_rmse(as_fim(f)); }, py::arg("fim"));
  m.def("chi2_quantile", &chi2_quantile, py::arg("alpha"));
  m.def(
      "ellipse_boundary",
      [](const Vec2& center, const Eigen::Matrix2d& f, double alpha, std::size_t n) {
        return ellipse_boundary(confidence_ellipse(center, as_fim(f), alpha), n);
      },
      py::arg("center"), py::arg("fim"), py::arg("alpha") = 0.05, py::arg("n_points") = kDefaultBoundaryPoints);

  m.def(
      "solve",
      [](const std::vector<Anchor>& anchors, const std::map<std::string, double>& rss, double z) {
        EstimatorConfig c;
        c.z_fixed = z;
        const auto est = solve(anchors, frame_from(rss, 0.0), c);
        py::dict out;
        out["xy"] = est.xy;
        out["residual_norm"] = est.residual_norm;
        out["iterations"] = est.iterations;
        out["converged"] = est.converged;
        return out;
      },
      py::arg("anchors"), py::arg("rss"), py::arg("z") = 0.0);

  m.def(
      "project",
      [](const CameraModel& cam, const Vec3& x) {
        const auto p = project(cam, x);
        return py::make_tuple(p.pixel, p.depth);
      },
      py::arg("camera"), py::arg("point"));
  m.def("unproject", &unproject, py::arg("camera"), py::arg("pixel"), py::arg("depth"));

  m.def(
      "gate_frame",
      [](const Scene& scene, const std::map<std::string, double>& rss, double t, double alpha) {
        py::list out;
        for (const auto& r : gate_frame(scene, frame_from(rss, t), alpha, scene.estimator_config())) {
          py::dict d;
          d["camera_id"] = r.camera_id;
          d["estimate"] = r.estimate_xy;
          d["polygon"] = r.polygon_px;
          d["box"] = std::array<double, 4>{r.box.x_min, r.box.y_min, r.box.x_max, r.box.y_max};
          d["clipped"] = r.box.clipped;
          out.append(d);
        }
        return out;
      },
      py::arg("scene"), py::arg("rss"), py::arg("t") = 0.0, py::arg("alpha") = 0.05);

  m.def(
      "run_mse",
      [](const Scene& scene, const std::vector<double>& sigmas, std::size_t trials,
         std::optional<std::vector<Vec2>> targets, std::uint64_t seed) {
        const auto pts = targets.value_or(default_targets(scene.bounds));
        py::list rows;
        for (const auto& r : run_mse(scene, sigmas, trials, pts, seed).per_sigma) {
          py::dict d;
          d["sigma_dbm"] = r.sigma;
          d["rmse_m"] = r.rmse_m;
          d["crb_rmse_m"] = r.crb_rmse_m;
          d["coverage"] = r.coverage;
          d["trials"] = r.trials;
          d["failures"] = r.failures;
          rows.append(d);
        }
        return rows;
      },
      py::arg("scene"), py::arg("sigmas"), py::arg("trials"), py::arg("targets") = py::none(),
      py::arg("seed") = 0);
  m.def(
      "run_coverage",
      [](const Scene& scene, double alpha, std::size_t trials, std::optional<std::vector<Vec2>> targets,
         std::uint64_t seed) {
        const auto pts = targets.value_or(default_targets(scene.bounds));
        return run_coverage(scene, alpha, trials, pts, seed).fraction;
      },
      py::arg("scene"), py::arg("alpha") = 0.05, py::arg("trials") = 1000, py::arg("targets") = py::none(),
      py::arg("seed") = 0);
  m.def(
      "crb_heatmap",
      [](const Scene& scene, std::size_t nx, std::size_t ny) {
        const auto h = crb_heatmap(scene, nx, ny);
        Eigen::MatrixXd out(static_cast<Eigen::Index>(ny), static_cast<Eigen::Index>(nx));
        for (std::size_t j = 0; j < ny; ++j)
          for (std::size_t i = 0; i < nx; ++i)
            out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
                h.at(i, j).value_or(std::numeric_limits<double>::quiet_NaN());
        return out;
      },
      py::arg("scene"), py::arg("nx"), py::arg("ny"));

  m.def(
      "iou",
      [](std::array<double, 4> a, std::array<double, 4> b) {
        return iou({a[0], a[1], a[2], a[3]}, {b[0], b[1], b[2], b[3]});
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "recall_rate",
      [](const std::vector<std::optional<std::array<double, 4>>>& regions,
         const std::vector<std::optional<std::array<double, 4>>>& gt) {
        std::vector<std::optional<Box>> r;
        std::vector<GtBox> g;
        for (const auto& b : regions) r.push_back(box_from(b));
        for (std::size_t k = 0; k < gt.size(); ++k) {
          g.push_back({k, box_from(gt[k]).value_or(Box{}), gt[k].has_value()});
        }
        return recall_rate(r, g);
      },
      py::arg("regions"), py::arg("gt"));
  m.def(
      "auc",
      [](const std::vector<double>& thresholds, const std::vector<double>& osr) {
        if (thresholds.size() != osr.size()) throw Error(ErrorKind::LengthMismatch, "thresholds and osr differ in length");
        std::vector<CurvePoint> c;
        for (std::size_t k = 0; k < osr.size(); ++k) c.push_back({thresholds[k], osr[k]});
        return auc(c);
      },
      py::arg("thresholds"), py::arg("osr"));
}
