#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "psmplace/geometry.hpp"
#include "psmplace/io.hpp"
#include "psmplace/kinematics.hpp"
#include "psmplace/optimizer.hpp"
#include "psmplace/proxy.hpp"
#include "psmplace/score_maps.hpp"
#include "psmplace/scoring.hpp"
#include "psmplace/trajectory.hpp"

namespace py = pybind11;
using namespace psmplace;

namespace {

Arm to_arm(int a) {
  if (a != 1 && a != 2) throw py::value_error("arm must be 1 or 2");
  return a == 1 ? Arm::kOne : Arm::kTwo;
}

std::string json_text(const nlohmann::json& j) { return j.dump(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Base placement for two RCM-constrained surgical arms";
  m.attr("__version__") = kToolVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_IOError);

  py::class_<BasePose>(m, "BasePose")
      .def(py::init<>())
      .def(py::init([](double x, double y, double theta) { return BasePose{x, y, theta}; }),
           py::arg("x"), py::arg("y"), py::arg("theta"))
      .def_readwrite("x", &BasePose::x)
      .def_readwrite("y", &BasePose::y)
      .def_readwrite("theta", &BasePose::theta)
      .def("__repr__", [](const BasePose& p) {
        return "BasePose(x=" + format_double(p.x, 6) + ", y=" + format_double(p.y, 6) +
               ", theta=" + format_double(p.theta, 6) + ")";
      });

  py::class_<SetupPose>(m, "SetupPose")
      .def(py::init<>())
      .def(py::init([](const BasePose& a, const BasePose& b) { return SetupPose{a, b}; }),
           py::arg("arm1"), py::arg("arm2"))
      .def_readwrite("arm1", &SetupPose::arm1)
      .def_readwrite("arm2", &SetupPose::arm2);

  py::class_<JointConfig>(m, "JointConfig")
      .def(py::init<>())
      .def(py::init([](double a, double b, double c) { return JointConfig{a, b, c}; }),
           py::arg("yaw"), py::arg("pitch"), py::arg("insertion"))
      .def_readwrite("yaw", &JointConfig::yaw)
      .def_readwrite("pitch", &JointConfig::pitch)
      .def_readwrite("insertion", &JointConfig::insertion);

  py::class_<WorldLayout>(m, "WorldLayout")
      .def_static("defaults", &WorldLayout::defaults)
      .def_static("from_json", [](const std::string& text) {
        return parse_config(nlohmann::json::parse(text));
      })
      .def_static("load", &load_config, py::arg("path"))
      .def("to_json", [](const WorldLayout& l) { return json_text(to_json(l)); })
      .def("digest", [](const WorldLayout& l) { return config_digest(l); })
      .def("validate", &WorldLayout::validate)
      .def("in_roi", &WorldLayout::in_roi, py::arg("p"), py::arg("tol") = 0.0)
      .def_readwrite("roi_center", &WorldLayout::roi_center)
      .def_readwrite("roi_side", &WorldLayout::roi_side)
      .def_readwrite("tool_length", &WorldLayout::tool_length)
      .def_readwrite("theta_bound", &WorldLayout::theta_bound);

  py::class_<IkResult>(m, "IkResult")
      .def_readonly("q", &IkResult::q)
      .def_readonly("achieved", &IkResult::achieved)
      .def_readonly("error_norm", &IkResult::error_norm)
      .def_readonly("converged", &IkResult::converged)
      .def_readonly("within_limits", &IkResult::within_limits)
      .def_readonly("iterations", &IkResult::iterations);

  m.def("rcm", [](const BasePose& b, const WorldLayout& l, int arm) {
    return rcm_from_base(b, l, to_arm(arm));
  }, py::arg("base"), py::arg("layout"), py::arg("arm"));
  m.def("forward_kinematics", [](const BasePose& b, const JointConfig& q, const WorldLayout& l,
                                 int arm) { return forward_kinematics(b, q, l, to_arm(arm)); },
        py::arg("base"), py::arg("q"), py::arg("layout"), py::arg("arm"));
  m.def("solve_ik", [](const BasePose& b, const Vec3& target, const WorldLayout& l, int arm) {
    return solve_ik_dls(b, target, l, to_arm(arm), {}, default_ik_seed(l));
  }, py::arg("base"), py::arg("target"), py::arg("layout"), py::arg("arm"));

  m.def("check_setup", [](const SetupPose& s, const JointConfig& q1, const JointConfig& q2,
                          const WorldLayout& l) {
    const CollisionReport r = check_setup(s, q1, q2, l);
    return py::dict(py::arg("self_collision") = r.self_collision,
                    py::arg("env_collision_arm1") = r.env_collision_arm1,
                    py::arg("env_collision_arm2") = r.env_collision_arm2);
  }, py::arg("setup"), py::arg("q1"), py::arg("q2"), py::arg("layout"));

  m.def("reachability_score", [](const BasePose& b, const WorldLayout& l, int arm) {
    return reachability_score(b, l, to_arm(arm));
  }, py::arg("base"), py::arg("layout"), py::arg("arm"));

  m.def("sample_dataset_csv", [](const WorldLayout& l, int n, std::uint64_t seed, int joint_samples) {
    py::gil_scoped_release release;
    DatasetOptions opt;
    opt.joint_samples = joint_samples;
    return dataset_to_csv(generate_dataset(l, n, GeometricBackend(l), seed, opt));
  }, py::arg("layout"), py::arg("setups"), py::arg("seed") = 0,
        py::arg("joint_samples") = kDefaultJointSamples,
        "Scored setups as CSV text (geometric checker).");

  m.def("fit_score_maps", [](const std::string& csv_text, const WorldLayout& l,
                             const std::filesystem::path& out_dir, std::uint64_t seed) {
    const ScoreDataset ds = parse_dataset_csv(csv_text);
    ScoreMapParams p;
    p.split_seed = seed;
    const FittedScoreMaps fit = fit_score_maps(ds, l, p);
    std::filesystem::create_directories(out_dir);
    save_score_models(fit.models, out_dir);
    py::dict rmse;
    for (std::size_t k = 0; k < kScoreNames.size(); ++k) rmse[kScoreNames[k]] = fit.holdout_rmse[k];
    return rmse;
  }, py::arg("csv_text"), py::arg("layout"), py::arg("out_dir"), py::arg("seed") = 0,
        "Fits the five score maps, saves them, returns holdout RMSE per score.");

  m.def("optimize", [](const std::filesystem::path& models_dir, const WorldLayout& l, double w_reach,
                       double w_self, double w_env, int starts, std::uint64_t seed) {
    const Weights w{w_reach, w_self, w_env};
    const ObjectiveSpec spec(w, load_score_models(models_dir));
    const Solution sol = multi_start_optimize(spec, l, starts, seed);
    return json_text(solution_to_json(sol, w, seed));
  }, py::arg("models_dir"), py::arg("layout"), py::arg("w_reach") = 1.0, py::arg("w_self") = 1.0,
        py::arg("w_env") = 1.0, py::arg("starts") = 100, py::arg("seed") = 0,
        "Solution record as JSON text.");

  m.def("evaluate_setup", [](const SetupPose& s, const WorldLayout& l) {
    return json_text(report_to_json(evaluate_setup(s, l)));
  }, py::arg("setup"), py::arg("layout"), "Trajectory report as JSON text.");

  m.def("canonical_trajectories", [](const WorldLayout& l) {
    std::vector<std::vector<Vec3>> out;
    for (const Trajectory& t : canonical_trajectories(l)) out.push_back(t.points());
    return out;
  }, py::arg("layout"));
}
