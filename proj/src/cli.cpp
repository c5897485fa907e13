#include "calib/cli.hpp"

#include <CLI11.hpp>

#include <ostream>

#include "calib/error.hpp"
#include "calib/json_io.hpp"
#include "calib/pipeline.hpp"

namespace calib {

namespace {

using json_io::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonConvergence:
    case ErrorCode::InfeasibleGeometry:
      return kExitConvergence;
    case ErrorCode::IoFailure:
      return kExitIo;
    default:
      return kExitValidation;
  }
}

CameraRecord& require_camera(Project& p, const std::string& id) {
  CameraRecord* cam = p.find_camera(id);
  if (cam == nullptr) throw CalibError(ErrorCode::ValidationFailure, "unknown camera '" + id + "'");
  return *cam;
}

json matrix_json(const CameraModel& m) {
  const auto P = projection_matrix(m);
  json rows = json::array();
  for (int r = 0; r < 3; ++r) {
    json row = json::array();
    for (int c = 0; c < 4; ++c) row.push_back(json_io::number(P(r, c)));
    rows.push_back(row);
  }
  return rows;
}

json parameters_json(const CameraModel& m) {
  return {{"x0", json_io::number(m.pose.x0)},       {"y0", json_io::number(m.pose.y0)},
          {"z0", json_io::number(m.pose.z0)},       {"yaw", json_io::number(m.pose.yaw)},
          {"pitch", json_io::number(m.pose.pitch)}, {"roll", json_io::number(m.pose.roll)},
          {"focal", json_io::number(m.intrinsics.focal)}};
}

json report_json(const VerifyReport& r) {
  json checks = json::array();
  for (const PropertyCheck& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"camera", c.camera},
                      {"passed", c.passed},
                      {"measured", json_io::number(c.measured)},
                      {"tolerance", json_io::number(c.tolerance)}});
  }
  return {{"passed", r.passed()}, {"checks", checks}};
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-stage camera calibration pipeline", "calib"};
  app.require_subcommand(1);

  std::string project_path;
  std::string camera_id;

  auto* stage1 = app.add_subcommand("stage1", "Solve roll, pitch and focal from the camera's annotation");
  stage1->add_option("--project", project_path, "Project document")->required();
  stage1->add_option("--camera", camera_id, "Camera id")->required();

  PlacementTransform t;
  bool degrees = false;
  bool dry_run = false;
  auto* place = app.add_subcommand("place", "Store a placement and print the resulting pose");
  place->add_option("--project", project_path, "Project document")->required();
  place->add_option("--camera", camera_id, "Camera id")->required();
  place->add_option("--dx", t.dx, "Translation along x in meters");
  place->add_option("--dy", t.dy, "Translation along y in meters");
  place->add_option("--scale", t.scale, "Uniform scale of the floor footprint");
  place->add_option("--theta", t.theta, "Rotation about the vertical axis (radians unless --deg)");
  place->add_flag("--deg", degrees, "Interpret --theta in degrees");
  place->add_flag("--dry-run", dry_run, "Print the pose without writing the project");

  auto* verify = app.add_subcommand("verify", "Run the invariant suite and print a JSON report");
  verify->add_option("--project", project_path, "Project document")->required();

  std::string format = "matrix";
  auto* exporter = app.add_subcommand("export", "Print per-camera calibrations");
  exporter->add_option("--project", project_path, "Project document")->required();
  exporter->add_option("--format", format, "Output format")->check(CLI::IsMember({"matrix", "document"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.get_name() << ": " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    Project project = load_project(project_path);

    if (stage1->parsed()) {
      CameraRecord& cam = require_camera(project, camera_id);
      const Stage1Outcome outcome = run_stage1(cam);
      save_project(project, project_path);
      json result = {{"camera", camera_id}, {"partial", json_io::to_json(*cam.partial)}};
      if (outcome.distortion) {
        result["distortion"] = json_io::to_json(outcome.distortion->model);
        result["distortion_residual_px"] = json_io::number(outcome.distortion->rms_residual_px);
      }
      out << json_io::dump(result) << '\n';
      return kExitOk;
    }

    if (place->parsed()) {
      if (degrees) t.theta = deg_to_rad(t.theta);
      const PlacementOutcome outcome = run_placement(project, camera_id, t);
      if (!dry_run) save_project(project, project_path);
      const json result = {{"camera", camera_id},
                           {"placement", json_io::to_json(*require_camera(project, camera_id).placement)},
                           {"pose", json_io::to_json(outcome.model.pose)},
                           {"focal", json_io::number(outcome.model.intrinsics.focal)}};
      out << json_io::dump(result) << '\n';
      return kExitOk;
    }

    if (verify->parsed()) {
      const VerifyReport report = verify_project(project);
      out << json_io::dump(report_json(report)) << '\n';
      return report.passed() ? kExitOk : kExitVerifyFailed;
    }

    // export: every camera must be fully calibrated.
    json cameras = json::array();
    for (const CameraRecord& cam : project.cameras) {
      const auto derived = derive_model(cam);
      if (const auto* missing = std::get_if<Incomplete>(&derived)) {
        throw CalibError(ErrorCode::Incomplete, "camera '" + cam.id + "' is missing its " +
                                                    std::string(to_string(missing->missing)));
      }
      const CameraModel& m = std::get<CameraModel>(derived);
      if (format == "matrix") {
        cameras.push_back({{"id", cam.id},
                           {"width", cam.image.width},
                           {"height", cam.image.height},
                           {"matrix", matrix_json(m)},
                           {"parameters", parameters_json(m)}});
      } else {
        json c = json_io::to_json(cam);
        c.erase("image");
        cameras.push_back(c);
      }
    }
    if (project.cameras.empty()) throw CalibError(ErrorCode::Incomplete, "project has no cameras");
    out << json_io::dump({{"format", format}, {"schema_version", kSchemaVersion}, {"cameras", cameras}}) << '\n';
    return kExitOk;
  } catch (const CalibError& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: InternalError: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace calib
