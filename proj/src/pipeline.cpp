#include "calib/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "calib/error.hpp"
#include "calib/json_io.hpp"

namespace calib {

namespace {

constexpr double kRoundTripPxTol = 1e-6;
constexpr double kRoundTripMTol = 1e-6;
constexpr double kReproductionTol = 1e-6;
constexpr double kPlacementTol = 1e-9;
constexpr double kMarkerTol = 1e-6;
constexpr int kGrid = 9;

DistortionModel canonical(const DistortionModel& d) {
  return {json_io::round_sig9(d.k1), json_io::round_sig9(d.k2),
          json_io::round_sig9(d.normalization_radius)};
}

bool has_fit_polylines(const AnnotationSet& a) {
  return std::any_of(a.distortion_polylines.begin(), a.distortion_polylines.end(),
                     [](const Polyline& p) { return p.size() >= 3; });
}

double dist(const WorldPoint& a, const WorldPoint& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

}  // namespace

Stage1Outcome run_stage1(CameraRecord& record, const SolveOptions& options) {
  if (!record.annotation) {
    throw CalibError(ErrorCode::ValidationFailure, "camera '" + record.id + "' has no annotation",
                     {}, "annotation");
  }
  const int w = record.image.width, h = record.image.height;
  AnnotationSet ann = *record.annotation;
  ann.validate(w, h);

  Stage1Outcome out;
  std::optional<DistortionModel> distortion = record.distortion;
  if (!distortion && has_fit_polylines(ann)) {
    out.distortion = fit_distortion(ann.distortion_polylines, w, h);
    distortion = canonical(out.distortion->model);
    ann = ann.undistorted(*distortion, {0.5 * w, 0.5 * h});
  }
  ann = json_io::canonical(ann);
  ann.validate(w, h);

  PartialCalibration partial = solve_partial(ann, w, h, options);
  partial.annotation_digest = annotation_digest(ann);
  partial = json_io::canonical(partial);
  out.floor_polygon = project_efov(ann, partial);
  out.partial = partial;

  record.annotation = std::move(ann);
  record.distortion = distortion;
  record.partial = partial;
  return out;
}

std::variant<CameraModel, Incomplete> derive_model(const CameraRecord& c) {
  if (!c.annotation) return Incomplete{Stage::Annotation};
  PartialCalibration partial;
  if (c.partial && c.partial->annotation_digest == annotation_digest(*c.annotation)) {
    partial = *c.partial;
  } else {
    CameraRecord scratch = c;
    partial = run_stage1(scratch).partial;
  }
  if (!c.placement) return Incomplete{Stage::Placement};
  return assemble_full_calibration(partial, apply_placement(partial, *c.placement));
}

PlacementOutcome run_placement(Project& project, const std::string& camera_id,
                               const PlacementTransform& t) {
  CameraRecord* cam = project.find_camera(camera_id);
  if (cam == nullptr) {
    throw CalibError(ErrorCode::ValidationFailure, "unknown camera '" + camera_id + "'", {}, "camera");
  }
  if (!cam->partial || !cam->annotation) {
    throw CalibError(ErrorCode::Incomplete,
                     "camera '" + camera_id + "' has no stage-1 calibration yet", {}, "partial");
  }
  t.validate();
  const PlacementTransform stored{json_io::round_sig9(t.dx), json_io::round_sig9(t.dy),
                                  json_io::round_sig9(t.scale), json_io::round_sig9(t.theta)};
  const PartialCalibration& partial = *cam->partial;

  PlacementOutcome out;
  out.model = assemble_full_calibration(partial, apply_placement(partial, stored));
  out.floor_polygon = transform_floor_polygon(project_efov(*cam->annotation, partial), stored);
  out.prism = backproject_prism(out.floor_polygon, out.model, 2.0);
  const CameraModel models[] = {out.model};
  for (const VirtualMarker& m : project.markers) {
    out.markers.emplace_back(m.id, project_virtual_marker(m, models).front());
  }
  cam->placement = stored;
  return out;
}

std::map<std::string, CameraModel> calibrated_models(const Project& project) {
  std::map<std::string, CameraModel> out;
  for (const CameraRecord& c : project.cameras) {
    if (!c.partial || !c.placement) continue;
    auto m = derive_model(c);
    if (auto* model = std::get_if<CameraModel>(&m)) out.emplace(c.id, *model);
  }
  return out;
}

OverlayMap marker_overlays(const Project& project) {
  const auto models = calibrated_models(project);
  if (models.empty()) {
    throw CalibError(ErrorCode::Incomplete, "no fully calibrated cameras");
  }
  OverlayMap out;
  for (const auto& [cid, model] : models) {
    auto& per_cam = out[cid];
    const CameraModel one[] = {model};
    for (const VirtualMarker& m : project.markers) {
      auto proj = project_virtual_marker(m, one).front();
      if (proj) per_cam.emplace(m.id, std::move(*proj));
    }
  }
  return out;
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
}

VerifyReport verify_project(const Project& project) {
  const auto models = calibrated_models(project);
  if (models.empty()) {
    throw CalibError(ErrorCode::Incomplete, "no fully calibrated cameras to verify");
  }
  VerifyReport report;
  auto add = [&](std::string name, const std::string& cam, double measured, double tol) {
    report.checks.push_back({std::move(name), cam, std::isfinite(measured) && measured <= tol,
                             measured, tol});
  };

  for (const auto& [cid, model] : models) {
    const CameraRecord& rec = *project.find_camera(cid);
    const int w = model.intrinsics.width, h = model.intrinsics.height;

    double px_err = 0.0, m_err = 0.0;
    for (int i = 0; i < kGrid; ++i) {
      for (int j = 0; j < kGrid; ++j) {
        const PixelPoint q{w * (i + 0.5) / kGrid, h * (j + 0.5) / kGrid};
        for (double plane : {0.0, 1.0}) {
          const auto world = project_pixel_to_world(q, plane, model);
          if (!world) continue;
          const auto back = project_world_to_pixel(*world, model);
          if (!back) {
            px_err = INFINITY;
            continue;
          }
          px_err = std::max(px_err, std::hypot(back->u - q.u, back->v - q.v));
          const auto again = project_pixel_to_world(*back, plane, model);
          m_err = again ? std::max(m_err, dist(*again, *world)) : INFINITY;
        }
      }
    }
    add("pixel_world_pixel_round_trip", cid, px_err, kRoundTripPxTol);
    add("world_pixel_world_round_trip", cid, m_err, kRoundTripMTol);

    // Stage-1 reproduction: the stored partial must be what the stored
    // annotation yields.
    double repro = INFINITY;
    try {
      const PartialCalibration fresh = json_io::canonical(
          solve_partial(*rec.annotation, rec.image.width, rec.image.height));
      const PartialCalibration& stored = *rec.partial;
      repro = std::max({std::abs(fresh.roll - stored.roll), std::abs(fresh.pitch - stored.pitch),
                        std::abs(fresh.focal - stored.focal) / stored.focal});
    } catch (const CalibError&) {
    }
    add("stage1_reproduction", cid, repro, kReproductionTol);

    double placement_err = INFINITY;
    try {
      const FloorPolygon moved =
          transform_floor_polygon(project_efov(*rec.annotation, *rec.partial), *rec.placement);
      placement_err = 0.0;
      for (std::size_t k = 0; k < moved.size(); ++k) {
        const auto direct = project_pixel_to_world(rec.annotation->efov_polygon[k], 0.0, model);
        placement_err = direct ? std::max(placement_err, dist(*direct, moved[k])) : INFINITY;
      }
    } catch (const CalibError&) {
    }
    add("placement_consistency", cid, placement_err, kPlacementTol);

    const CameraModel one[] = {model};
    for (const VirtualMarker& m : project.markers) {
      const auto proj = project_virtual_marker(m, one).front();
      if (!proj) continue;
      const WorldPoint anchor = m.outline().front();
      const auto back = project_pixel_to_world(proj->front(), anchor.z, model);
      add("marker_agreement:" + m.id, cid, back ? dist(*back, anchor) : INFINITY, kMarkerTol);
    }
  }
  return report;
}

}  // namespace calib
