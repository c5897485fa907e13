#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "calib/distortion.hpp"
#include "calib/project.hpp"

// Workflow steps shared by the CLI and the HTTP service. Both front ends are
// thin shells over these functions, which in turn only call the stage-1 and
// stage-2 library routines.

namespace calib {

struct Stage1Outcome {
  PartialCalibration partial;
  FloorPolygon floor_polygon;
  std::optional<DistortionFit> distortion;
};

/// Stage 1 for one camera. If the record has distortion polylines but no
/// distortion model, the model is fitted first and the annotation replaced
/// by its undistorted form. The stored annotation and partial are the
/// canonical (nine significant digit) values. The record is only modified
/// when every step succeeds.
Stage1Outcome run_stage1(CameraRecord& record, const SolveOptions& options = {});

struct PlacementOutcome {
  CameraModel model;
  FloorPolygon floor_polygon;  // EFOV after the placement transform
  PrismOverlay prism;
  std::vector<std::pair<std::string, std::optional<std::vector<PixelPoint>>>> markers;
};

/// Stage 2 for one camera: stores the placement and returns the derived
/// model with its overlays. Throws ValidationFailure for an unknown camera
/// and Incomplete when it has no partial calibration.
PlacementOutcome run_placement(Project& project, const std::string& camera_id,
                               const PlacementTransform& t);

/// Camera id -> marker id -> projected outline, for calibrated cameras and
/// the markers visible in them.
using OverlayMap = std::map<std::string, std::map<std::string, std::vector<PixelPoint>>>;

/// Throws Incomplete when no camera is fully calibrated.
OverlayMap marker_overlays(const Project& project);

/// All fully derivable models keyed by camera id.
std::map<std::string, CameraModel> calibrated_models(const Project& project);

struct PropertyCheck {
  std::string name;
  std::string camera;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
};

struct VerifyReport {
  std::vector<PropertyCheck> checks;
  bool passed() const;
};

/// Runs the invariant suite on every calibrated camera: projection round
/// trips, stage-1 reproduction from the stored annotation, placement
/// consistency and marker agreement. Throws Incomplete when no camera is
/// calibrated.
VerifyReport verify_project(const Project& project);

}  // namespace calib
