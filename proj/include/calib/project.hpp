#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "calib/distortion.hpp"
#include "calib/stage1.hpp"
#include "calib/stage2.hpp"

namespace calib {

inline constexpr int kSchemaVersion = 2;

/// Optional location plan used as a visual backdrop in plan view.
struct Floorplan {
  std::string image;
  double meters_per_pixel = 1.0;
  double origin_x = 0.0;
  double origin_y = 0.0;

  friend bool operator==(const Floorplan&, const Floorplan&) = default;
};

struct ImageInfo {
  std::string ref;  // content hash reference, may be empty
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageInfo&, const ImageInfo&) = default;
};

/// Per-camera operator inputs plus the cached stage-1 result. The full
/// camera model is always derived, never stored as a source of truth.
/// When `distortion` is set, annotation coordinates are already undistorted
/// (the polylines stay in observed coordinates).
struct CameraRecord {
  std::string id;
  ImageInfo image;
  std::optional<DistortionModel> distortion;
  std::optional<AnnotationSet> annotation;
  std::optional<PartialCalibration> partial;
  std::optional<PlacementTransform> placement;

  friend bool operator==(const CameraRecord&, const CameraRecord&) = default;
};

struct Project {
  int schema_version = kSchemaVersion;
  std::string id;
  std::string name;
  std::optional<Floorplan> floorplan;
  std::vector<CameraRecord> cameras;
  std::vector<VirtualMarker> markers;

  /// Throws ValidationFailure with the offending field path.
  void validate() const;
  CameraRecord* find_camera(std::string_view id);
  const CameraRecord* find_camera(std::string_view id) const;

  friend bool operator==(const Project&, const Project&) = default;
};

/// Canonical text: sorted keys, numbers rounded to nine significant digits.
std::string serialize_project(const Project& p);
/// Parses, migrates older schema versions forward and validates. Throws
/// ParseFailure, SchemaFailure or ValidationFailure.
Project parse_project(std::string_view text);

/// Throws IoFailure or ValidationFailure.
void save_project(const Project& p, const std::filesystem::path& destination);
Project load_project(const std::filesystem::path& source);

enum class Stage { Annotation, Placement };
std::string_view to_string(Stage s);

struct Incomplete {
  Stage missing;
  friend bool operator==(const Incomplete&, const Incomplete&) = default;
};

/// Recomputes the full model from annotation -> partial -> placement. A
/// stored partial is reused only when its digest matches the annotation;
/// otherwise stage 1 is rerun.
std::variant<CameraModel, Incomplete> derive_model(const CameraRecord& c);

/// Digest of the canonical annotation text, as stored in partials.
std::string annotation_digest(const AnnotationSet& a);

}  // namespace calib
