#pragma once

#include <json.hpp>

#include "calib/project.hpp"

// JSON mapping of domain types shared by the document format, the HTTP API
// and the CLI. All floating point values pass through round_sig9, so the
// same value always prints the same way.

namespace calib::json_io {

using nlohmann::json;

double round_sig9(double v);
/// Rounded number, or null for NaN/inf.
json number(double v);

json to_json(const PixelPoint& p);
json to_json(const WorldPoint& p);
json to_json(const ImageLine& l);
json to_json(const AnnotationSet& a);
json to_json(const DistortionModel& d);
json to_json(const PartialCalibration& p);
json to_json(const PlacementTransform& t);
json to_json(const CameraPose& p);
json to_json(const CameraModel& m);
json to_json(const FloorPolygon& poly);
json to_json(const PrismOverlay& o);
json to_json(const VirtualMarker& m);
json to_json(const std::vector<PixelPoint>& pts);
json to_json(const CameraRecord& c);
json to_json(const Project& p);

// Parsers throw CalibError(ParseFailure) on missing or mistyped fields;
// `path` prefixes error field paths.
PixelPoint pixel_from_json(const json& j, const std::string& path);
AnnotationSet annotation_from_json(const json& j, const std::string& path = "annotation");
DistortionModel distortion_from_json(const json& j, const std::string& path = "distortion");
PlacementTransform placement_from_json(const json& j, const std::string& path = "placement");
VirtualMarker marker_from_json(const json& j, const std::string& path = "marker");
CameraRecord camera_from_json(const json& j, const std::string& path = "camera");
/// Document tree at the current schema version (no migration).
Project project_from_json(const json& j);

/// Applies forward migrations in place; throws SchemaFailure for unknown
/// versions.
void migrate(json& doc);

/// Canonical compact text for any tree built by this module.
std::string dump(const json& j);

/// The stored form of an annotation: round-tripped through its canonical
/// JSON so in-memory values match what a saved document holds.
AnnotationSet canonical(const AnnotationSet& a);
PartialCalibration canonical(const PartialCalibration& p);

}  // namespace calib::json_io
