#include "calib/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "calib/error.hpp"

namespace calib::json_io {

namespace {

[[noreturn]] void parse_error(const std::string& path, const std::string& what) {
  throw CalibError(ErrorCode::ParseFailure, path + ": " + what, {}, path);
}

const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) parse_error(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) parse_error(path + "." + key, "missing field");
  return *it;
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) parse_error(path, "expected a number");
  return j.get<double>();
}

double number_field(const json& j, const char* key, const std::string& path) {
  return get_number(field(j, key, path), path + "." + key);
}

int int_field(const json& j, const char* key, const std::string& path) {
  const json& v = field(j, key, path);
  if (!v.is_number_integer()) parse_error(path + "." + key, "expected an integer");
  return v.get<int>();
}

std::string string_field(const json& j, const char* key, const std::string& path) {
  const json& v = field(j, key, path);
  if (!v.is_string()) parse_error(path + "." + key, "expected a string");
  return v.get<std::string>();
}

const json* optional_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

const json& array_field(const json& j, const char* key, const std::string& path) {
  const json& v = field(j, key, path);
  if (!v.is_array()) parse_error(path + "." + key, "expected an array");
  return v;
}

ImageLine line_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) parse_error(path, "expected [[u, v], [u, v]]");
  try {
    return ImageLine(pixel_from_json(j[0], path + "[0]"), pixel_from_json(j[1], path + "[1]"));
  } catch (const CalibError& e) {
    if (e.code() == ErrorCode::ParseFailure) throw;
    throw CalibError(ErrorCode::ValidationFailure, path + ": " + e.what(), {}, path);
  }
}

std::vector<ImageLine> lines_from_json(const json& j, const char* key, const std::string& path) {
  std::vector<ImageLine> out;
  const json* arr = optional_field(j, key);
  if (arr == nullptr) return out;
  if (!arr->is_array()) parse_error(path + "." + key, "expected an array");
  for (std::size_t i = 0; i < arr->size(); ++i) {
    out.push_back(line_from_json((*arr)[i], path + "." + key + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<PixelPoint> points_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) parse_error(path, "expected an array of points");
  std::vector<PixelPoint> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(pixel_from_json(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

json lines_json(const std::vector<ImageLine>& lines) {
  json arr = json::array();
  for (const ImageLine& l : lines) arr.push_back(to_json(l));
  return arr;
}

std::string_view shape_name(MarkerShape s) {
  switch (s) {
    case MarkerShape::Point: return "point";
    case MarkerShape::Cross: return "cross";
    case MarkerShape::Square: return "square";
    case MarkerShape::VerticalSegment: return "vertical_segment";
  }
  return "point";
}

}  // namespace

double round_sig9(double v) {
  if (!std::isfinite(v) || v == 0.0) return v == 0.0 ? 0.0 : v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round_sig9(v);
}

json to_json(const PixelPoint& p) { return json::array({number(p.u), number(p.v)}); }

json to_json(const WorldPoint& p) {
  return json::array({number(p.x), number(p.y), number(p.z)});
}

json to_json(const ImageLine& l) { return json::array({to_json(l.a()), to_json(l.b())}); }

json to_json(const std::vector<PixelPoint>& pts) {
  json arr = json::array();
  for (const PixelPoint& p : pts) arr.push_back(to_json(p));
  return arr;
}

json to_json(const AnnotationSet& a) {
  json j;
  j["option"] = a.option == AnnotationOption::Option1 ? "option1" : "option2";
  j["vertical_lines"] = lines_json(a.vertical_lines);
  j["parallel_lines"] = lines_json(a.parallel_lines);
  j["perpendicular_pair"] = lines_json(a.perpendicular_pair);
  j["equal_segments"] = lines_json(a.equal_segments);
  j["efov_polygon"] = to_json(a.efov_polygon);
  json polys = json::array();
  for (const Polyline& pl : a.distortion_polylines) polys.push_back(to_json(pl));
  j["distortion_polylines"] = polys;
  return j;
}

json to_json(const DistortionModel& d) {
  return {{"k1", number(d.k1)}, {"k2", number(d.k2)},
          {"normalization_radius", number(d.normalization_radius)}};
}

json to_json(const PartialCalibration& p) {
  const CameraPose pose = p.default_pose();
  return {{"roll", number(p.roll)},     {"pitch", number(p.pitch)},
          {"focal", number(p.focal)},   {"residual", number(p.residual)},
          {"x0", number(pose.x0)},      {"y0", number(pose.y0)},
          {"z0", number(pose.z0)},      {"yaw", number(pose.yaw)},
          {"annotation_digest", p.annotation_digest}};
}

json to_json(const PlacementTransform& t) {
  return {{"dx", number(t.dx)}, {"dy", number(t.dy)}, {"scale", number(t.scale)},
          {"theta", number(t.theta)}};
}

json to_json(const CameraPose& p) {
  return {{"x0", number(p.x0)},   {"y0", number(p.y0)},       {"z0", number(p.z0)},
          {"yaw", number(p.yaw)}, {"pitch", number(p.pitch)}, {"roll", number(p.roll)}};
}

json to_json(const CameraModel& m) {
  json j = to_json(m.pose);
  j["focal"] = number(m.intrinsics.focal);
  j["width"] = m.intrinsics.width;
  j["height"] = m.intrinsics.height;
  return j;
}

json to_json(const FloorPolygon& poly) {
  json arr = json::array();
  for (const WorldPoint& p : poly) arr.push_back(to_json(p));
  return arr;
}

json to_json(const PrismOverlay& o) {
  json vis = json::array();
  for (bool b : o.visible) vis.push_back(b);
  return {{"base", to_json(o.base)}, {"top", to_json(o.top)}, {"visible", vis}};
}

json to_json(const VirtualMarker& m) {
  return {{"id", m.id},
          {"shape", std::string(shape_name(m.shape))},
          {"side", number(m.side)},
          {"position", to_json(m.position)},
          {"height", number(m.height)}};
}

json to_json(const CameraRecord& c) {
  json j;
  j["id"] = c.id;
  j["image"] = {{"ref", c.image.ref.empty() ? json(nullptr) : json(c.image.ref)},
                {"width", c.image.width},
                {"height", c.image.height}};
  j["distortion"] = c.distortion ? to_json(*c.distortion) : json(nullptr);
  j["annotation"] = c.annotation ? to_json(*c.annotation) : json(nullptr);
  json partial = nullptr;
  if (c.partial) {
    partial = to_json(*c.partial);
  }
  j["partial"] = partial;
  j["placement"] = c.placement ? to_json(*c.placement) : json(nullptr);
  // Output-only convenience: the model implied by the stored partial and
  // placement. Ignored when loading.
  if (c.partial && c.placement) {
    try {
      j["model"] = to_json(
          assemble_full_calibration(*c.partial, apply_placement(*c.partial, *c.placement)));
    } catch (const CalibError&) {
      j["model"] = nullptr;
    }
  }
  return j;
}

json to_json(const Project& p) {
  json j;
  j["schema_version"] = p.schema_version;
  j["id"] = p.id;
  j["name"] = p.name;
  if (p.floorplan) {
    j["floorplan"] = {{"image", p.floorplan->image},
                      {"meters_per_pixel", number(p.floorplan->meters_per_pixel)},
                      {"origin", json::array({number(p.floorplan->origin_x),
                                              number(p.floorplan->origin_y)})}};
  } else {
    j["floorplan"] = nullptr;
  }
  json cams = json::array();
  for (const CameraRecord& c : p.cameras) cams.push_back(to_json(c));
  j["cameras"] = cams;
  json markers = json::array();
  for (const VirtualMarker& m : p.markers) markers.push_back(to_json(m));
  j["markers"] = markers;
  return j;
}

PixelPoint pixel_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) parse_error(path, "expected [u, v]");
  return {get_number(j[0], path + "[0]"), get_number(j[1], path + "[1]")};
}

AnnotationSet annotation_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) parse_error(path, "expected an object");
  AnnotationSet a;
  const std::string opt = string_field(j, "option", path);
  if (opt == "option1") a.option = AnnotationOption::Option1;
  else if (opt == "option2") a.option = AnnotationOption::Option2;
  else parse_error(path + ".option", "expected \"option1\" or \"option2\"");
  a.vertical_lines = lines_from_json(j, "vertical_lines", path);
  a.parallel_lines = lines_from_json(j, "parallel_lines", path);
  a.perpendicular_pair = lines_from_json(j, "perpendicular_pair", path);
  a.equal_segments = lines_from_json(j, "equal_segments", path);
  a.efov_polygon = points_from_json(array_field(j, "efov_polygon", path), path + ".efov_polygon");
  if (const json* polys = optional_field(j, "distortion_polylines")) {
    if (!polys->is_array()) parse_error(path + ".distortion_polylines", "expected an array");
    for (std::size_t i = 0; i < polys->size(); ++i) {
      a.distortion_polylines.push_back(points_from_json(
          (*polys)[i], path + ".distortion_polylines[" + std::to_string(i) + "]"));
    }
  }
  return a;
}

DistortionModel distortion_from_json(const json& j, const std::string& path) {
  return {number_field(j, "k1", path), number_field(j, "k2", path),
          number_field(j, "normalization_radius", path)};
}

PlacementTransform placement_from_json(const json& j, const std::string& path) {
  return {number_field(j, "dx", path), number_field(j, "dy", path),
          number_field(j, "scale", path), number_field(j, "theta", path)};
}

VirtualMarker marker_from_json(const json& j, const std::string& path) {
  VirtualMarker m;
  m.id = string_field(j, "id", path);
  const std::string shape = string_field(j, "shape", path);
  if (shape == "point") m.shape = MarkerShape::Point;
  else if (shape == "cross") m.shape = MarkerShape::Cross;
  else if (shape == "square") m.shape = MarkerShape::Square;
  else if (shape == "vertical_segment") m.shape = MarkerShape::VerticalSegment;
  else parse_error(path + ".shape", "unknown marker shape '" + shape + "'");
  if (const json* s = optional_field(j, "side")) m.side = get_number(*s, path + ".side");
  if (const json* h = optional_field(j, "height")) m.height = get_number(*h, path + ".height");
  const json& pos = field(j, "position", path);
  if (!pos.is_array() || pos.size() != 3) parse_error(path + ".position", "expected [x, y, z]");
  m.position = {get_number(pos[0], path + ".position[0]"), get_number(pos[1], path + ".position[1]"),
                get_number(pos[2], path + ".position[2]")};
  return m;
}

CameraRecord camera_from_json(const json& j, const std::string& path) {
  CameraRecord c;
  c.id = string_field(j, "id", path);
  const json& img = field(j, "image", path);
  if (const json* ref = optional_field(img, "ref")) {
    if (!ref->is_string()) parse_error(path + ".image.ref", "expected a string");
    c.image.ref = ref->get<std::string>();
  }
  c.image.width = int_field(img, "width", path + ".image");
  c.image.height = int_field(img, "height", path + ".image");
  if (const json* d = optional_field(j, "distortion")) {
    c.distortion = distortion_from_json(*d, path + ".distortion");
  }
  if (const json* a = optional_field(j, "annotation")) {
    c.annotation = annotation_from_json(*a, path + ".annotation");
  }
  if (const json* p = optional_field(j, "partial")) {
    const std::string pp = path + ".partial";
    PartialCalibration part;
    part.roll = number_field(*p, "roll", pp);
    part.pitch = number_field(*p, "pitch", pp);
    part.focal = number_field(*p, "focal", pp);
    part.residual = number_field(*p, "residual", pp);
    if (const json* d = optional_field(*p, "annotation_digest")) {
      if (!d->is_string()) parse_error(pp + ".annotation_digest", "expected a string");
      part.annotation_digest = d->get<std::string>();
    }
    part.width = c.image.width;
    part.height = c.image.height;
    c.partial = part;
  }
  if (const json* t = optional_field(j, "placement")) {
    c.placement = placement_from_json(*t, path + ".placement");
  }
  return c;
}

Project project_from_json(const json& j) {
  if (!j.is_object()) parse_error("$", "document must be an object");
  Project p;
  p.schema_version = int_field(j, "schema_version", "$");
  if (const json* id = optional_field(j, "id")) {
    if (!id->is_string()) parse_error("id", "expected a string");
    p.id = id->get<std::string>();
  }
  p.name = string_field(j, "name", "$");
  if (const json* fp = optional_field(j, "floorplan")) {
    Floorplan f;
    f.image = string_field(*fp, "image", "floorplan");
    f.meters_per_pixel = number_field(*fp, "meters_per_pixel", "floorplan");
    const json& origin = field(*fp, "origin", "floorplan");
    if (!origin.is_array() || origin.size() != 2) parse_error("floorplan.origin", "expected [x, y]");
    f.origin_x = get_number(origin[0], "floorplan.origin[0]");
    f.origin_y = get_number(origin[1], "floorplan.origin[1]");
    p.floorplan = f;
  }
  const json& cams = array_field(j, "cameras", "$");
  for (std::size_t i = 0; i < cams.size(); ++i) {
    p.cameras.push_back(camera_from_json(cams[i], "cameras[" + std::to_string(i) + "]"));
  }
  const json& markers = array_field(j, "markers", "$");
  for (std::size_t i = 0; i < markers.size(); ++i) {
    p.markers.push_back(marker_from_json(markers[i], "markers[" + std::to_string(i) + "]"));
  }
  return p;
}

void migrate(json& doc) {
  if (!doc.is_object()) parse_error("$", "document must be an object");
  auto it = doc.find("schema_version");
  if (it == doc.end() || !it->is_number_integer()) {
    throw CalibError(ErrorCode::SchemaFailure, "missing or non-integer schema_version", {},
                     "schema_version");
  }
  const int version = it->get<int>();
  if (version < 1 || version > kSchemaVersion) {
    throw CalibError(ErrorCode::SchemaFailure,
                     "unsupported schema_version " + std::to_string(version), {}, "schema_version");
  }
  if (version == 1) {
    // Version 1 stored the stage-2 result as a pose {x0, y0, z0, yaw} and
    // had no marker list.
    if (auto cams = doc.find("cameras"); cams != doc.end() && cams->is_array()) {
      for (json& cam : *cams) {
        auto pose = cam.find("pose");
        if (pose == cam.end()) continue;
        if (!pose->is_null()) {
          const std::string path = "cameras.pose";
          cam["placement"] = {{"dx", number_field(*pose, "x0", path)},
                              {"dy", number_field(*pose, "y0", path)},
                              {"scale", number_field(*pose, "z0", path) / kDefaultMountHeight},
                              {"theta", number_field(*pose, "yaw", path)}};
        }
        cam.erase("pose");
      }
    }
    if (!doc.contains("markers")) doc["markers"] = json::array();
    doc["schema_version"] = 2;
  }
}

std::string dump(const json& j) { return j.dump(); }

AnnotationSet canonical(const AnnotationSet& a) {
  return annotation_from_json(json::parse(dump(to_json(a))));
}

PartialCalibration canonical(const PartialCalibration& p) {
  PartialCalibration out = p;
  out.roll = round_sig9(p.roll);
  out.pitch = round_sig9(p.pitch);
  out.focal = round_sig9(p.focal);
  out.residual = round_sig9(p.residual);
  return out;
}

}  // namespace calib::json_io
