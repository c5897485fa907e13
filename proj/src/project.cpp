#include "calib/project.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "calib/digest.hpp"
#include "calib/error.hpp"
#include "calib/json_io.hpp"

namespace calib {

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& msg) {
  throw CalibError(ErrorCode::ValidationFailure, field + ": " + msg, {}, field);
}

}  // namespace

void Project::validate() const {
  if (schema_version != kSchemaVersion) {
    throw CalibError(ErrorCode::SchemaFailure, "unsupported schema_version", {}, "schema_version");
  }
  if (floorplan && !(floorplan->meters_per_pixel > 0.0)) {
    invalid("floorplan.meters_per_pixel", "must be positive");
  }
  std::set<std::string> ids;
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    const CameraRecord& c = cameras[i];
    const std::string path = "cameras[" + std::to_string(i) + "]";
    if (c.id.empty()) invalid(path + ".id", "camera id must not be empty");
    if (!ids.insert(c.id).second) invalid(path + ".id", "duplicate camera id '" + c.id + "'");
    if (c.image.width <= 0 || c.image.height <= 0) {
      invalid(path + ".image", "camera '" + c.id + "' needs positive image dimensions");
    }
    if (c.distortion && !(c.distortion->normalization_radius > 0.0)) {
      invalid(path + ".distortion", "normalization radius must be positive");
    }
    if (c.placement && !c.partial) {
      invalid(path + ".placement", "camera '" + c.id + "' has a placement but no partial calibration");
    }
    if (c.partial && !c.annotation) {
      invalid(path + ".partial", "camera '" + c.id + "' has a partial calibration but no annotation");
    }
    try {
      if (c.partial) c.partial->validate();
      if (c.placement) c.placement->validate();
    } catch (const CalibError& e) {
      invalid(path, "camera '" + c.id + "': " + e.what());
    }
  }
  std::set<std::string> marker_ids;
  for (std::size_t i = 0; i < markers.size(); ++i) {
    const std::string path = "markers[" + std::to_string(i) + "]";
    if (!marker_ids.insert(markers[i].id).second) invalid(path + ".id", "duplicate marker id");
    try {
      markers[i].validate();
    } catch (const CalibError& e) {
      invalid(path, e.what());
    }
  }
}

CameraRecord* Project::find_camera(std::string_view cid) {
  for (CameraRecord& c : cameras) {
    if (c.id == cid) return &c;
  }
  return nullptr;
}

const CameraRecord* Project::find_camera(std::string_view cid) const {
  return const_cast<Project*>(this)->find_camera(cid);
}

std::string serialize_project(const Project& p) {
  p.validate();
  return json_io::dump(json_io::to_json(p));
}

Project parse_project(std::string_view text) {
  json_io::json doc;
  try {
    doc = json_io::json::parse(text);
  } catch (const json_io::json::parse_error& e) {
    throw CalibError(ErrorCode::ParseFailure, std::string("malformed document: ") + e.what());
  }
  json_io::migrate(doc);
  Project p = json_io::project_from_json(doc);
  p.validate();
  return p;
}

void save_project(const Project& p, const std::filesystem::path& destination) {
  const std::string text = serialize_project(p);
  const std::filesystem::path tmp = destination.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CalibError(ErrorCode::IoFailure, "cannot write " + tmp.string());
    out << text << '\n';
    if (!out) throw CalibError(ErrorCode::IoFailure, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, destination, ec);
  if (ec) throw CalibError(ErrorCode::IoFailure, "cannot replace " + destination.string() + ": " + ec.message());
}

Project load_project(const std::filesystem::path& source) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw CalibError(ErrorCode::IoFailure, "cannot read " + source.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_project(ss.str());
}

std::string_view to_string(Stage s) {
  return s == Stage::Annotation ? "annotation" : "placement";
}

std::string annotation_digest(const AnnotationSet& a) {
  return "sha256:" + sha256_hex(json_io::dump(json_io::to_json(a)));
}

}  // namespace calib
