#include "calib/service.hpp"

#include <httplib.h>

#include <optional>

#include "calib/error.hpp"
#include "calib/json_io.hpp"
#include "calib/pipeline.hpp"

namespace calib {

namespace {

using json_io::json;

constexpr const char* kJson = "application/json";

struct HttpError {
  int status;
  std::string code;
  std::string message;
  json details = json::object();
};

bool want_degrees(const httplib::Request& req) {
  return req.has_param("units") && req.get_param_value("units") == "deg";
}

bool is_angle_key(const std::string& k) {
  return k == "roll" || k == "pitch" || k == "yaw" || k == "theta";
}

void angles_to_degrees(json& j) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (is_angle_key(it.key()) && it->is_number()) {
        *it = json_io::number(rad_to_deg(it->get<double>()));
      } else {
        angles_to_degrees(*it);
      }
    }
  } else if (j.is_array()) {
    for (json& e : j) angles_to_degrees(e);
  }
}

void reply(httplib::Response& res, int status, json body, const httplib::Request& req) {
  if (want_degrees(req)) angles_to_degrees(body);
  res.status = status;
  res.set_content(json_io::dump(body), kJson);
}

void reply_error(httplib::Response& res, const HttpError& e) {
  const json body = {{"code", e.code}, {"message", e.message}, {"details", e.details}};
  res.status = e.status;
  res.set_content(json_io::dump(body), kJson);
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseFailure:
    case ErrorCode::SchemaFailure:
      return 400;
    case ErrorCode::Incomplete:
      return 409;
    case ErrorCode::IoFailure:
      return 500;
    default:
      return 422;
  }
}

HttpError from_calib(const CalibError& e, std::optional<int> status = std::nullopt) {
  json details = json::object();
  if (!e.indices().empty()) details["indices"] = e.indices();
  if (!e.field().empty()) details["field"] = e.field();
  return {status.value_or(status_for(e.code())), std::string(to_string(e.code())), e.what(), details};
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw HttpError{400, "ParseFailure", std::string("malformed JSON body: ") + e.what()};
  }
}

std::optional<std::string> if_match(const httplib::Request& req) {
  if (!req.has_header("If-Match")) return std::nullopt;
  std::string v = req.get_header_value("If-Match");
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  return v;
}

json project_body(const ProjectStore::Snapshot& s) {
  return {{"id", s.project.id}, {"token", s.token}, {"project", json_io::to_json(s.project)}};
}

json overlays_json(const OverlayMap& overlays) {
  json out = json::object();
  for (const auto& [cid, per_marker] : overlays) {
    json cam = json::object();
    for (const auto& [mid, pts] : per_marker) cam[mid] = json_io::to_json(pts);
    out[cid] = cam;
  }
  return out;
}

// Runs a handler body and converts every failure into the error envelope.
template <typename F>
httplib::Server::Handler guarded(const CalibService::AuthHook& auth, F body) {
  return [auth, body](const httplib::Request& req, httplib::Response& res) {
    try {
      if (auth && !auth(req)) throw HttpError{401, "Unauthorized", "request rejected by auth hook"};
      body(req, res);
    } catch (const HttpError& e) {
      reply_error(res, e);
    } catch (const StoreError& e) {
      if (e.kind() == StoreError::Kind::NotFound) reply_error(res, {404, "NotFound", e.what()});
      else reply_error(res, {409, "StaleToken", e.what()});
    } catch (const CalibError& e) {
      reply_error(res, from_calib(e));
    } catch (const std::exception& e) {
      reply_error(res, {500, "InternalError", e.what()});
    }
  };
}

}  // namespace

CalibService::CalibService(ProjectStore& store, AuthHook auth) : store_(store), auth_(std::move(auth)) {}

void CalibService::bind(httplib::Server& server) {
  ProjectStore& store = store_;

  server.Post("/projects", guarded(auth_, [&store](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    Project p;
    if (body.contains("schema_version")) {
      p = parse_project(req.body);
    } else {
      if (!body.is_object() || !body.contains("name") || !body["name"].is_string()) {
        throw HttpError{400, "ParseFailure", "expected {\"name\": string} or a project document"};
      }
      p.name = body["name"].get<std::string>();
    }
    try {
      reply(res, 201, project_body(store.create(std::move(p))), req);
    } catch (const CalibError& e) {
      throw HttpError(from_calib(e, 400));
    }
  }));

  server.Get(R"(/projects/([^/]+))", guarded(auth_, [&store](const httplib::Request& req, httplib::Response& res) {
    const auto snap = store.get(req.matches[1]);
    if (!snap) throw HttpError{404, "NotFound", "unknown project " + std::string(req.matches[1])};
    reply(res, 200, project_body(*snap), req);
  }));

  server.Put(R"(/projects/([^/]+))", guarded(auth_, [&store](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    if (!body.is_object() || !body.contains("token") || !body["token"].is_string() ||
        !body.contains("project")) {
      throw HttpError{400, "ParseFailure", "expected {\"token\": string, \"project\": document}"};
    }
    Project replacement;
    try {
      replacement = parse_project(json_io::dump(body["project"]));
    } catch (const CalibError& e) {
      throw HttpError(from_calib(e, 400));
    }
    const auto snap = store.update(req.matches[1], body["token"].get<std::string>(),
                                   [&](Project& p) { p = replacement; });
    reply(res, 200, project_body(snap), req);
  }));

  server.Post(R"(/projects/([^/]+)/cameras)", guarded(auth_, [&store](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    CameraRecord cam;
    try {
      cam.id = body.at("id").get<std::string>();
      cam.image.width = body.at("width").get<int>();
      cam.image.height = body.at("height").get<int>();
      if (body.contains("image") && body["image"].is_string()) cam.image.ref = body["image"].get<std::string>();
    } catch (const json::exception& e) {
      throw HttpError{400, "ParseFailure", std::string("expected {id, width, height[, image]}: ") + e.what()};
    }
    try {
      const auto snap = store.update(req.matches[1], if_match(req), [&](Project& p) {
        if (p.find_camera(cam.id)) {
          throw HttpError{400, "ValidationFailure", "camera '" + cam.id + "' already exists"};
        }
        p.cameras.push_back(cam);
      });
      reply(res, 201, {{"token", snap.token}, {"camera", json_io::to_json(cam)}}, req);
    } catch (const CalibError& e) {
      throw HttpError(from_calib(e, 400));
    }
  }));

  server.Post(R"(/projects/([^/]+)/cameras/([^/]+)/annotation)",
              guarded(auth_, [&store](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const json& ann_json = body.contains("annotation") ? body["annotation"] : body;
    const AnnotationSet annotation = json_io::annotation_from_json(ann_json);
    const std::string cid = req.matches[2];
    Stage1Outcome outcome;
    const auto snap = store.update(req.matches[1], if_match(req), [&](Project& p) {
      CameraRecord* cam = p.find_camera(cid);
      if (cam == nullptr) throw HttpError{404, "NotFound", "unknown camera " + cid};
      CameraRecord updated = *cam;
      updated.annotation = annotation;
      updated.distortion.reset();
      updated.partial.reset();
      outcome = run_stage1(updated);
      *cam = std::move(updated);
    });
    const CameraRecord& cam = *snap.project.find_camera(cid);
    json out = {{"token", snap.token},
                {"camera", cid},
                {"partial", json_io::to_json(outcome.partial)},
                {"floor_polygon", json_io::to_json(outcome.floor_polygon)},
                {"distortion", cam.distortion ? json_io::to_json(*cam.distortion) : json(nullptr)}};
    if (outcome.distortion) out["distortion_residual_px"] = json_io::number(outcome.distortion->rms_residual_px);
    reply(res, 200, out, req);
  }));

  server.Put(R"(/projects/([^/]+)/cameras/([^/]+)/placement)",
             guarded(auth_, [&store](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    PlacementTransform t = json_io::placement_from_json(body.contains("placement") ? body["placement"] : body);
    if (want_degrees(req)) t.theta = deg_to_rad(t.theta);
    const std::string cid = req.matches[2];
    PlacementOutcome outcome;
    const auto snap = store.update(req.matches[1], if_match(req), [&](Project& p) {
      if (p.find_camera(cid) == nullptr) throw HttpError{404, "NotFound", "unknown camera " + cid};
      outcome = run_placement(p, cid, t);
    });
    json markers = json::object();
    for (const auto& [mid, pts] : outcome.markers) markers[mid] = pts ? json_io::to_json(*pts) : json(nullptr);
    const json out = {{"token", snap.token},
                      {"camera", cid},
                      {"placement", json_io::to_json(*snap.project.find_camera(cid)->placement)},
                      {"model", json_io::to_json(outcome.model)},
                      {"floor_polygon", json_io::to_json(outcome.floor_polygon)},
                      {"prism", json_io::to_json(outcome.prism)},
                      {"markers", markers}};
    reply(res, 200, out, req);
  }));

  server.Post(R"(/projects/([^/]+)/markers)", guarded(auth_, [&store](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const VirtualMarker marker = json_io::marker_from_json(body);
    marker.validate();
    const auto snap = store.update(req.matches[1], if_match(req), [&](Project& p) {
      auto it = std::find_if(p.markers.begin(), p.markers.end(),
                             [&](const VirtualMarker& m) { return m.id == marker.id; });
      if (it != p.markers.end()) *it = marker;
      else p.markers.push_back(marker);
    });
    json overlays = json::object();
    if (!calibrated_models(snap.project).empty()) overlays = overlays_json(marker_overlays(snap.project));
    reply(res, 201, {{"token", snap.token}, {"marker", json_io::to_json(marker)}, {"overlays", overlays}}, req);
  }));

  server.Get(R"(/projects/([^/]+)/markers/overlays)",
             guarded(auth_, [&store](const httplib::Request& req, httplib::Response& res) {
    const auto snap = store.get(req.matches[1]);
    if (!snap) throw HttpError{404, "NotFound", "unknown project " + std::string(req.matches[1])};
    reply(res, 200, {{"token", snap->token}, {"overlays", overlays_json(marker_overlays(snap->project))}}, req);
  }));

  server.Put("/blobs", guarded(auth_, [&store](const httplib::Request& req, httplib::Response& res) {
    reply(res, 201, {{"ref", store.put_blob(req.body)}}, req);
  }));

  server.Get(R"(/blobs/([^/]+))", guarded(auth_, [&store](const httplib::Request& req, httplib::Response& res) {
    const auto blob = store.get_blob(req.matches[1]);
    if (!blob) throw HttpError{404, "NotFound", "unknown blob"};
    res.status = 200;
    res.set_content(*blob, "application/octet-stream");
  }));
}

}  // namespace calib
