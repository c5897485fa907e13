#pragma once

#include <functional>
#include <string>

#include "calib/store.hpp"

namespace httplib {
class Server;
struct Request;
}  // namespace httplib

namespace calib {

/// HTTP front end of the calibration workflow. Handlers are stateless;
/// everything lives in the ProjectStore. Angles are radians unless the
/// query carries units=deg, which converts both request and response angle
/// fields (roll, pitch, yaw, theta).
///
/// Routes:
///   POST /projects                                   create
///   GET  /projects/{id}                              read
///   PUT  /projects/{id}                              replace (token required)
///   POST /projects/{id}/cameras                      add a camera
///   POST /projects/{id}/cameras/{cid}/annotation     stage 1
///   PUT  /projects/{id}/cameras/{cid}/placement      stage 2
///   POST /projects/{id}/markers                      add or replace a marker
///   GET  /projects/{id}/markers/overlays             per-camera marker overlays
///   PUT  /blobs                                      content-addressed upload
///   GET  /blobs/{ref}
///
/// Mutations accept an If-Match header with the version token; a stale
/// token yields 409. Errors use the envelope {code, message, details}.
class CalibService {
 public:
  /// Optional hook run before every request; returning false answers 401.
  using AuthHook = std::function<bool(const httplib::Request&)>;

  explicit CalibService(ProjectStore& store, AuthHook auth = {});

  void bind(httplib::Server& server);

 private:
  ProjectStore& store_;
  AuthHook auth_;
};

}  // namespace calib
