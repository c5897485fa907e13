#pragma once

// Project documents built from oracle scenes.

#include <filesystem>
#include <string>

#include "calib/pipeline.hpp"
#include "oracle.hpp"

namespace fixtures {

/// Three cameras with oracle annotations around a shared floor area near
/// the origin; `stage` = 0 leaves them raw, 1 runs stage 1, 2 also applies
/// the aligning placement.
calib::Project three_camera_project(int stage);

/// Placement that maps the stage-1 footprint onto the true one.
calib::PlacementTransform aligning_placement(const calib::FloorPolygon& stage1,
                                             const std::vector<calib::WorldPoint>& truth);

const std::vector<oracle::TrueCamera>& three_cameras();

/// Fresh temporary directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
