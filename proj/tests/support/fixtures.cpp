#include "fixtures.hpp"

#include <atomic>
#include <cmath>
#include <unistd.h>

namespace fixtures {

const std::vector<oracle::TrueCamera>& three_cameras() {
  static const std::vector<oracle::TrueCamera> cams{
      {-8.0, -6.0, 4.0, std::atan2(6.0, 8.0), -0.5, 0.03, 1000, 1280, 720},
      {9.0, -4.0, 3.5, std::atan2(4.0, -9.0), -0.45, -0.02, 1200, 1280, 720},
      {0.0, 12.0, 5.0, -calib::kPi / 2, -0.6, 0.01, 900, 1280, 720},
  };
  return cams;
}

calib::PlacementTransform aligning_placement(const calib::FloorPolygon& stage1,
                                             const std::vector<calib::WorldPoint>& truth) {
  const oracle::Similarity s = oracle::fit_similarity(stage1, truth);
  return {s.b.real(), s.b.imag(), std::abs(s.a), std::arg(s.a)};
}

calib::Project three_camera_project(int stage) {
  calib::Project p;
  p.name = "three cameras";
  oracle::Rng rng(9001);
  int index = 0;
  for (const oracle::TrueCamera& c : three_cameras()) {
    const auto option = index == 1 ? calib::AnnotationOption::Option2 : calib::AnnotationOption::Option1;
    std::optional<oracle::Scene> s;
    while (!s) s = oracle::render_scene(c, option, rng);
    calib::CameraRecord rec;
    rec.id = "cam" + std::to_string(++index);
    rec.image = {"", c.width, c.height};
    rec.annotation = s->annotation;
    p.cameras.push_back(rec);
    if (stage >= 1) {
      const calib::Stage1Outcome out = calib::run_stage1(p.cameras.back());
      if (stage >= 2) calib::run_placement(p, rec.id, aligning_placement(out.floor_polygon, s->footprint));
    }
  }
  return p;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("calib-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace fixtures
