#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "calib/digest.hpp"
#include "calib/error.hpp"
#include "calib/json_io.hpp"
#include "calib/project.hpp"
#include "calib/store.hpp"
#include "fixtures.hpp"

namespace {

using calib::ErrorCode;
using calib::json_io::json;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const calib::CalibError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no CalibError thrown";
  return ErrorCode::ValidationFailure;
}

TEST(ProjectFormat, RoundTripIsLossless) {
  calib::Project p = fixtures::three_camera_project(2);
  p.floorplan = calib::Floorplan{"sha256:abc", 0.05, 1.5, -2.0};
  p.markers.push_back({"m1", calib::MarkerShape::Cross, 0.5, {1, 2, 0}, 0});
  const std::string text = calib::serialize_project(p);
  const calib::Project back = calib::parse_project(text);
  EXPECT_EQ(calib::serialize_project(back), text);
  // Stage-1 output is stored canonically, so the parsed project is equal.
  EXPECT_EQ(back.cameras, p.cameras);
  EXPECT_EQ(back.floorplan, p.floorplan);
  EXPECT_EQ(back.markers, p.markers);
}

TEST(ProjectFormat, KeysAreSortedAndNumbersHaveNineDigits) {
  calib::Project p;
  p.name = "n";
  p.floorplan = calib::Floorplan{"", 0.123456789123, 0, 0};
  const json j = json::parse(calib::serialize_project(p));
  EXPECT_EQ(j["floorplan"]["meters_per_pixel"].get<double>(), 0.123456789);
  const std::string text = calib::serialize_project(p);
  EXPECT_LT(text.find("\"cameras\""), text.find("\"markers\""));
  EXPECT_LT(text.find("\"markers\""), text.find("\"schema_version\""));
}

TEST(ProjectFormat, DerivedModelIsOutputOnly) {
  const calib::Project p = fixtures::three_camera_project(2);
  json j = json::parse(calib::serialize_project(p));
  ASSERT_TRUE(j["cameras"][0].contains("model"));
  j["cameras"][0]["model"]["focal"] = 1.0;
  const calib::Project back = calib::parse_project(j.dump());
  EXPECT_EQ(back.cameras[0], p.cameras[0]);
}

TEST(ProjectFormat, MigratesVersionOne) {
  const json v1 = {{"schema_version", 1},
                   {"id", "p1"},
                   {"name", "old"},
                   {"floorplan", nullptr},
                   {"cameras",
                    json::array({{{"id", "a"},
                                  {"image", {{"ref", nullptr}, {"width", 640}, {"height", 480}}},
                                  {"annotation", nullptr},
                                  {"partial", nullptr},
                                  {"distortion", nullptr},
                                  {"pose", nullptr}}})}};
  const calib::Project p = calib::parse_project(v1.dump());
  EXPECT_EQ(p.schema_version, calib::kSchemaVersion);
  EXPECT_TRUE(p.markers.empty());
  EXPECT_FALSE(p.cameras[0].placement);

  // A v1 pose becomes the equivalent placement (z0 = 3 * scale).
  const calib::Project full = fixtures::three_camera_project(2);
  json doc = json::parse(calib::serialize_project(full));
  doc["schema_version"] = 1;
  doc.erase("markers");
  for (json& cam : doc["cameras"]) {
    const json model = cam["model"];
    cam["pose"] = {{"x0", model["x0"]}, {"y0", model["y0"]}, {"z0", model["z0"]}, {"yaw", model["yaw"]}};
    cam.erase("placement");
  }
  const calib::Project migrated = calib::parse_project(doc.dump());
  for (std::size_t i = 0; i < full.cameras.size(); ++i) {
    const auto& a = *full.cameras[i].placement;
    const auto& b = *migrated.cameras[i].placement;
    EXPECT_NEAR(a.dx, b.dx, 1e-8 * (1 + std::abs(a.dx)));
    EXPECT_NEAR(a.scale, b.scale, 1e-8);
    EXPECT_NEAR(a.theta, b.theta, 1e-8);
  }
}

TEST(ProjectFormat, RejectsBadDocuments) {
  EXPECT_EQ(code_of([] { calib::parse_project("{not json"); }), ErrorCode::ParseFailure);
  EXPECT_EQ(code_of([] { calib::parse_project(R"({"schema_version": 7})"); }), ErrorCode::SchemaFailure);
  EXPECT_EQ(code_of([] { calib::parse_project(R"({"name": "x"})"); }), ErrorCode::SchemaFailure);

  calib::Project p = fixtures::three_camera_project(0);
  p.cameras[1].id = p.cameras[0].id;
  EXPECT_EQ(code_of([&] { calib::serialize_project(p); }), ErrorCode::ValidationFailure);

  json j = json::parse(calib::serialize_project(fixtures::three_camera_project(0)));
  j["cameras"][0]["annotation"]["vertical_lines"][0] = json::array({json::array({1, 1}), json::array({1, 1})});
  EXPECT_EQ(code_of([&] { calib::parse_project(j.dump()); }), ErrorCode::ValidationFailure);
  j = json::parse(calib::serialize_project(fixtures::three_camera_project(0)));
  j["cameras"][0]["image"]["width"] = "wide";
  EXPECT_EQ(code_of([&] { calib::parse_project(j.dump()); }), ErrorCode::ParseFailure);
}

TEST(ProjectFormat, SaveAndLoad) {
  fixtures::TempDir dir;
  const calib::Project p = fixtures::three_camera_project(1);
  calib::save_project(p, dir.path() / "p.json");
  EXPECT_FALSE(std::filesystem::exists(dir.path() / "p.json.tmp"));
  EXPECT_EQ(calib::load_project(dir.path() / "p.json"), p);
  EXPECT_EQ(code_of([&] { calib::load_project(dir.path() / "missing.json"); }), ErrorCode::IoFailure);
  EXPECT_EQ(code_of([&] { calib::save_project(p, dir.path() / "no" / "such" / "dir.json"); }),
            ErrorCode::IoFailure);
}

TEST(DeriveModel, ReportsMissingStages) {
  calib::Project p = fixtures::three_camera_project(0);
  auto r = calib::derive_model(p.cameras[0]);
  ASSERT_TRUE(std::holds_alternative<calib::Incomplete>(r));
  // An annotation alone is enough to recompute stage 1, but not placement.
  EXPECT_EQ(std::get<calib::Incomplete>(r).missing, calib::Stage::Placement);
  p.cameras[0].annotation.reset();
  r = calib::derive_model(p.cameras[0]);
  EXPECT_EQ(std::get<calib::Incomplete>(r).missing, calib::Stage::Annotation);
}

TEST(DeriveModel, UsesStoredPartialOnlyWhenDigestMatches) {
  calib::Project p = fixtures::three_camera_project(2);
  calib::CameraRecord& c = p.cameras[0];
  const auto m1 = std::get<calib::CameraModel>(calib::derive_model(c));
  EXPECT_EQ(m1.intrinsics.focal, c.partial->focal);
  EXPECT_EQ(m1.pose.z0, 3.0 * c.placement->scale);

  c.partial->focal *= 1.1;
  EXPECT_EQ(std::get<calib::CameraModel>(calib::derive_model(c)).intrinsics.focal, c.partial->focal);
  c.partial->annotation_digest = "sha256:stale";
  const auto m3 = std::get<calib::CameraModel>(calib::derive_model(c));
  EXPECT_NEAR(m3.intrinsics.focal, m1.intrinsics.focal, 1e-6 * m1.intrinsics.focal);
}

TEST(DeriveModel, DigestTracksAnnotationContent) {
  const calib::Project p = fixtures::three_camera_project(0);
  const auto d0 = calib::annotation_digest(*p.cameras[0].annotation);
  EXPECT_EQ(d0.rfind("sha256:", 0), 0u);
  EXPECT_EQ(d0.size(), 7u + 64u);
  EXPECT_EQ(d0, calib::annotation_digest(*p.cameras[0].annotation));
  EXPECT_NE(d0, calib::annotation_digest(*p.cameras[1].annotation));
}

TEST(Digest, KnownVector) {
  EXPECT_EQ(calib::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Store, CreateGetUpdate) {
  calib::ProjectStore store;
  calib::Project p;
  p.name = "a";
  const auto s1 = store.create(p);
  EXPECT_EQ(s1.project.id, "p1");
  EXPECT_EQ(s1.token, "1");
  EXPECT_EQ(store.create(p).project.id, "p2");
  const auto s2 = store.update("p1", std::string("1"), [](calib::Project& q) { q.name = "b"; });
  EXPECT_EQ(s2.token, "2");
  EXPECT_EQ(store.get("p1")->project.name, "b");
  EXPECT_FALSE(store.get("p9"));
}

TEST(Store, StaleTokenAndFailedMutationsLeaveStateUntouched) {
  calib::ProjectStore store;
  store.create(calib::Project{});
  try {
    store.update("p1", std::string("7"), [](calib::Project& q) { q.name = "x"; });
    FAIL();
  } catch (const calib::StoreError& e) {
    EXPECT_EQ(e.kind(), calib::StoreError::Kind::StaleToken);
  }
  EXPECT_THROW(store.update("p1", std::nullopt, [](calib::Project& q) {
                 q.name = "x";
                 throw std::runtime_error("boom");
               }),
               std::runtime_error);
  EXPECT_THROW(store.update("p1", std::nullopt,
                            [](calib::Project& q) { q.cameras.push_back(calib::CameraRecord{}); }),
               calib::CalibError);
  const auto s = store.get("p1");
  EXPECT_EQ(s->token, "1");
  EXPECT_EQ(s->project.name, "");
  try {
    store.update("nope", std::nullopt, [](calib::Project&) {});
    FAIL();
  } catch (const calib::StoreError& e) {
    EXPECT_EQ(e.kind(), calib::StoreError::Kind::NotFound);
  }
}

TEST(Store, ConcurrentUpdatesAreSerialized) {
  calib::ProjectStore store;
  store.create(calib::Project{});
  std::vector<std::thread> threads;
  std::atomic<int> stale{0};
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 50; ++i) {
        for (;;) {
          const auto snap = store.get("p1");
          try {
            store.update("p1", snap->token, [](calib::Project& q) { q.name += "x"; });
            break;
          } catch (const calib::StoreError&) {
            ++stale;
          }
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  const auto s = store.get("p1");
  EXPECT_EQ(s->project.name.size(), 400u);
  EXPECT_EQ(s->token, "401");
}

TEST(Store, BlobsAreContentAddressed) {
  calib::ProjectStore store;
  const std::string ref = store.put_blob("abc");
  EXPECT_EQ(ref, "sha256:ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(store.put_blob("abc"), ref);
  EXPECT_EQ(*store.get_blob(ref), "abc");
  EXPECT_FALSE(store.get_blob("sha256:00"));
}

TEST(Store, PersistsToDataDirectory) {
  fixtures::TempDir dir;
  std::string ref;
  {
    calib::ProjectStore store(dir.path());
    calib::Project p = fixtures::three_camera_project(1);
    store.create(p);
    store.update("p1", std::nullopt, [](calib::Project& q) { q.name = "persisted"; });
    ref = store.put_blob("image bytes");
  }
  calib::ProjectStore reopened(dir.path());
  const auto s = reopened.get("p1");
  ASSERT_TRUE(s);
  EXPECT_EQ(s->project.name, "persisted");
  EXPECT_EQ(*reopened.get_blob(ref), "image bytes");
  EXPECT_EQ(reopened.create(calib::Project{}).project.id, "p2");
}

}  // namespace
