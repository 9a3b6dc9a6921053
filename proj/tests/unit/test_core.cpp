#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "dapose/core/types.hpp"
#include "dapose/util/errors.hpp"

using namespace dapose;
using core::Keypoint;
using core::KeypointAnnotation;
using core::KeypointSchema;

namespace {

std::filesystem::path data_dir() {
  const char* env = std::getenv("DAPOSE_DATA_DIR");
  REQUIRE(env != nullptr);
  return env;
}

KeypointSchema coco17() {
  return KeypointSchema::from_json_file(data_dir() / "schemas" / "coco17.json");
}

KeypointAnnotation valid_annotation(const KeypointSchema& schema) {
  KeypointAnnotation a;
  a.image_id = 1;
  a.keypoints.assign(schema.joint_count(), Keypoint{10.0, 12.0, 2});
  a.bbox = {5, 5, 20, 20};
  a.area = 100.0;
  return a;
}

}  // namespace

TEST_CASE("shipped schemas load and satisfy their invariants") {
  const auto coco = coco17();
  CHECK(coco.joint_count() == 17);
  CHECK(coco.root() == 0);
  CHECK(coco.flip_pairs.size() == 8);

  const auto smil = KeypointSchema::from_json_file(data_dir() / "schemas" / "smil24.json");
  CHECK(smil.joint_count() == 24);
  CHECK(smil.joint_names[0] == "pelvis");
  CHECK(smil.root() == 0);
}

TEST_CASE("validate_annotation") {
  const auto schema = coco17();

  SUBCASE("valid case is empty") {
    const auto a = valid_annotation(schema);
    CHECK(core::validate_annotation(a, schema, 64, 64).empty());
  }

  SUBCASE("out-of-bounds visible keypoint is flagged") {
    auto a = valid_annotation(schema);
    a.keypoints[3] = {-5.0, 10.0, 2};
    const auto v = core::validate_annotation(a, schema, 64, 64);
    REQUIRE(v.size() == 1);
    CHECK(v[0].field == "keypoints[3]");
  }

  SUBCASE("out-of-bounds unlabeled keypoint is fine") {
    auto a = valid_annotation(schema);
    a.keypoints[3] = {-5.0, 10.0, 0};
    CHECK(core::validate_annotation(a, schema, 64, 64).empty());
  }

  SUBCASE("keypoint count mismatch against 23-joint data") {
    auto a = valid_annotation(schema);
    a.keypoints.resize(23, Keypoint{1, 1, 2});
    const auto v = core::validate_annotation(a, schema, 64, 64);
    REQUIRE(v.size() == 1);
    CHECK(v[0].field == "keypoints");
  }

  SUBCASE("bad area and bbox") {
    auto a = valid_annotation(schema);
    a.area = 0.0;
    a.bbox.w = -1.0;
    const auto v = core::validate_annotation(a, schema, 64, 64);
    CHECK(v.size() == 2);
  }

  SUBCASE("idempotent and side-effect free") {
    auto a = valid_annotation(schema);
    a.keypoints[5] = {200.0, 10.0, 1};
    const auto v1 = core::validate_annotation(a, schema, 64, 64);
    const auto v2 = core::validate_annotation(a, schema, 64, 64);
    CHECK(v1.size() == v2.size());
  }
}

TEST_CASE("map_joints") {
  const auto map =
      core::JointMap::from_json_file(data_dir() / "joint_maps" / "smil24_to_coco17.json");
  REQUIRE(map.target_from_source.size() == 17);

  std::vector<Keypoint> smil(24);
  for (int i = 0; i < 24; ++i) smil[i] = {i * 1.5, i * 2.5, 2};

  SUBCASE("mapped coordinates are copied verbatim") {
    const auto coco = core::map_joints(smil, map);
    REQUIRE(coco.size() == 17);
    // left_shoulder: coco index 5 <- smil index 16
    CHECK(coco[5].x == smil[16].x);
    CHECK(coco[5].y == smil[16].y);
    CHECK(coco[5].v == 2);
  }

  SUBCASE("absent joints become (0,0,0)") {
    const auto coco = core::map_joints(smil, map);
    for (int absent : {1, 2, 3, 4}) {  // eyes and ears
      CHECK(coco[absent].x == 0.0);
      CHECK(coco[absent].y == 0.0);
      CHECK(coco[absent].v == 0);
    }
  }

  SUBCASE("round-trip restores the mapped subset") {
    const auto coco = core::map_joints(smil, map);
    const auto back = core::unmap_joints(coco, map, 24);
    for (size_t t = 0; t < map.target_from_source.size(); ++t) {
      const int s = map.target_from_source[t];
      if (s < 0) continue;
      CHECK(back[s].x == smil[s].x);
      CHECK(back[s].y == smil[s].y);
      CHECK(back[s].v == smil[s].v);
    }
  }

  SUBCASE("out-of-range source index is a configuration error") {
    core::JointMap bad = map;
    bad.target_from_source[0] = 99;
    CHECK_THROWS_AS(core::map_joints(smil, bad), util::ConfigError);
  }
}
