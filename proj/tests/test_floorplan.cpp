#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace floorloc;

namespace {

nlohmann::json plan_json(int w, int h) {
  nlohmann::json j;
  j["resolution_m"] = 0.1;
  j["width"] = w;
  j["height"] = h;
  j["origin"] = {0.0, 0.0};
  j["cells"] = std::vector<int>(static_cast<std::size_t>(w * h), 0);
  return j;
}

nlohmann::json rect_room(const std::string& label, double x0, double y0, double x1, double y1) {
  return {{"label", label}, {"vertices", {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}}};
}

ErrorCode parse_error_code(const nlohmann::json& j) {
  try {
    floorplan_from_json(j);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::io;
}

std::size_t brute_count(const SemanticFloorplan& fp, const std::vector<std::vector<Point2>>& polys) {
  std::size_t n = 0;
  for (int y = 0; y < fp.spec().height_cells; ++y)
    for (int x = 0; x < fp.spec().width_cells; ++x) {
      const Point2 c{(x + 0.5) * fp.spec().resolution, (y + 0.5) * fp.spec().resolution};
      for (const auto& p : polys)
        if (oracle::winding(c, p) != 0) {
          ++n;
          break;
        }
    }
  return n;
}

}  // namespace

TEST(Floorplan, LoadsTenBySevenGrid) {
  const auto fp = floorplan_from_json(plan_json(100, 70));
  EXPECT_EQ(fp.spec().width_cells, 100);
  EXPECT_EQ(fp.spec().height_cells, 70);
  EXPECT_DOUBLE_EQ(fp.spec().resolution, 0.1);
  EXPECT_EQ(fp.free_cell_count(), 7000u);
}

TEST(Floorplan, CellCountMismatchIsRejected) {
  auto j = plan_json(100, 70);
  j["cells"].erase(j["cells"].size() - 1);
  EXPECT_EQ(parse_error_code(j), ErrorCode::dimension_mismatch);
}

TEST(Floorplan, UnknownCodeIsRejected) {
  auto j = plan_json(10, 10);
  j["cells"][17] = kNumClasses + 1;
  EXPECT_EQ(parse_error_code(j), ErrorCode::unknown_code);
  try {
    floorplan_from_json(j);
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("cells[17]"), std::string::npos);
  }
}

TEST(Floorplan, DegeneratePolygonIsRejected) {
  auto j = plan_json(20, 20);
  j["rooms"] = {{{"label", "Hall"}, {"vertices", {{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}}}}};
  EXPECT_EQ(parse_error_code(j), ErrorCode::degenerate_polygon);
  j["rooms"] = {{{"label", "Hall"}, {"vertices", {{0.0, 0.0}, {1.0, 0.0}}}}};
  EXPECT_EQ(parse_error_code(j), ErrorCode::degenerate_polygon);
  j["rooms"] = {{{"label", "Bow"}, {"vertices", {{0.0, 0.0}, {1.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}}}}};
  EXPECT_EQ(parse_error_code(j), ErrorCode::degenerate_polygon);
}

TEST(Floorplan, MalformedDocumentsAreParseErrors) {
  EXPECT_THROW(parse_floorplan("{not json"), Error);
  auto j = plan_json(5, 5);
  j.erase("width");
  EXPECT_EQ(parse_error_code(j), ErrorCode::parse);
}

TEST(Floorplan, RoomMaskCountsMatchBruteForce) {
  auto j = plan_json(100, 70);
  j["rooms"] = {rect_room("W/C", 1.0, 1.0, 3.0, 3.0)};
  const auto fp = floorplan_from_json(j);
  const RoomMask rm = room_mask(fp, "W/C", 36);
  ASSERT_TRUE(rm.found);
  for (int b = 0; b < 36; ++b) EXPECT_EQ(rm.mask.count_in_bin(b), 400u);
  EXPECT_EQ(rm.mask.count_in_bin(0), brute_count(fp, {fp.rooms()[0].vertices}));
}

TEST(Floorplan, AbsentLabelIsSignalled) {
  auto j = plan_json(100, 70);
  j["rooms"] = {rect_room("Kitchen", 1.0, 1.0, 3.0, 3.0)};
  const RoomMask rm = room_mask(floorplan_from_json(j), "Garage", 36);
  EXPECT_FALSE(rm.found);
  EXPECT_EQ(rm.mask.count(), 0u);
}

TEST(Floorplan, RoomMaskUnionsSameLabel) {
  auto j = plan_json(100, 70);
  j["rooms"] = {rect_room("Bedroom", 0.5, 0.5, 3.0, 2.5), rect_room("Kitchen", 3.5, 0.5, 6.0, 3.0),
                {{"label", "Bedroom"}, {"vertices", {{6.5, 1.0}, {9.5, 1.0}, {9.5, 6.5}, {8.0, 6.5}, {8.0, 3.0}, {6.5, 3.0}}}}};
  const auto fp = floorplan_from_json(j);
  const RoomMask rm = room_mask(fp, "Bedroom", 4);
  ASSERT_TRUE(rm.found);
  EXPECT_EQ(rm.mask.count_in_bin(2), brute_count(fp, {fp.rooms()[0].vertices, fp.rooms()[2].vertices}));
  const PoseGrid g{fp.spec(), 4};
  EXPECT_TRUE(rm.mask.at(g.index(10, 10, 0)));  // (1.05, 1.05) in the first bedroom
  EXPECT_TRUE(rm.mask.at(g.index(90, 60, 3)));  // (9.05, 6.05) in the L-shaped one
  EXPECT_FALSE(rm.mask.at(g.index(40, 10, 1)));  // kitchen
  EXPECT_FALSE(rm.mask.at(g.index(70, 50, 1)));  // notch of the L
}

TEST(Floorplan, InteriorMaskPassthrough) {
  auto j = plan_json(6, 4);
  std::vector<int> bits(24, 0);
  bits[7] = bits[8] = bits[15] = 1;
  j["interior"] = bits;
  const PoseMask m = interior_mask(floorplan_from_json(j), 3);
  const PoseGrid g{GridSpec{6, 4, 0.1, {}}, 3};
  for (int b = 0; b < 3; ++b)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 6; ++x) EXPECT_EQ(m.at(g.index(x, y, b)), bits[static_cast<std::size_t>(y * 6 + x)] == 1);
}

TEST(Floorplan, InteriorMaskFromRoomsMatchesArea) {
  auto j = plan_json(100, 70);
  // 4.6 m x 4.2 m = 19.32 m^2 of 70 m^2: 27.6% of the bounding area
  j["rooms"] = {rect_room("Living Room", 1.0, 1.0, 5.6, 5.2)};
  const PoseMask m = interior_mask(floorplan_from_json(j), 36);
  EXPECT_NEAR(static_cast<double>(m.count_in_bin(0)) / 7000.0, 0.276, 1e-9);
}

TEST(Floorplan, NoRoomsMeansNoExclusion) {
  const PoseMask m = interior_mask(floorplan_from_json(plan_json(10, 8)), 36);
  EXPECT_EQ(m.count(), 10u * 8u * 36u);
}

TEST(Floorplan, JsonRoundTrip) {
  SceneParams p;
  p.seed = 5;
  const auto fp = generate_scene(p).plan;
  EXPECT_EQ(parse_floorplan(serialize_floorplan(fp)), fp);
}

TEST(Floorplan, PointInPolygonAgreesWithWinding) {
  const std::vector<Point2> poly{{0, 0}, {4, 0}, {4, 3}, {2, 1.5}, {0, 3}};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.5, 4.5);
  for (int i = 0; i < 2000; ++i) {
    const Point2 p{u(rng), u(rng)};
    EXPECT_EQ(geometry::point_in_polygon(p, poly), oracle::winding(p, poly) != 0) << p.x << "," << p.y;
  }
}
