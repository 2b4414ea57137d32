#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace floorloc;

namespace {

ProbabilityVolume random_volume(std::mt19937_64& rng, int w, int h, int bins, int levels) {
  ProbabilityVolume v(PoseGrid{GridSpec{w, h, 0.1, {}}, bins});
  std::uniform_int_distribution<int> q(0, levels);
  for (double& x : v.values()) x = q(rng) / static_cast<double>(levels);
  return v;
}

void expect_same_as_oracle(const ProbabilityVolume& v, int k, double delta) {
  const auto got = topk_candidates(v, k, delta);
  const auto want = oracle::greedy_nms(v, k, delta);
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i].index, (VolumeIndex{want[i].x, want[i].y, want[i].bin})) << "rank " << i;
    EXPECT_EQ(got[i].coarse_score, want[i].score);
  }
}

// One-meter corridor along x with walls on rows 0 and 11. A short door run
// on the far wall at cells [door_x, door_x + 2] is visible only to the outer
// high-resolution rays of a pose looking across the corridor from
// door_x - 7, not to its seven coarse rays. A wall at end_x closes the
// corridor on the left; the near wall is glazed so that poses looking the
// other way are told apart by their labels.
SemanticFloorplan corridor(int end_x, int door_x) {
  const int w = 80, h = 12;
  std::vector<SemanticClass> cells(static_cast<std::size_t>(w * h), SemanticClass::empty);
  auto set = [&](int x, int y, SemanticClass c) { cells[static_cast<std::size_t>(y * w + x)] = c; };
  for (int x = 0; x < w; ++x) set(x, 0, SemanticClass::window), set(x, h - 1, SemanticClass::wall);
  for (int y = 0; y < h; ++y) {
    set(w - 1, y, SemanticClass::wall);
    for (int x = 0; x <= end_x; ++x) set(x, y, SemanticClass::wall);
  }
  for (int x = door_x; x < door_x + 3; ++x) set(x, h - 1, SemanticClass::door);
  return SemanticFloorplan(GridSpec{w, h, 0.1, {}}, std::move(cells));
}

}  // namespace

TEST(TopK, SingleCandidateIsArgmax) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto v = random_volume(rng, 9, 7, 6, 1000);
    const auto c = topk_candidates(v, 1, 0.1);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].index, argmax_index(v));
    const Pose p = argmax_pose(v);
    EXPECT_EQ(c[0].pose.x, p.x);
    EXPECT_EQ(c[0].pose.y, p.y);
    EXPECT_EQ(c[0].pose.theta_deg, p.theta_deg);
  }
}

TEST(TopK, NearbyEqualPeakIsSuppressed) {
  ProbabilityVolume v(PoseGrid{GridSpec{40, 40, 0.05, {}}, 4});
  v.at(10, 10, 0) = 0.4;
  v.at(11, 10, 2) = 0.4;  // 0.05 m away
  v.at(30, 30, 1) = 0.1;
  const auto c = topk_candidates(v, 2, 0.1);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].index, (VolumeIndex{10, 10, 0}));
  EXPECT_EQ(c[1].index, (VolumeIndex{30, 30, 1}));
}

TEST(TopK, SeparationIsEuclideanAndInclusive) {
  ProbabilityVolume v(PoseGrid{GridSpec{20, 20, 0.1, {}}, 2});
  v.at(5, 5, 0) = 1.0;
  v.at(15, 5, 0) = 0.9;  // exactly 1 m away: kept
  v.at(5, 15, 0) = 0.8;  // exactly 1 m from the first, 1.41 m from the second: kept
  v.at(12, 12, 0) = 0.85;  // 0.99 m from the first: suppressed
  v.at(6, 6, 1) = 0.95;  // 0.14 m away: suppressed
  const auto c = topk_candidates(v, 5, 1.0);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[1].index, (VolumeIndex{15, 5, 0}));
  EXPECT_EQ(c[2].index, (VolumeIndex{5, 15, 0}));
}

TEST(TopK, MatchesGreedyOracleOnSceneVolume) {
  SceneParams p;
  p.seed = 21;
  p.extent_x = 6.0;
  p.extent_y = 5.0;
  const auto s = generate_scene(p);
  const PoseGrid g{s.plan.spec(), 36};
  std::mt19937_64 rng(9);
  const Point2 q = sample_position(s.plan, s.room_rects[0], rng);
  const RayBundle obs = perturb(cast_bundle(s.plan, {q.x, q.y, 33.0}, CameraModel{60.0, 7, 15.0}), NoiseModel{0.1, 0.1, 2});
  const auto v = build_depth_volume(s.plan, obs.depths, CameraModel{60.0, 7, 15.0}, g);
  expect_same_as_oracle(v, 5, 1.0);
}

TEST(TopK, MatchesGreedyOracleOnRandomVolumes) {
  std::mt19937_64 rng(100);
  std::uniform_int_distribution<int> dim(3, 14), bins(1, 8), k(1, 8), levels(2, 50);
  std::uniform_real_distribution<double> delta(0.0, 0.6);
  for (int t = 0; t < 100; ++t) {
    const auto v = random_volume(rng, dim(rng), dim(rng), bins(rng), levels(rng));
    expect_same_as_oracle(v, k(rng), delta(rng));
  }
}

TEST(TopK, ShorterListIsPrefix) {
  std::mt19937_64 rng(4);
  const auto v = random_volume(rng, 12, 10, 6, 30);
  const auto five = topk_candidates(v, 5, 0.3);
  const auto three = topk_candidates(v, 3, 0.3);
  ASSERT_EQ(three.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(three[i].index, five[i].index);
}

TEST(TopK, Errors) {
  ProbabilityVolume v(PoseGrid{GridSpec{4, 4, 0.1, {}}, 2});
  EXPECT_THROW(topk_candidates(v, 3, 0.1), Error);  // all zero
  v.at(1, 1, 1) = 1.0;
  EXPECT_THROW(topk_candidates(v, 0, 0.1), Error);
  EXPECT_THROW(topk_candidates(v, 1, -1.0), Error);
  EXPECT_EQ(topk_candidates(v, 4, 0.0).size(), 1u);
}

TEST(Augment, Counts) {
  const Pose p{1.0, 2.0, 0.0};
  const auto three = augment_angles(p, 5.0, 5.0);
  ASSERT_EQ(three.size(), 3u);
  EXPECT_DOUBLE_EQ(three[0].theta_deg, 355.0);
  EXPECT_DOUBLE_EQ(three[1].theta_deg, 0.0);
  EXPECT_DOUBLE_EQ(three[2].theta_deg, 5.0);
  EXPECT_EQ(augment_angles(p, 0.0, 0.0).size(), 1u);
  EXPECT_EQ(augment_angles(p, 5.0, 10.0).size(), 5u);
  EXPECT_THROW(augment_angles(p, 3.0, 5.0), Error);
  EXPECT_THROW(augment_angles(p, 0.0, 5.0), Error);
}

TEST(Refine, SingleCandidateWithoutAugmentationIsReturned) {
  SceneParams sp;
  sp.seed = 2;
  const auto s = generate_scene(sp);
  std::mt19937_64 rng(1);
  const Point2 q = sample_position(s.plan, s.room_rects[1], rng);
  const RayBundle pred = cast_bundle(s.plan, {q.x, q.y, 10.0}, CameraModel{});
  Candidate c;
  std::mt19937_64 r2(7);
  const Point2 far = sample_position(s.plan, s.room_rects[0], r2);
  c.pose = {far.x, far.y, 250.0};
  c.coarse_score = 0.01;
  RefinementConfig cfg;
  cfg.delta_ang = 0.0;
  cfg.delta_max = 0.0;
  const RefineResult r = refine(s.plan, pred, {c}, cfg);
  EXPECT_EQ(r.pose.x, c.pose.x);
  EXPECT_EQ(r.pose.y, c.pose.y);
  EXPECT_EQ(r.pose.theta_deg, 250.0);
  EXPECT_EQ(r.evaluated, 1u);
  EXPECT_FALSE(r.fallback);
}

TEST(Refine, ScoresAreMinimaOverAugmentedAngles) {
  SceneParams sp;
  sp.seed = 13;
  const auto s = generate_scene(sp);
  std::mt19937_64 rng(5);
  const Point2 q = sample_position(s.plan, s.room_rects[0], rng);
  const RayBundle pred = perturb(cast_bundle(s.plan, {q.x, q.y, 71.0}, CameraModel{}), NoiseModel{0.1, 0.1, 1});
  std::vector<Candidate> cands;
  for (int i = 0; i < 4; ++i) {
    const Point2 p = sample_position(s.plan, s.room_rects[static_cast<std::size_t>(i) % s.room_rects.size()], rng);
    Candidate c;
    c.pose = {p.x, p.y, 40.0 * i};
    c.coarse_score = 1.0 - 0.1 * i;
    cands.push_back(c);
  }
  for (double alpha : {0.0, 0.6, 1.0}) {
    RefinementConfig cfg;
    cfg.alpha = alpha;
    cfg.delta_max = 10.0;
    const RefineResult r = refine(s.plan, pred, cands, cfg);
    double best = 1e300;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      double m = 1e300;
      for (int step = -2; step <= 2; ++step) {
        const Pose p{cands[i].pose.x, cands[i].pose.y, cands[i].pose.theta_deg + 5.0 * step};
        m = std::min(m, ray_similarity(pred, cast_bundle(s.plan, p, CameraModel{}), {alpha}));
      }
      ASSERT_TRUE(r.candidates[i].refined_score.has_value());
      EXPECT_NEAR(*r.candidates[i].refined_score, m, 1e-12);
      best = std::min(best, m);
    }
    EXPECT_NEAR(ray_similarity(pred, cast_bundle(s.plan, r.pose, CameraModel{}), {alpha}), best, 1e-12);
    EXPECT_EQ(r.evaluated, 20u);
  }
}

TEST(Refine, AllCandidatesInStructureFallBack) {
  const auto fp = oracle::box_room(20);
  const RayBundle pred = cast_bundle(fp, {1.0, 1.0, 0.0}, CameraModel{});
  Candidate a, b;
  a.pose = {0.05, 1.0, 0.0};
  a.coarse_score = 0.6;
  b.pose = {1.0, 2.15, 90.0};
  b.coarse_score = 0.4;
  const RefineResult r = refine(fp, pred, {a, b}, RefinementConfig{});
  EXPECT_TRUE(r.fallback);
  EXPECT_EQ(r.pose.x, a.pose.x);
  EXPECT_EQ(r.evaluated, 0u);
}

TEST(Refine, RecoversTruePoseRankedThirdByCoarseVolume) {
  // Slide the left end wall until exactly two coarse-identical poses precede
  // the true one in the candidate list.
  PipelineConfig cfg;
  cfg.use_interior_mask = false;
  bool found = false;
  for (int end_x = 0; end_x < 28 && !found; ++end_x) {
    const int door_x = 35;
    const auto fp = corridor(end_x, door_x);
    const PoseGrid g{fp.spec(), cfg.orientation_bins};
    const Pose truth = g.pose_of(door_x - 7, 1, 9);
    const RayBundle pred = cast_bundle(fp, truth, cfg.camera);

    PipelineConfig coarse = cfg;
    coarse.refine = false;
    const Localizer loc(fp, cfg);
    const auto obs = loc.prepare(pred);
    const auto post = loc.posterior(loc.depth_volume(obs), loc.semantic_volume(obs), std::nullopt);
    const auto cands = loc.candidates(post.masked, cfg.top_k);
    std::size_t rank = cands.size();
    for (std::size_t i = 0; i < cands.size(); ++i)
      if (cands[i].index == VolumeIndex{door_x - 7, 1, 9}) rank = i;
    if (rank != 2) continue;
    found = true;

    EXPECT_EQ(cands[0].coarse_score, cands[2].coarse_score);
    const LocalizeResult top1 = Localizer(fp, coarse).localize(pred);
    EXPECT_GT(translation_distance(top1.pose, truth), 0.15);

    const LocalizeResult r = loc.localize(pred);
    EXPECT_NEAR(r.pose.x, truth.x, 1e-12);
    EXPECT_NEAR(r.pose.y, truth.y, 1e-12);
    EXPECT_NEAR(r.pose.theta_deg, truth.theta_deg, 1e-12);
    EXPECT_EQ(*r.candidates[2].refined_score, 0.0);
    for (std::size_t i = 0; i < r.candidates.size(); ++i)
      EXPECT_TRUE(i == 2 || *r.candidates[i].refined_score > 0.0) << "candidate " << i;
  }
  EXPECT_TRUE(found);
}

TEST(Localize, RoomHintKeepsPoseInTheRoom) {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 12 && checked < 4; ++seed) {
    SceneParams sp;
    sp.seed = seed;
    const auto s = generate_scene(sp);
    const auto& rooms = s.plan.rooms();
    const auto it = std::find_if(rooms.begin(), rooms.end(), [](const RoomPolygon& r) { return r.label == "Living Room"; });
    if (it == rooms.end()) continue;
    std::mt19937_64 rng(seed);
    const Point2 q = sample_position(s.plan, s.room_rects[static_cast<std::size_t>(it - rooms.begin())], rng);
    const RayBundle pred = perturb(cast_bundle(s.plan, {q.x, q.y, 200.0}, CameraModel{}), NoiseModel{0.3, 0.3, seed});
    const LocalizeResult r = localize(s.plan, pred, RoomHint{"Living Room", 0.9}, PipelineConfig{});
    EXPECT_TRUE(r.flags.room_mask_applied);
    EXPECT_EQ(s.plan.room_at(r.pose.position()), std::optional<std::string>("Living Room")) << "seed " << seed;
    ++checked;
  }
  EXPECT_GT(checked, 0);
}

TEST(Localize, HintBelowThresholdIsIgnored) {
  SceneParams sp;
  sp.seed = 3;
  const auto s = generate_scene(sp);
  std::mt19937_64 rng(2);
  const Point2 q = sample_position(s.plan, s.room_rects[0], rng);
  const RayBundle pred = perturb(cast_bundle(s.plan, {q.x, q.y, 15.0}, CameraModel{}), NoiseModel{0.2, 0.2, 3});
  const std::string other = s.plan.rooms().back().label;
  const LocalizeResult plain = localize(s.plan, pred, std::nullopt, PipelineConfig{});
  const LocalizeResult low = localize(s.plan, pred, RoomHint{other, 0.79}, PipelineConfig{});
  EXPECT_FALSE(low.flags.room_mask_applied);
  EXPECT_EQ(low.pose.x, plain.pose.x);
  EXPECT_EQ(low.pose.y, plain.pose.y);
  EXPECT_EQ(low.pose.theta_deg, plain.pose.theta_deg);
}

TEST(Localize, UnknownRoomLabelFallsBackWithFlags) {
  SceneParams sp;
  sp.seed = 4;
  const auto s = generate_scene(sp);
  std::mt19937_64 rng(2);
  const Point2 q = sample_position(s.plan, s.room_rects[0], rng);
  const RayBundle pred = cast_bundle(s.plan, {q.x, q.y, 300.0}, CameraModel{});
  const LocalizeResult plain = localize(s.plan, pred, std::nullopt, PipelineConfig{});
  const LocalizeResult r = localize(s.plan, pred, RoomHint{"Garage", 0.95}, PipelineConfig{});
  EXPECT_TRUE(r.flags.room_label_not_found);
  EXPECT_TRUE(r.flags.room_mask_degenerate);
  EXPECT_FALSE(r.flags.room_mask_applied);
  EXPECT_EQ(r.pose.x, plain.pose.x);
  EXPECT_EQ(r.pose.theta_deg, plain.pose.theta_deg);
}

TEST(Localize, DegenerateInteriorMaskIsFlagged) {
  const auto box = oracle::box_room(20);
  const SemanticFloorplan fp(box.spec(), box.cells(), {}, std::vector<std::uint8_t>(box.cells().size(), 0));
  const RayBundle pred = cast_bundle(fp, {1.0, 1.2, 45.0}, CameraModel{});
  const LocalizeResult r = localize(fp, pred, std::nullopt, PipelineConfig{});
  EXPECT_TRUE(r.flags.interior_mask_degenerate);
  EXPECT_TRUE(fp.is_free_point(r.pose.position()));
}

TEST(Localize, ErrorsCarryTheirStage) {
  const auto fp = oracle::box_room(20);
  RayBundle pred = cast_bundle(fp, {1.0, 1.2, 45.0}, CameraModel{});
  pred.depths.pop_back();
  pred.labels.pop_back();
  try {
    localize(fp, pred, std::nullopt, PipelineConfig{});
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "prediction");
    EXPECT_EQ(e.code(), ErrorCode::length_mismatch);
  }
  PipelineConfig bad;
  bad.coarse_rays = 6;
  EXPECT_THROW(Localizer(fp, bad), Error);
  bad.coarse_rays = 11;  // +-50 deg exceeds the 80 deg field of view
  EXPECT_THROW(Localizer(fp, bad), Error);
}

TEST(Localize, NoiseFreeQueriesOnAGridPoseAreExact) {
  SceneParams sp;
  sp.seed = 30;
  const auto s = generate_scene(sp);
  const PipelineConfig cfg;
  auto ctx = std::make_shared<const SceneContext>(s.plan, cfg);
  const Localizer loc(ctx, cfg);
  const PoseGrid g{s.plan.spec(), 36};
  std::mt19937_64 rng(30);
  int exact = 0;
  for (int i = 0; i < 20; ++i) {
    const Point2 q = sample_position(s.plan, s.room_rects[static_cast<std::size_t>(i) % s.room_rects.size()], rng);
    const CellIndex c = s.plan.spec().cell_of(q);
    const Pose truth = g.pose_of(c.x, c.y, i % 36);
    const LocalizeResult r = loc.localize(cast_bundle(s.plan, truth, cfg.camera));
    // Refinement scores the true pose at exactly zero whenever it is a candidate.
    const bool candidate = std::any_of(r.candidates.begin(), r.candidates.end(),
                                       [&](const Candidate& k) { return k.index == VolumeIndex{c.x, c.y, i % 36}; });
    if (candidate) {
      EXPECT_EQ(ray_similarity(cast_bundle(s.plan, truth, cfg.camera), cast_bundle(s.plan, r.pose, cfg.camera), {0.6}), 0.0);
    }
    exact += translation_distance(r.pose, truth) < 1e-9;
  }
  EXPECT_GE(exact, 12);
}
