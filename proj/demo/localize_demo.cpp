// Generates a small apartment, casts rays from a known pose, and localizes
// them with depth only, semantics only and the fused volume.

#include <cstdio>

#include "floorloc/floorloc.hpp"

using namespace floorloc;

int main() {
  SceneParams params;
  params.seed = 42;
  const GeneratedScene scene = generate_scene(params);
  const SemanticFloorplan& plan = scene.plan;
  std::printf("plan %dx%d cells, %zu rooms, %d doors, %d windows\n", plan.spec().width_cells,
              plan.spec().height_cells, plan.rooms().size(), scene.doors, scene.windows);

  std::mt19937_64 rng(3);
  const Point2 p = sample_position(plan, scene.room_rects[0], rng);
  const Pose truth{p.x, p.y, 137.0};

  PipelineConfig cfg;
  const RayBundle observed = perturb(cast_bundle(plan, truth, cfg.camera), NoiseModel{0.05, 0.05, 9});
  auto ctx = std::make_shared<const SceneContext>(plan, cfg);

  for (double w_s : {0.0, 1.0, cfg.w_s}) {
    PipelineConfig c = cfg;
    c.w_s = w_s;
    const LocalizeResult r = Localizer(ctx, c).localize(observed);
    const PoseError e = pose_error(r.pose, truth);
    std::printf("w_s=%.1f  pose (%.2f, %.2f, %5.1f)  error %.2f m %.1f deg  [%.1f ms]\n", w_s, r.pose.x, r.pose.y,
                r.pose.theta_deg, e.translation_m, e.rotation_deg, 1e3 * r.timings.total());
  }

  const auto room = plan.room_at(truth.position());
  if (room) {
    const LocalizeResult r = Localizer(ctx, cfg).localize(observed, RoomHint{*room, 0.9});
    const PoseError e = pose_error(r.pose, truth);
    std::printf("with room hint \"%s\": error %.2f m %.1f deg\n", room->c_str(), e.translation_m, e.rotation_deg);
  }
  std::printf("truth (%.2f, %.2f, %.1f)\n", truth.x, truth.y, truth.theta_deg);
}
