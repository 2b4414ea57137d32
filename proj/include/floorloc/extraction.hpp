#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "floorloc/core.hpp"
#include "floorloc/floorplan.hpp"
#include "floorloc/parallel.hpp"
#include "floorloc/probvolume.hpp"
#include "floorloc/raycast.hpp"
#include "floorloc/rays.hpp"

namespace floorloc {

struct Candidate {
  Pose pose;  ///< coarse pose: cell center and bin heading
  VolumeIndex index;
  double coarse_score = 0.0;
  std::optional<double> refined_score;  ///< best similarity over the angle set (lower is better)
  std::optional<Pose> refined_pose;     ///< augmented pose attaining refined_score
};

// ---------------------------------------------------------------------------
// Top-K with translation NMS
// ---------------------------------------------------------------------------

namespace detail {

// Separation tolerance absorbs the rounding in cell-center distances, so
// neighbours exactly delta_res apart are not suppressed.
inline constexpr double kSeparationTol = 1e-9;

inline bool too_close(const VolumeIndex& a, const VolumeIndex& b, double resolution, double delta_res) {
  const double d = resolution * std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
  return d < delta_res - kSeparationTol;
}

}  // namespace detail

/// Greedy selection in descending score order (ties: lexicographic y, x, bin),
/// skipping any pose whose cell center is closer than delta_res to an already
/// selected one. Only positive-score poses are eligible.
inline std::vector<Candidate> topk_candidates(const ProbabilityVolume& p, int k, double delta_res) {
  if (k < 1) throw Error(ErrorCode::invalid_argument, "k must be >= 1");
  if (!(delta_res >= 0.0)) throw Error(ErrorCode::invalid_argument, "delta_res must be >= 0");
  const PoseGrid& g = p.grid();

  struct Entry {
    double score;
    VolumeIndex idx;
  };
  // Heap "less" = worse candidate: lower score, then later in (y, x, bin).
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score < b.score;
    return yxb_less(b.idx, a.idx);
  };
  std::vector<Entry> heap;
  for (int b = 0; b < g.orientation_bins; ++b)
    for (int y = 0; y < g.height(); ++y)
      for (int x = 0; x < g.width(); ++x)
        if (const double v = p.at(x, y, b); v > 0.0) heap.push_back({v, {x, y, b}});
  if (heap.empty()) throw Error(ErrorCode::empty_volume, "no positive poses to select from");
  std::make_heap(heap.begin(), heap.end(), worse);

  std::vector<Candidate> out;
  while (!heap.empty() && static_cast<int>(out.size()) < k) {
    std::pop_heap(heap.begin(), heap.end(), worse);
    const Entry e = heap.back();
    heap.pop_back();
    const bool suppressed = std::any_of(out.begin(), out.end(), [&](const Candidate& c) {
      return detail::too_close(c.index, e.idx, g.spec.resolution, delta_res);
    });
    if (suppressed) continue;
    out.push_back({g.pose_of(e.idx.x, e.idx.y, e.idx.bin), e.idx, e.score, std::nullopt, std::nullopt});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Angular augmentation
// ---------------------------------------------------------------------------

/// Number of angular steps on each side: delta_max / delta_ang, which must be
/// an integer (or both zero).
inline int augmentation_steps(double delta_ang, double delta_max) {
  if (delta_ang < 0.0 || delta_max < 0.0) throw Error(ErrorCode::invalid_argument, "angular deltas must be >= 0");
  if (delta_max == 0.0) return 0;
  if (delta_ang == 0.0) throw Error(ErrorCode::invalid_argument, "delta_max > 0 needs delta_ang > 0");
  const double ratio = delta_max / delta_ang;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-9) throw Error(ErrorCode::invalid_argument, "delta_max must be a multiple of delta_ang");
  return static_cast<int>(n);
}

/// Headings theta + {-max, ..., -delta, 0, +delta, ..., +max}, wrapped to [0, 360).
inline std::vector<Pose> augment_angles(const Pose& pose, double delta_ang, double delta_max) {
  const int n = augmentation_steps(delta_ang, delta_max);
  std::vector<Pose> out;
  out.reserve(static_cast<std::size_t>(2 * n + 1));
  for (int s = -n; s <= n; ++s) out.push_back({pose.x, pose.y, wrap_degrees(pose.theta_deg + s * delta_ang)});
  return out;
}

inline std::vector<Pose> augment_angles(const Candidate& c, double delta_ang, double delta_max) {
  return augment_angles(c.pose, delta_ang, delta_max);
}

// ---------------------------------------------------------------------------
// Refinement
// ---------------------------------------------------------------------------

struct RefinementConfig {
  int top_k = 5;
  double delta_res = 0.1;
  double delta_ang = 5.0;
  double delta_max = 5.0;
  double alpha = 0.6;
  CameraModel cam_highres{};
  SemanticErrorMode semantic_mode = SemanticErrorMode::binary;

  void validate() const {
    if (top_k < 1) throw Error(ErrorCode::invalid_argument, "top_k must be >= 1");
    if (!(delta_res >= 0.0)) throw Error(ErrorCode::invalid_argument, "delta_res must be >= 0");
    augmentation_steps(delta_ang, delta_max);
    SimilarityWeights{alpha}.validate();
    cam_highres.validate();
  }
};

struct RefineResult {
  Pose pose;
  std::vector<Candidate> candidates;  ///< input order, with refined scores filled in
  bool fallback = false;              ///< every candidate was in structure; top coarse pose returned
  std::size_t evaluated = 0;          ///< (candidate, angle) pairs scored
};

namespace detail {

inline bool pose_less_yxt(const Pose& a, const Pose& b) {
  if (a.y != b.y) return a.y < b.y;
  if (a.x != b.x) return a.x < b.x;
  return a.theta_deg < b.theta_deg;
}

}  // namespace detail

/// Casts a high-resolution reference bundle at every (candidate, augmented
/// angle) pair and returns the pose of minimal weighted error. Ties go to the
/// higher coarse score, then lexicographic (y, x, theta).
inline RefineResult refine(const SemanticFloorplan& fp, const RayBundle& pred, std::vector<Candidate> candidates,
                           const RefinementConfig& cfg, int workers = 1) {
  cfg.validate();
  if (candidates.empty()) throw Error(ErrorCode::invalid_argument, "refine needs at least one candidate");
  if (pred.size() != static_cast<std::size_t>(cfg.cam_highres.ray_count) || pred.labels.size() != pred.size())
    throw Error(ErrorCode::length_mismatch, "prediction has " + std::to_string(pred.size()) + " rays, expected " +
                                                std::to_string(cfg.cam_highres.ray_count));

  struct Job {
    std::size_t candidate;
    Pose pose;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < candidates.size(); ++c)
    for (const Pose& p : augment_angles(candidates[c], cfg.delta_ang, cfg.delta_max)) jobs.push_back({c, p});

  constexpr double skipped = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> scores(jobs.size(), skipped);
  const SimilarityWeights weights{cfg.alpha};
  parallel_for(jobs.size(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      if (!fp.is_free_point(jobs[j].pose.position())) continue;
      const RayBundle ref = cast_bundle(fp, jobs[j].pose, cfg.cam_highres);
      scores[j] = ray_similarity(pred, ref, weights, cfg.semantic_mode);
    }
  });

  RefineResult result;
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (std::isnan(scores[j])) continue;
    ++result.evaluated;
    Candidate& c = candidates[jobs[j].candidate];
    if (!c.refined_score || scores[j] < *c.refined_score) {
      c.refined_score = scores[j];
      c.refined_pose = jobs[j].pose;
    }
    if (!best) {
      best = j;
      continue;
    }
    const double sb = scores[*best], sj = scores[j];
    const double cb = candidates[jobs[*best].candidate].coarse_score, cj = c.coarse_score;
    if (sj < sb || (sj == sb && (cj > cb || (cj == cb && detail::pose_less_yxt(jobs[j].pose, jobs[*best].pose)))))
      best = j;
  }
  result.candidates = std::move(candidates);
  if (!best) {
    result.fallback = true;
    result.pose = result.candidates.front().pose;
  } else {
    result.pose = jobs[*best].pose;
  }
  return result;
}

// ---------------------------------------------------------------------------
// End-to-end pipeline
// ---------------------------------------------------------------------------

struct PipelineConfig {
  int coarse_rays = 7;                    ///< V
  CameraModel camera{80.0, 40, kDefaultMaxRange};  ///< high-resolution prediction layout (l rays)
  int orientation_bins = 36;              ///< O
  std::optional<double> coarse_gap_deg;   ///< default: one orientation bin
  double w_s = 0.4;
  double room_threshold = 0.8;
  int top_k = 5;
  double delta_res = 0.1;
  double delta_ang = 5.0;
  double delta_max = 5.0;
  std::optional<double> alpha;            ///< default: w_d = 1 - w_s
  double lambda_d = 1.0;
  double lambda_s = 1.0;
  int vote_window = 1;
  SemanticErrorMode semantic_mode = SemanticErrorMode::binary;
  bool use_interior_mask = true;
  bool refine = true;
  int workers = 1;
  bool keep_volumes = false;

  double coarse_gap() const { return coarse_gap_deg.value_or(360.0 / orientation_bins); }
  double effective_alpha() const { return alpha.value_or(1.0 - w_s); }

  std::vector<double> coarse_offsets() const {
    std::vector<double> out(static_cast<std::size_t>(coarse_rays));
    for (int i = 0; i < coarse_rays; ++i) out[static_cast<std::size_t>(i)] = coarse_target_offset(i, coarse_rays, coarse_gap());
    return out;
  }

  RefinementConfig refinement() const {
    return {top_k, delta_res, delta_ang, delta_max, effective_alpha(), camera, semantic_mode};
  }

  void validate() const {
    camera.validate();
    if (coarse_rays < 1 || coarse_rays % 2 == 0)
      throw Error(ErrorCode::invalid_argument, "coarse ray count must be odd and >= 1");
    if (orientation_bins < 1) throw Error(ErrorCode::invalid_argument, "orientation_bins must be >= 1");
    if (!(coarse_gap() > 0.0)) throw Error(ErrorCode::invalid_argument, "coarse gap must be positive");
    if ((coarse_rays / 2) * coarse_gap() > camera.fov_deg / 2.0 + 1e-9)
      throw Error(ErrorCode::invalid_argument, "coarse rays extend beyond the camera field of view");
    if (!(w_s >= 0.0 && w_s <= 1.0)) throw Error(ErrorCode::invalid_argument, "w_s must be in [0, 1]");
    if (!(lambda_d > 0.0 && lambda_s > 0.0)) throw Error(ErrorCode::invalid_argument, "lambdas must be positive");
    if (vote_window < 0) throw Error(ErrorCode::invalid_argument, "vote_window must be >= 0");
    if (workers < 1) throw Error(ErrorCode::invalid_argument, "workers must be >= 1");
    refinement().validate();
  }
};

struct RoomHint {
  std::string label;
  double confidence = 0.0;
};

struct StageTimings {
  double prediction = 0.0;
  double localization = 0.0;
  double refinement = 0.0;
  double total() const noexcept { return prediction + localization + refinement; }
};

struct LocalizeFlags {
  bool interior_mask_degenerate = false;
  bool room_mask_applied = false;
  bool room_label_not_found = false;
  bool room_mask_degenerate = false;
  bool refine_fallback = false;

  bool degenerate() const noexcept { return interior_mask_degenerate || room_mask_degenerate || refine_fallback; }
};

struct StageVolumes {
  ProbabilityVolume depth;
  ProbabilityVolume semantic;
  ProbabilityVolume fused;
  ProbabilityVolume masked;
};

struct LocalizeResult {
  Pose pose;
  std::vector<Candidate> candidates;
  LocalizeFlags flags;
  StageTimings timings;
  std::optional<StageVolumes> volumes;
};

/// Error raised by `Localizer`, tagged with the pipeline stage that failed.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& inner)
      : Error(inner.code(), stage + " stage: " + inner.what()), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Per-floorplan precomputation shared by every query: coarse reference rays
/// and the interior mask.
class SceneContext {
 public:
  SceneContext(SemanticFloorplan fp, const PipelineConfig& cfg)
      : fp_(std::move(fp)),
        coarse_rays_(cfg.coarse_rays),
        coarse_gap_(cfg.coarse_gap()),
        max_range_(cfg.camera.max_range),
        refs_(fp_, cfg.orientation_bins, cfg.coarse_offsets(), cfg.camera.max_range, cfg.workers),
        interior_(interior_mask(fp_, cfg.orientation_bins)) {}

  const SemanticFloorplan& floorplan() const noexcept { return fp_; }
  const ReferenceRays& references() const noexcept { return refs_; }
  const PoseMask& interior() const noexcept { return interior_; }

  bool compatible(const PipelineConfig& cfg) const {
    return cfg.coarse_rays == coarse_rays_ && cfg.coarse_gap() == coarse_gap_ &&
           cfg.camera.max_range == max_range_ && cfg.orientation_bins == refs_.grid().orientation_bins;
  }

 private:
  SemanticFloorplan fp_;
  int coarse_rays_;
  double coarse_gap_;
  double max_range_;
  ReferenceRays refs_;
  PoseMask interior_;
};

struct CoarseObservation {
  std::vector<double> depths;
  std::vector<SemanticClass> labels;
};

struct Posterior {
  ProbabilityVolume fused;
  ProbabilityVolume masked;
  LocalizeFlags flags;
};

/// Coarse-to-fine localization against one floorplan. Reentrant: every
/// method is const and the shared scene context is immutable.
class Localizer {
 public:
  Localizer(const SemanticFloorplan& fp, PipelineConfig cfg)
      : cfg_(validated(std::move(cfg))), ctx_(std::make_shared<const SceneContext>(fp, cfg_)) {}

  Localizer(std::shared_ptr<const SceneContext> ctx, PipelineConfig cfg)
      : cfg_(validated(std::move(cfg))), ctx_(std::move(ctx)) {
    if (!ctx_->compatible(cfg_))
      throw Error(ErrorCode::invalid_argument, "scene context was built for a different coarse ray layout");
  }

  const PipelineConfig& config() const noexcept { return cfg_; }
  const SemanticFloorplan& floorplan() const noexcept { return ctx_->floorplan(); }
  const std::shared_ptr<const SceneContext>& context() const noexcept { return ctx_; }

  /// Reduces the l predicted rays to the V coarse rays.
  CoarseObservation prepare(const RayBundle& pred) const {
    if (pred.size() != static_cast<std::size_t>(cfg_.camera.ray_count) || pred.labels.size() != pred.size())
      throw Error(ErrorCode::length_mismatch, "prediction has " + std::to_string(pred.size()) + " rays, expected " +
                                                  std::to_string(cfg_.camera.ray_count));
    return {interpolate_depth_linear(pred.depths, cfg_.camera.fov_deg, cfg_.coarse_rays, cfg_.coarse_gap()),
            interpolate_semantic_majority(pred.labels, cfg_.camera.fov_deg, cfg_.coarse_rays, cfg_.coarse_gap(),
                                          cfg_.vote_window)};
  }

  ProbabilityVolume depth_volume(const CoarseObservation& obs) const {
    return build_depth_volume(ctx_->references(), obs.depths, cfg_.lambda_d, cfg_.workers);
  }

  ProbabilityVolume semantic_volume(const CoarseObservation& obs) const {
    return build_semantic_volume(ctx_->references(), obs.labels, cfg_.lambda_s, cfg_.workers, cfg_.semantic_mode);
  }

  /// Fusion, interior mask, then the optional room mask.
  Posterior posterior(const ProbabilityVolume& pd, const ProbabilityVolume& ps,
                      const std::optional<RoomHint>& hint) const {
    Posterior post{fuse(ps, pd, cfg_.w_s), {}, {}};
    ProbabilityVolume current = post.fused;
    if (cfg_.use_interior_mask) {
      MaskOutcome m = apply_mask(current, ctx_->interior(), true);
      post.flags.interior_mask_degenerate = m.degenerate;
      current = std::move(m.volume);
    }
    if (hint) {
      if (hint->confidence >= cfg_.room_threshold) {
        RoomMask rm = room_mask(floorplan(), hint->label, cfg_.orientation_bins);
        post.flags.room_label_not_found = !rm.found;
        MaskOutcome m = apply_mask(current, rm.mask, true);
        post.flags.room_mask_applied = m.applied;
        post.flags.room_mask_degenerate = m.degenerate;
        current = std::move(m.volume);
      }
    }
    post.masked = std::move(current);
    return post;
  }

  std::vector<Candidate> candidates(const ProbabilityVolume& p, int k) const {
    return topk_candidates(p, k, cfg_.delta_res);
  }

  RefineResult refine_candidates(const RayBundle& pred, std::vector<Candidate> cands) const {
    return refine(floorplan(), pred, std::move(cands), cfg_.refinement(), cfg_.workers);
  }

  LocalizeResult localize(const RayBundle& pred, const std::optional<RoomHint>& hint = std::nullopt) const {
    using clock = std::chrono::steady_clock;
    auto seconds = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };
    LocalizeResult out;
    const auto t0 = clock::now();
    CoarseObservation obs = staged("prediction", [&] { return prepare(pred); });
    const auto t1 = clock::now();

    auto [post, cands] = staged("localization", [&] {
      ProbabilityVolume pd = depth_volume(obs);
      ProbabilityVolume ps = semantic_volume(obs);
      Posterior p = posterior(pd, ps, hint);
      auto c = candidates(p.masked, cfg_.refine ? cfg_.top_k : 1);
      if (cfg_.keep_volumes) out.volumes = StageVolumes{std::move(pd), std::move(ps), p.fused, p.masked};
      return std::pair{std::move(p), std::move(c)};
    });
    out.flags = post.flags;
    const auto t2 = clock::now();

    if (cfg_.refine) {
      RefineResult r = staged("refinement", [&] { return refine_candidates(pred, std::move(cands)); });
      out.pose = r.pose;
      out.candidates = std::move(r.candidates);
      out.flags.refine_fallback = r.fallback;
    } else {
      out.pose = cands.front().pose;
      out.candidates = std::move(cands);
    }
    const auto t3 = clock::now();
    out.timings = {seconds(t0, t1), seconds(t1, t2), seconds(t2, t3)};
    return out;
  }

 private:
  static PipelineConfig validated(PipelineConfig cfg) {
    cfg.validate();
    return cfg;
  }

  template <typename Fn>
  static auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
    try {
      return fn();
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError(stage, e);
    }
  }

  PipelineConfig cfg_;
  std::shared_ptr<const SceneContext> ctx_;
};

/// One-shot localization; builds the scene context for this call only.
inline LocalizeResult localize(const SemanticFloorplan& fp, const RayBundle& pred,
                               const std::optional<RoomHint>& room_hint, const PipelineConfig& cfg) {
  return Localizer(fp, cfg).localize(pred, room_hint);
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::json pose_to_json(const Pose& p) { return {{"x", p.x}, {"y", p.y}, {"theta_deg", p.theta_deg}}; }

inline nlohmann::json config_to_json(const PipelineConfig& c) {
  return {
      {"coarse_rays", c.coarse_rays},
      {"rays", c.camera.ray_count},
      {"fov_deg", c.camera.fov_deg},
      {"max_range_m", c.camera.max_range},
      {"orientation_bins", c.orientation_bins},
      {"coarse_gap_deg", c.coarse_gap()},
      {"w_s", c.w_s},
      {"room_threshold", c.room_threshold},
      {"top_k", c.top_k},
      {"delta_res_m", c.delta_res},
      {"delta_ang_deg", c.delta_ang},
      {"delta_max_deg", c.delta_max},
      {"alpha", c.effective_alpha()},
      {"lambda_d", c.lambda_d},
      {"lambda_s", c.lambda_s},
      {"vote_window", c.vote_window},
      {"semantic_error", c.semantic_mode == SemanticErrorMode::binary ? "binary" : "code_l1"},
      {"interior_mask", c.use_interior_mask},
      {"refine", c.refine},
  };
}

/// Overlays the fields present in `j` onto `c`. Unknown keys are rejected.
inline void apply_config_json(PipelineConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::parse, "pipeline config must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const auto& v = it.value();
    auto num = [&] {
      if (!v.is_number()) throw Error(ErrorCode::parse, "config." + k + ": expected a number");
      return v.get<double>();
    };
    auto integer = [&] {
      if (!v.is_number_integer()) throw Error(ErrorCode::parse, "config." + k + ": expected an integer");
      return v.get<int>();
    };
    auto boolean = [&] {
      if (!v.is_boolean()) throw Error(ErrorCode::parse, "config." + k + ": expected a boolean");
      return v.get<bool>();
    };
    if (k == "coarse_rays") c.coarse_rays = integer();
    else if (k == "rays") c.camera.ray_count = integer();
    else if (k == "fov_deg") c.camera.fov_deg = num();
    else if (k == "max_range_m") c.camera.max_range = num();
    else if (k == "orientation_bins") c.orientation_bins = integer();
    else if (k == "coarse_gap_deg") c.coarse_gap_deg = num();
    else if (k == "w_s") c.w_s = num();
    else if (k == "room_threshold") c.room_threshold = num();
    else if (k == "top_k") c.top_k = integer();
    else if (k == "delta_res_m") c.delta_res = num();
    else if (k == "delta_ang_deg") c.delta_ang = num();
    else if (k == "delta_max_deg") c.delta_max = num();
    else if (k == "alpha") c.alpha = v.is_null() ? std::nullopt : std::optional<double>(num());
    else if (k == "lambda_d") c.lambda_d = num();
    else if (k == "lambda_s") c.lambda_s = num();
    else if (k == "vote_window") c.vote_window = integer();
    else if (k == "semantic_error") {
      if (v == "binary") c.semantic_mode = SemanticErrorMode::binary;
      else if (v == "code_l1") c.semantic_mode = SemanticErrorMode::code_l1;
      else throw Error(ErrorCode::parse, "config.semantic_error: expected \"binary\" or \"code_l1\"");
    } else if (k == "interior_mask") c.use_interior_mask = boolean();
    else if (k == "refine") c.refine = boolean();
    else if (k == "workers") c.workers = integer();
    else throw Error(ErrorCode::parse, "unknown config key \"" + k + "\"");
  }
}

inline nlohmann::json candidate_to_json(const Candidate& c) {
  nlohmann::json j = pose_to_json(c.pose);
  j["coarse_score"] = c.coarse_score;
  j["refined_score"] = c.refined_score ? nlohmann::json(*c.refined_score) : nlohmann::json(nullptr);
  if (c.refined_pose) j["refined_pose"] = pose_to_json(*c.refined_pose);
  return j;
}

inline nlohmann::json timings_to_json(const StageTimings& t) {
  return {{"prediction", t.prediction}, {"localization", t.localization}, {"refinement", t.refinement}};
}

inline nlohmann::json flags_to_json(const LocalizeFlags& f) {
  return {{"interior_mask_degenerate", f.interior_mask_degenerate},
          {"room_mask_applied", f.room_mask_applied},
          {"room_label_not_found", f.room_label_not_found},
          {"room_mask_degenerate", f.room_mask_degenerate},
          {"refine_fallback", f.refine_fallback}};
}

inline nlohmann::json result_to_json(const LocalizeResult& r) {
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : r.candidates) cands.push_back(candidate_to_json(c));
  return {{"pose", pose_to_json(r.pose)},
          {"candidates", std::move(cands)},
          {"flags", flags_to_json(r.flags)},
          {"timings_s", timings_to_json(r.timings)}};
}

}  // namespace floorloc
