#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "floorloc/core.hpp"
#include "floorloc/raycast.hpp"

namespace floorloc {

// ---------------------------------------------------------------------------
// Interpolation from l predicted rays to N_d coarse rays
// ---------------------------------------------------------------------------

/// Coarse target i sits (floor(N_d/2) - i) * gap degrees left of the optical
/// axis, so target 0 is the leftmost, matching the bundle convention.
inline double coarse_target_offset(int i, int target_count, double target_gap) {
  return (target_count / 2 - i) * target_gap;
}

namespace detail {

inline void check_targets(std::size_t n, double fov, int target_count, double target_gap) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "interpolation needs at least one input ray");
  if (target_count < 1) throw Error(ErrorCode::invalid_argument, "target_count must be >= 1");
  if (!(fov > 0.0)) throw Error(ErrorCode::invalid_argument, "fov must be positive");
  const double eps = 1e-9;
  for (int i = 0; i < target_count; ++i) {
    const double off = coarse_target_offset(i, target_count, target_gap);
    if (std::abs(off) > fov / 2.0 + eps)
      throw Error(ErrorCode::invalid_argument,
                  "target bearing " + std::to_string(off) + " deg lies outside the field of view");
  }
}

}  // namespace detail

/// Reduces N semantic rays to N_d by majority vote over a window of 2w+1 rays
/// around each target index. Target i has angle (i - floor(N_d/2)) * gap from
/// the center index floor(N/2); the window is clamped to [0, N-1]. Ties go to
/// the window's center ray, or to the smallest tied code when the center
/// index fell outside [0, N-1] or is not among the tied labels.
inline std::vector<SemanticClass> interpolate_semantic_majority(std::span<const SemanticClass> rays, double fov,
                                                                int target_count, double target_gap,
                                                                int window = 1) {
  detail::check_targets(rays.size(), fov, target_count, target_gap);
  if (window < 0) throw Error(ErrorCode::invalid_argument, "window must be >= 0");
  const long n = static_cast<long>(rays.size());
  const double ray_gap = n > 1 ? fov / static_cast<double>(n - 1) : 0.0;
  const long center = n / 2;

  std::vector<SemanticClass> out;
  out.reserve(static_cast<std::size_t>(target_count));
  for (int i = 0; i < target_count; ++i) {
    const double theta = (i - target_count / 2) * target_gap;
    const double offset = ray_gap > 0.0 ? theta / ray_gap : 0.0;
    const long idx = std::lround(static_cast<double>(center) + offset);
    const long lo = std::clamp(idx - window, 0L, n - 1);
    const long hi = std::clamp(idx + window, 0L, n - 1);

    std::array<int, 256> votes{};
    int best = 0;
    for (long j = lo; j <= hi; ++j) best = std::max(best, ++votes[code_of(rays[static_cast<std::size_t>(j)])]);

    std::optional<SemanticClass> pick;
    if (idx >= 0 && idx < n && votes[code_of(rays[static_cast<std::size_t>(idx)])] == best)
      pick = rays[static_cast<std::size_t>(idx)];
    if (!pick)
      for (int code = 0; code < 256; ++code)
        if (votes[static_cast<std::size_t>(code)] == best) {
          pick = static_cast<SemanticClass>(code);
          break;
        }
    out.push_back(*pick);
  }
  return out;
}

/// Linear interpolation of N equiangular depths at the N_d coarse target
/// bearings.
inline std::vector<double> interpolate_depth_linear(std::span<const double> depths, double fov, int target_count,
                                                    double target_gap) {
  detail::check_targets(depths.size(), fov, target_count, target_gap);
  const std::size_t n = depths.size();
  std::vector<double> out(static_cast<std::size_t>(target_count));
  if (n == 1) {
    std::fill(out.begin(), out.end(), depths[0]);
    return out;
  }
  const double ray_gap = fov / static_cast<double>(n - 1);
  for (int i = 0; i < target_count; ++i) {
    const double bearing = coarse_target_offset(i, target_count, target_gap);
    double t = (fov / 2.0 - bearing) / ray_gap;
    t = std::clamp(t, 0.0, static_cast<double>(n - 1));
    const auto j0 = static_cast<std::size_t>(std::floor(t));
    const std::size_t j1 = std::min(j0 + 1, n - 1);
    const double f = t - static_cast<double>(j0);
    out[static_cast<std::size_t>(i)] = f == 0.0 ? depths[j0] : depths[j0] * (1.0 - f) + depths[j1] * f;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simulated prediction noise
// ---------------------------------------------------------------------------

struct NoiseModel {
  double depth_sigma = 0.0;
  double label_flip_prob = 0.0;
  std::uint64_t rng_seed = 0;

  bool is_identity() const noexcept { return depth_sigma == 0.0 && label_flip_prob == 0.0; }
};

/// Gaussian depth noise clamped to (0, max_range]; each label flips with the
/// given probability to a uniformly chosen different class in 1..C.
inline RayBundle perturb(const RayBundle& in, const NoiseModel& noise) {
  if (noise.depth_sigma < 0.0) throw Error(ErrorCode::invalid_argument, "depth_sigma must be >= 0");
  if (noise.label_flip_prob < 0.0 || noise.label_flip_prob > 1.0)
    throw Error(ErrorCode::invalid_argument, "label_flip_prob must be in [0, 1]");
  if (in.labels.size() != in.depths.size()) throw Error(ErrorCode::length_mismatch, "bundle depths/labels differ");
  RayBundle out = in;
  if (noise.is_identity()) return out;

  const double max_range = in.camera ? in.camera->max_range : kDefaultMaxRange;
  constexpr double min_depth = 1e-3;
  std::mt19937_64 rng(noise.rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (noise.depth_sigma > 0.0)
      out.depths[i] = std::clamp(out.depths[i] + noise.depth_sigma * gauss(rng), min_depth, max_range);
    if (noise.label_flip_prob > 0.0 && unit(rng) < noise.label_flip_prob) {
      const SemanticClass cur = out.labels[i];
      const int choices = is_structural(cur) ? kNumClasses - 1 : kNumClasses;
      int pick = std::uniform_int_distribution<int>(1, choices)(rng);
      if (is_structural(cur) && pick >= code_of(cur)) ++pick;
      out.labels[i] = static_cast<SemanticClass>(pick);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ray similarity
// ---------------------------------------------------------------------------

/// Binary mismatch treats class codes as nominal. `code_l1` uses |code
/// difference| with no_hit counted as code 0.
enum class SemanticErrorMode { binary, code_l1 };

struct SimilarityWeights {
  double alpha = 0.6;  ///< weight on depth error; (1 - alpha) on semantic error

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::invalid_argument, "alpha must be in [0, 1]");
  }
};

inline double mean_depth_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::length_mismatch, "depth sequences differ in length");
  if (a.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

inline double label_distance(SemanticClass a, SemanticClass b, SemanticErrorMode mode) noexcept {
  if (mode == SemanticErrorMode::binary) return a == b ? 0.0 : 1.0;
  const int ca = a == SemanticClass::no_hit ? 0 : code_of(a);
  const int cb = b == SemanticClass::no_hit ? 0 : code_of(b);
  return std::abs(ca - cb);
}

inline double mean_semantic_error(std::span<const SemanticClass> a, std::span<const SemanticClass> b,
                                  SemanticErrorMode mode = SemanticErrorMode::binary) {
  if (a.size() != b.size()) throw Error(ErrorCode::length_mismatch, "label sequences differ in length");
  if (a.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += label_distance(a[i], b[i], mode);
  return s / static_cast<double>(a.size());
}

/// alpha * mean|depth diff| + (1 - alpha) * mean label mismatch. Lower is better.
inline double ray_similarity(const RayBundle& pred, const RayBundle& ref, const SimilarityWeights& w,
                             SemanticErrorMode mode = SemanticErrorMode::binary) {
  w.validate();
  if (pred.depths.size() != ref.depths.size() || pred.labels.size() != ref.labels.size())
    throw Error(ErrorCode::length_mismatch, "bundles have different ray counts (" +
                                                std::to_string(pred.depths.size()) + " vs " +
                                                std::to_string(ref.depths.size()) + ")");
  return w.alpha * mean_depth_error(pred.depths, ref.depths) +
         (1.0 - w.alpha) * mean_semantic_error(pred.labels, ref.labels, mode);
}

/// Two depths count as the same when they differ by less than 10 cm.
inline bool depths_match(double a, double b) noexcept { return std::abs(a - b) < 0.10; }

// ---------------------------------------------------------------------------
// Prediction file (JSON Lines)
// ---------------------------------------------------------------------------

struct PredictionRecord {
  std::string query_id;
  RayBundle rays;
  std::optional<std::string> room_label;
  std::optional<double> room_conf;
};

inline nlohmann::json prediction_to_json(const PredictionRecord& r) {
  nlohmann::json j;
  j["query_id"] = r.query_id;
  j["depths"] = r.rays.depths;
  std::vector<int> labels;
  for (auto l : r.rays.labels) labels.push_back(code_of(l));
  j["labels"] = labels;
  if (r.room_label) j["room_label"] = *r.room_label;
  if (r.room_conf) j["room_conf"] = *r.room_conf;
  return j;
}

inline PredictionRecord prediction_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::parse, where + ": expected an object");
  PredictionRecord r;
  auto qid = j.find("query_id");
  if (qid == j.end() || !qid->is_string()) throw Error(ErrorCode::parse, where + ": missing string query_id");
  r.query_id = qid->get<std::string>();
  auto jd = j.find("depths");
  auto jl = j.find("labels");
  if (jd == j.end() || !jd->is_array()) throw Error(ErrorCode::parse, where + ": missing depths array");
  if (jl == j.end() || !jl->is_array()) throw Error(ErrorCode::parse, where + ": missing labels array");
  if (jd->size() != jl->size())
    throw Error(ErrorCode::length_mismatch, where + ": depths and labels differ in length");
  for (std::size_t i = 0; i < jd->size(); ++i) {
    const auto& d = (*jd)[i];
    if (!d.is_number() || !(d.get<double>() > 0.0))
      throw Error(ErrorCode::parse, where + ".depths[" + std::to_string(i) + "]: expected a positive number");
    r.rays.depths.push_back(d.get<double>());
    const auto& l = (*jl)[i];
    const auto lab = l.is_number_integer() ? ray_label_from_code(l.get<long long>()) : std::nullopt;
    if (!lab)
      throw Error(ErrorCode::unknown_code, where + ".labels[" + std::to_string(i) + "]: expected 1.." +
                                               std::to_string(kNumClasses) + " or 255");
    r.rays.labels.push_back(*lab);
  }
  if (auto it = j.find("room_label"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw Error(ErrorCode::parse, where + ".room_label: expected a string");
    r.room_label = it->get<std::string>();
  }
  if (auto it = j.find("room_conf"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw Error(ErrorCode::parse, where + ".room_conf: expected a number");
    r.room_conf = it->get<double>();
  }
  return r;
}

inline std::vector<PredictionRecord> parse_predictions(std::istream& in) {
  std::vector<PredictionRecord> out;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::parse, where + ", byte " + std::to_string(e.byte) + ": " + e.what());
    }
    out.push_back(prediction_from_json(j, where));
  }
  return out;
}

inline std::vector<PredictionRecord> load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  return parse_predictions(in);
}

inline std::string serialize_predictions(const std::vector<PredictionRecord>& records) {
  std::string out;
  for (const auto& r : records) out += prediction_to_json(r).dump() + "\n";
  return out;
}

}  // namespace floorloc
