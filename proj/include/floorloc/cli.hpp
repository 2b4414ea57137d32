#pragma once

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "floorloc/eval.hpp"
#include "floorloc/extraction.hpp"
#include "floorloc/floorplan.hpp"
#include "floorloc/image.hpp"
#include "floorloc/parallel.hpp"
#include "floorloc/probvolume.hpp"
#include "floorloc/raycast.hpp"
#include "floorloc/rays.hpp"

// Command-line front end. Lives in a header so the test suite can drive the
// commands in-process; tools/floorloc_cli.cpp is a thin main().

namespace floorloc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitDegenerate = 3;

/// Pipeline flags shared by localize and evaluate. Unset flags leave the
/// underlying config alone, which gives flags > config file > defaults.
struct PipelineFlags {
  std::optional<std::string> config_path;
  std::optional<int> coarse_rays, rays, bins, top_k, vote_window, workers;
  std::optional<double> fov, w_s, room_threshold, delta_res, delta_ang, delta_max, alpha, lambda_d, lambda_s,
      max_range;
  bool no_refine = false;
  bool no_interior_mask = false;

  void add_to(CLI::App& app) {
    app.add_option("--config", config_path, "JSON pipeline config file");
    app.add_option("--coarse-rays", coarse_rays, "coarse ray count V (odd)");
    app.add_option("--rays", rays, "predicted ray count l");
    app.add_option("--fov", fov, "field of view in degrees");
    app.add_option("--bins", bins, "orientation bins O");
    app.add_option("--ws", w_s, "semantic weight w_s in [0, 1]");
    app.add_option("--room-threshold", room_threshold, "room-hint confidence threshold");
    app.add_option("--top-k", top_k, "candidates refined");
    app.add_option("--delta-res", delta_res, "candidate separation in meters");
    app.add_option("--delta-ang", delta_ang, "augmentation step in degrees");
    app.add_option("--delta-max", delta_max, "augmentation range in degrees");
    app.add_option("--alpha", alpha, "refinement depth weight (default 1 - w_s)");
    app.add_option("--lambda-d", lambda_d, "depth likelihood sharpness");
    app.add_option("--lambda-s", lambda_s, "semantic likelihood sharpness");
    app.add_option("--max-range", max_range, "ray range in meters");
    app.add_option("--vote-window", vote_window, "majority vote half-width");
    app.add_option("--workers", workers, "worker threads (default: FLOORLOC_WORKERS, else 1)");
    app.add_flag("--no-refine", no_refine, "take the coarse argmax");
    app.add_flag("--no-interior-mask", no_interior_mask, "do not restrict poses to room interiors");
  }

  void apply(PipelineConfig& c) const {
    if (config_path) apply_config_json(c, nlohmann::json::parse(read_text_file(*config_path)));
    if (coarse_rays) c.coarse_rays = *coarse_rays;
    if (rays) c.camera.ray_count = *rays;
    if (fov) c.camera.fov_deg = *fov;
    if (bins) c.orientation_bins = *bins;
    if (w_s) c.w_s = *w_s;
    if (room_threshold) c.room_threshold = *room_threshold;
    if (top_k) c.top_k = *top_k;
    if (delta_res) c.delta_res = *delta_res;
    if (delta_ang) c.delta_ang = *delta_ang;
    if (delta_max) c.delta_max = *delta_max;
    if (alpha) c.alpha = *alpha;
    if (lambda_d) c.lambda_d = *lambda_d;
    if (lambda_s) c.lambda_s = *lambda_s;
    if (max_range) c.camera.max_range = *max_range;
    if (vote_window) c.vote_window = *vote_window;
    if (no_refine) c.refine = false;
    if (no_interior_mask) c.use_interior_mask = false;
  }

  int worker_count(int file_value = 1) const {
    if (workers) return *workers;
    if (std::getenv("FLOORLOC_WORKERS")) return workers_from_env();
    return file_value;
  }
};

inline std::vector<double> parse_doubles(const std::string& text, char sep, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::parse, what + ": cannot parse \"" + item + "\"");
    }
  }
  return out;
}

inline std::string safe_name(const std::string& id) {
  std::string s;
  for (char ch : id) s.push_back(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' ? ch : '_');
  return s.empty() ? "query" : s;
}

// "0:1:0.1" -> 0, 0.1, ..., 1. Steps are generated by index so the end point
// is hit exactly.
inline std::vector<double> parse_range(const std::string& text) {
  const auto v = parse_doubles(text, ':', "sweep range");
  if (v.size() != 3 || !(v[2] > 0.0) || v[1] < v[0]) throw Error(ErrorCode::parse, "sweep range must be lo:hi:step");
  const int n = static_cast<int>(std::floor((v[1] - v[0]) / v[2] + 1e-9));
  std::vector<double> out;
  for (int i = 0; i <= n; ++i) out.push_back(std::round((v[0] + i * v[2]) * 1e9) / 1e9);
  return out;
}

inline void write_or_print(const std::optional<std::string>& path, const std::string& text, std::ostream& out) {
  if (path) write_text_file(*path, text);
  else out << text;
}

// ---------------------------------------------------------------------------
// localize
// ---------------------------------------------------------------------------

struct LocalizeArgs {
  std::string plan;
  std::optional<std::string> predictions;
  std::optional<std::string> oracle;
  double noise_depth = 0.0;
  double noise_flip = 0.0;
  std::uint64_t seed = 1;
  std::optional<std::string> room;
  double room_conf = 0.9;
  std::optional<std::string> render_dir;
  std::optional<std::string> out;
  PipelineFlags pipeline;
};

inline void render_stages(const std::string& dir, const std::string& id, const SemanticFloorplan& fp,
                          const LocalizeResult& r, const std::optional<Pose>& gt) {
  std::filesystem::create_directories(dir);
  const std::string base = (std::filesystem::path(dir) / safe_name(id)).string();
  const auto& v = *r.volumes;
  const std::pair<const char*, const ProbabilityVolume*> stages[] = {
      {"depth", &v.depth}, {"semantic", &v.semantic}, {"fused", &v.fused}, {"masked", &v.masked}};
  for (const auto& [name, vol] : stages) {
    write_binary(base + "_" + name + ".pgm", encode_pgm(render_max_projection(*vol)));
    save_volume(*vol, base + "_" + name + ".flpv");
  }
  write_binary(base + "_overlay.ppm", encode_ppm(render_overlay(fp, r.pose, gt)));
}

inline int cmd_localize(const LocalizeArgs& a, std::ostream& out) {
  if (a.predictions.has_value() == a.oracle.has_value())
    throw Error(ErrorCode::invalid_argument, "give exactly one of a prediction file or --oracle x,y,theta");
  PipelineConfig cfg;
  a.pipeline.apply(cfg);
  cfg.workers = a.pipeline.worker_count();
  cfg.keep_volumes = a.render_dir.has_value();
  cfg.validate();
  const SemanticFloorplan fp = load_floorplan(a.plan);

  struct Query {
    PredictionRecord rec;
    std::optional<Pose> gt;
  };
  std::vector<Query> queries;
  if (a.oracle) {
    const auto v = parse_doubles(*a.oracle, ',', "--oracle");
    if (v.size() != 3) throw Error(ErrorCode::parse, "--oracle expects x,y,theta");
    const Pose gt{v[0], v[1], v[2]};
    Query q;
    q.rec.query_id = "oracle";
    q.rec.rays = perturb(cast_bundle(fp, gt, cfg.camera), NoiseModel{a.noise_depth, a.noise_flip, a.seed});
    q.gt = gt;
    queries.push_back(std::move(q));
  } else {
    for (auto& rec : load_predictions(*a.predictions)) queries.push_back({std::move(rec), std::nullopt});
  }

  const Localizer loc(fp, cfg);
  nlohmann::json results = nlohmann::json::array();
  bool degenerate = false;
  for (const Query& q : queries) {
    std::optional<RoomHint> hint;
    if (a.room) hint = RoomHint{*a.room, a.room_conf};
    else if (q.rec.room_label) hint = RoomHint{*q.rec.room_label, q.rec.room_conf.value_or(1.0)};
    const LocalizeResult r = loc.localize(q.rec.rays, hint);
    degenerate |= r.flags.degenerate();
    nlohmann::json j = result_to_json(r);
    j["query_id"] = q.rec.query_id;
    if (q.gt) {
      j["gt"] = pose_to_json(*q.gt);
      const PoseError e = pose_error(r.pose, *q.gt);
      j["error_m"] = e.translation_m;
      j["error_deg"] = e.rotation_deg;
    }
    results.push_back(std::move(j));
    if (a.render_dir) render_stages(*a.render_dir, q.rec.query_id, fp, r, q.gt);
  }
  const nlohmann::json doc{{"config", config_to_json(cfg)}, {"results", std::move(results)}};
  write_or_print(a.out, doc.dump(2) + "\n", out);
  return degenerate ? kExitDegenerate : kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string spec;
  std::optional<std::string> sweep;
  std::optional<std::string> topk;
  std::optional<std::string> out;
  std::optional<std::string> csv;
  bool room_hints = false;
  PipelineFlags pipeline;
};

inline std::string recall_csv_cells(const RecallSummary& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.4f,%.4f,%.4f,%.4f", r.r01, r.r05, r.r1, r.r1_30);
  return buf;
}

inline int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  if (a.sweep && a.topk) throw Error(ErrorCode::invalid_argument, "--sweep and --topk are separate runs");
  BenchmarkSpec spec = benchmark_spec_from_json(nlohmann::json::parse(read_text_file(a.spec)));
  a.pipeline.apply(spec.pipeline);
  spec.workers = a.pipeline.worker_count(spec.workers);
  if (a.room_hints) spec.room_hints = true;
  spec.pipeline.validate();
  const nlohmann::json provenance = benchmark_spec_to_json(spec);
  const PreparedBenchmark pb = prepare_benchmark(spec);

  if (a.sweep) {
    const std::string& s = *a.sweep;
    if (s.rfind("ws=", 0) != 0) throw Error(ErrorCode::parse, "--sweep expects ws=lo:hi:step");
    const auto weights = parse_range(s.substr(3));
    std::string csv = "# " + provenance.dump() + "\nw_s,recall_0.1m,recall_0.5m,recall_1m,recall_1m30deg\n";
    for (const auto& p : run_weight_sweep(pb, weights, spec.workers)) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f,", p.w_s);
      csv += buf + recall_csv_cells(p.report.recall) + "\n";
    }
    write_or_print(a.out, csv, out);
    return kExitOk;
  }
  if (a.topk) {
    std::vector<int> ks;
    for (double k : parse_doubles(*a.topk, ',', "--topk")) {
      if (k < 1 || k != std::floor(k)) throw Error(ErrorCode::parse, "--topk values must be positive integers");
      ks.push_back(static_cast<int>(k));
    }
    std::string csv = "# " + provenance.dump() +
                      "\nk,prediction_s,localization_s,refinement_s,total_s,recall_0.1m,recall_0.5m,recall_1m,"
                      "recall_1m30deg\n";
    for (const auto& row : run_topk_timing(pb, ks)) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f,%.6f,", row.k, row.prediction, row.localization,
                    row.refinement, row.total());
      csv += buf + recall_csv_cells(row.recall) + "\n";
    }
    write_or_print(a.out, csv, out);
    return kExitOk;
  }

  const EvalReport report = run_prepared(pb, spec.pipeline, spec.room_hints, spec.hint_confidence, spec.workers);
  write_or_print(a.out, report_to_json(report, provenance).dump(2) + "\n", out);
  if (a.csv) write_text_file(*a.csv, errors_csv(report));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// synth / render
// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out_dir;
  std::uint64_t seed = 1;
  int count = 1;
  std::string extent = "10,8";
  std::string rooms = "3,2";
  double density = SceneParams{}.opening_density;
  double resolution = 0.1;
  bool ambiguity_pair = false;
};

inline int cmd_synth(const SynthArgs& a, std::ostream& out) {
  if (a.count < 1) throw Error(ErrorCode::invalid_argument, "--count must be >= 1");
  SceneParams p;
  const auto ext = parse_doubles(a.extent, ',', "--extent");
  const auto rooms = parse_doubles(a.rooms, ',', "--rooms");
  if (ext.size() != 2 || rooms.size() != 2) throw Error(ErrorCode::parse, "--extent and --rooms take two values");
  p.extent_x = ext[0], p.extent_y = ext[1];
  p.rooms_x = static_cast<int>(rooms[0]), p.rooms_y = static_cast<int>(rooms[1]);
  p.opening_density = a.density;
  p.resolution = a.resolution;
  p.mode = a.ambiguity_pair ? SceneMode::ambiguity_pair : SceneMode::standard;
  p.seed = a.seed;
  std::filesystem::create_directories(a.out_dir);
  nlohmann::json manifest{{"params", scene_params_to_json(p)}, {"scenes", nlohmann::json::array()}};
  for (int i = 0; i < a.count; ++i) {
    SceneParams sp = p;
    sp.seed = mix_seed(p.seed, static_cast<std::uint64_t>(i));
    const GeneratedScene scene = generate_scene(sp);
    char name[32];
    std::snprintf(name, sizeof name, "scene_%03d.json", i);
    const std::string path = (std::filesystem::path(a.out_dir) / name).string();
    save_floorplan(scene.plan, path);
    manifest["scenes"].push_back({{"file", name}, {"seed", sp.seed}, {"doors", scene.doors}, {"windows", scene.windows}});
    out << path << "\n";
  }
  write_text_file((std::filesystem::path(a.out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  return kExitOk;
}

struct RenderArgs {
  std::string volume;
  std::string out;
};

inline int cmd_render(const RenderArgs& a, std::ostream& out) {
  const ProbabilityVolume v = load_volume(a.volume);
  const GrayImage img = render_max_projection(v);
  write_binary(a.out, encode_pgm(img));
  out << a.out << " " << img.width << "x" << img.height << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Floorplan localization from depth and semantic rays"};
  app.require_subcommand(1);

  LocalizeArgs la;
  auto* loc = app.add_subcommand("localize", "localize queries against a floorplan");
  loc->add_option("plan", la.plan, "floorplan JSON")->required();
  loc->add_option("predictions", la.predictions, "prediction JSONL file");
  loc->add_option("--oracle", la.oracle, "ground-truth pose x,y,theta; rays are cast from it");
  loc->add_option("--noise-depth", la.noise_depth, "oracle depth noise sigma in meters");
  loc->add_option("--noise-flip", la.noise_flip, "oracle label flip probability");
  loc->add_option("--seed", la.seed, "oracle noise seed");
  loc->add_option("--room", la.room, "room label hint (overrides the prediction file)");
  loc->add_option("--room-conf", la.room_conf, "confidence of --room");
  loc->add_option("--render", la.render_dir, "write per-stage heatmaps and volumes here");
  loc->add_option("--out", la.out, "write the result JSON here instead of stdout");
  la.pipeline.add_to(*loc);

  EvaluateArgs ea;
  auto* ev = app.add_subcommand("evaluate", "run a synthetic benchmark");
  ev->add_option("spec", ea.spec, "benchmark spec JSON")->required();
  ev->add_option("--sweep", ea.sweep, "weight sweep, e.g. ws=0:1:0.1 (CSV)");
  ev->add_option("--topk", ea.topk, "timing breakdown for K values, e.g. 1,3,5 (CSV)");
  ev->add_option("--out", ea.out, "output file (default stdout)");
  ev->add_option("--csv", ea.csv, "per-query error CSV");
  ev->add_flag("--room-hints", ea.room_hints, "give every query its true room label");
  ea.pipeline.add_to(*ev);

  SynthArgs sa;
  auto* sy = app.add_subcommand("synth", "generate synthetic floorplans");
  sy->add_option("--out", sa.out_dir, "output directory")->required();
  sy->add_option("--seed", sa.seed, "base seed");
  sy->add_option("--count", sa.count, "number of scenes");
  sy->add_option("--extent", sa.extent, "plan size in meters, x,y");
  sy->add_option("--rooms", sa.rooms, "room grid, nx,ny");
  sy->add_option("--density", sa.density, "fraction of exterior walls covered by windows");
  sy->add_option("--resolution", sa.resolution, "cell size in meters");
  sy->add_flag("--ambiguity-pair", sa.ambiguity_pair, "two point-symmetric rooms differing in one opening");

  RenderArgs ra;
  auto* re = app.add_subcommand("render", "render a saved probability volume as a PGM heatmap");
  re->add_option("volume", ra.volume, "volume file")->required();
  re->add_option("--out", ra.out, "PGM path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }
  try {
    if (*loc) return cmd_localize(la, out);
    if (*ev) return cmd_evaluate(ea, out);
    if (*sy) return cmd_synth(sa, out);
    return cmd_render(ra, out);
  } catch (const StageError& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::empty_volume || e.code() == ErrorCode::no_free_poses ? kExitDegenerate : kExitInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace floorloc::cli
