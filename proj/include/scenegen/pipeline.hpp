#pragma once

#include <cstdlib>
#include <array>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "scenegen/io.hpp"

#ifndef SCENEGEN_DEFAULT_DATA_DIR
#define SCENEGEN_DEFAULT_DATA_DIR "data"
#endif

namespace scenegen {

inline std::string default_data_dir() {
  if (const char* env = std::getenv("SCENEGEN_DATA_DIR"); env && *env) return env;
  return SCENEGEN_DEFAULT_DATA_DIR;
}

/// Every tunable of a run. Defaults: 5 m room, near 0.5 m, above 0.25-0.5 m,
/// tol 0.2 m, 5 layouts x 1 camera, 5 scales in [0.5, 1], 10 px stride, threshold 0.5.
struct RunConfig {
  Room room;
  RelationThresholds thresholds;
  SolverConfig solver;
  MatchConfig match;
  std::size_t layouts = 5;
  std::size_t cameras = 1;
  Intrinsics intrinsics;
  std::string objects_path = default_data_dir() + "/objects.json";
  std::string relations_path = default_data_dir() + "/relations.json";
  std::string detections_dir;
  std::string ground_truth_path;
  std::uint64_t seed = 0;
  unsigned workers = 1;

  /// Overlays the keys present in `j`; unknown keys are rejected.
  void merge(const json& j) {
    static const std::set<std::string> known{
        "room",   "d_near",      "d_min_above",    "d_max_above", "d_coherence", "tol",       "K",
        "max_expansions", "shrinkage", "mode", "detection_threshold", "scales", "scale_min", "scale_max",
        "stride", "layouts",     "cameras",        "hfov_deg",    "width",       "height",    "objects",
        "relations", "detections", "ground_truth", "seed",        "workers"};
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!known.count(it.key())) throw ValidationError("unknown config key '" + it.key() + "'");
    if (j.contains("room")) {
      const auto r = j["room"].get<std::array<double, 3>>();
      room = Room{r[0], r[1], r[2]};
    }
    thresholds.d_near = j.value("d_near", thresholds.d_near);
    thresholds.d_min_above = j.value("d_min_above", thresholds.d_min_above);
    thresholds.d_max_above = j.value("d_max_above", thresholds.d_max_above);
    thresholds.d_coherence = j.value("d_coherence", thresholds.d_coherence);
    solver.tol = j.value("tol", solver.tol);
    solver.K = j.value("K", solver.K);
    solver.max_expansions = j.value("max_expansions", solver.max_expansions);
    solver.shrinkage = j.value("shrinkage", solver.shrinkage);
    if (j.contains("mode")) match.mode = parse_mode(j["mode"].get<std::string>());
    match.detection_threshold = j.value("detection_threshold", match.detection_threshold);
    match.scale_count = j.value("scales", match.scale_count);
    match.scale_min = j.value("scale_min", match.scale_min);
    match.scale_max = j.value("scale_max", match.scale_max);
    match.stride = j.value("stride", match.stride);
    layouts = j.value("layouts", layouts);
    cameras = j.value("cameras", cameras);
    intrinsics.hfov_deg = j.value("hfov_deg", intrinsics.hfov_deg);
    intrinsics.width = j.value("width", intrinsics.width);
    intrinsics.height = j.value("height", intrinsics.height);
    objects_path = j.value("objects", objects_path);
    relations_path = j.value("relations", relations_path);
    detections_dir = j.value("detections", detections_dir);
    ground_truth_path = j.value("ground_truth", ground_truth_path);
    seed = j.value("seed", seed);
    workers = j.value("workers", workers);
  }

  void validate() const {
    thresholds.validate();
    solver.validate();
    match.validate();
    if (!(room.x > 0 && room.y > 0 && room.z > 0)) throw ValidationError("room extents must be positive");
    if (layouts < 1 || cameras < 1) throw ValidationError("layouts and cameras must be >= 1");
    if (!(intrinsics.hfov_deg > 0 && intrinsics.hfov_deg < 180) || intrinsics.width < 1 || intrinsics.height < 1)
      throw ValidationError("invalid camera intrinsics");
  }

  static MatchConfig::Mode parse_mode(const std::string& m) {
    if (m == "soft") return MatchConfig::Mode::Soft;
    if (m == "hard") return MatchConfig::Mode::Hard;
    throw ValidationError("mode must be 'hard' or 'soft'");
  }
};

/// Starting configuration: defaults overlaid with the file named by SCENEGEN_CONFIG, if set.
inline RunConfig load_default_config() {
  RunConfig cfg;
  if (const char* env = std::getenv("SCENEGEN_CONFIG"); env && *env) cfg.merge(read_json(env));
  return cfg;
}

struct Vocabulary {
  ObjectLibrary objects;
  RelationDictionary relations;

  static Vocabulary load(const RunConfig& cfg) {
    return {ObjectLibrary::load(cfg.objects_path), RelationDictionary::load(cfg.relations_path)};
  }
};

/// Text in either input language; English when `english` is set.
inline Query parse_query(const std::string& text, bool english, const Vocabulary& v) {
  Query q = english ? parse_english(text, v.objects, v.relations) : parse_dsl(text, v.objects, v.relations);
  if (q.counts.empty()) throw ParseError(0, "query mentions no objects");
  validate(q, v.objects, v.relations);
  return q;
}

struct QueryRun {
  std::string id;
  Query query;
  CompiledScene scene;
  SolveResult solve;
  ReferenceSet references;
  std::vector<ImageScore> ranking;
};

/// parse -> compile -> solve -> render; ranking is left empty.
inline QueryRun synthesize(const std::string& id, const Query& q, const Vocabulary& v, const RunConfig& cfg) {
  QueryRun run;
  run.id = id;
  run.query = q;
  run.scene = compile(q, v.objects, cfg.thresholds, cfg.room);
  SolverConfig sc = cfg.solver;
  sc.seed = cfg.seed;
  run.solve = solve(run.scene, sc);
  if (!run.solve.solutions.empty())
    run.references = generate_references(run.scene, run.solve.solutions, cfg.layouts, cfg.cameras, cfg.seed,
                                         cfg.intrinsics);
  return run;
}

/// Ranks the database for one synthesized query. Without references every image
/// scores 0 (the ranking degrades to image-id order).
inline std::vector<ImageScore> rank_query(const QueryRun& run, const std::vector<DetectionSet>& db,
                                          const RunConfig& cfg, bool histogram_baseline) {
  if (histogram_baseline) return rank_baseline(query_histogram(run.query), db, cfg.match, cfg.workers);
  if (run.references.references.empty()) {
    std::vector<ImageScore> out;
    for (const auto& d : db) out.push_back(ImageScore{d.image_id, 0.0, 0, {}});
    sort_ranking(out);
    return out;
  }
  return rank_database(run.references.references, db, cfg.match, cfg.workers);
}

struct MetricsTable {
  std::vector<std::size_t> ks{1, 10, 50, 100, 500};
  std::vector<double> recall;
  double median = 0;
  std::size_t queries = 0;
};

inline MetricsTable evaluate(const std::vector<std::vector<std::size_t>>& ranks,
                             std::vector<std::size_t> ks = {1, 10, 50, 100, 500}) {
  MetricsTable t;
  t.ks = std::move(ks);
  for (auto k : t.ks) t.recall.push_back(recall_at_k(ranks, k));
  t.median = median_rank(ranks);
  t.queries = ranks.size();
  return t;
}

inline std::string format_metrics(const MetricsTable& t) {
  std::string head, row;
  char buf[64];
  for (std::size_t i = 0; i < t.ks.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%8s", ("R@" + std::to_string(t.ks[i])).c_str());
    head += buf;
    std::snprintf(buf, sizeof buf, "%8.3f", t.recall[i]);
    row += buf;
  }
  std::snprintf(buf, sizeof buf, "%8s", "median");
  head += buf;
  std::snprintf(buf, sizeof buf, "%8.1f", t.median);
  row += buf;
  return head + "\n" + row + "\n";
}

inline json metrics_to_json(const MetricsTable& t) {
  json r = json::object();
  for (std::size_t i = 0; i < t.ks.size(); ++i) r["R@" + std::to_string(t.ks[i])] = t.recall[i];
  return {{"queries", t.queries}, {"recall", r}, {"median_rank", t.median}};
}

/// Ground-truth file: {"query id": ["image id", ...], ...}.
inline std::map<std::string, std::vector<std::string>> load_ground_truth(const std::string& path) {
  try {
    return read_json(path).get<std::map<std::string, std::vector<std::string>>>();
  } catch (const json::exception& e) {
    throw IoError("'" + path + "': " + e.what());
  }
}

}  // namespace scenegen
