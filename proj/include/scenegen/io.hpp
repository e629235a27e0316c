#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "scenegen/retrieval.hpp"
#include "scenegen/solver.hpp"

namespace scenegen {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using json = nlohmann::json;

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json(const std::string& path) {
  try {
    return json::parse(read_text(path), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw IoError("'" + path + "': " + e.what());
  }
}

/// Writes to a temporary sibling and renames, so a failed run never leaves a partial file.
inline void write_text(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text;
    if (!out) throw IoError("cannot write '" + path + "'");
  }
  fs::rename(tmp, target);
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// Intervals, poses, layouts

inline json to_json(const Interval& a) { return json::array({a.lo(), a.hi()}); }

inline Interval interval_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw IoError("interval must be [lo, hi]");
  try {
    return Interval(j[0].get<double>(), j[1].get<double>());
  } catch (const std::invalid_argument& e) {
    throw IoError(e.what());
  }
}

inline json layout_to_json(const CompiledScene& scene, const LayoutState& s) {
  json arr = json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& p = s.poses[i];
    arr.push_back({{"ref", scene.objects[i].ref.str()},
                   {"x", to_json(p.x)},
                   {"y", to_json(p.y)},
                   {"z", to_json(p.z)},
                   {"d", to_json(p.d)}});
  }
  return arr;
}

inline LayoutState layout_from_json(const CompiledScene& scene, const json& arr) {
  if (!arr.is_array() || arr.size() != scene.size()) throw IoError("layout does not match the scene's objects");
  LayoutState s;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& o = arr[i];
    if (o.at("ref").get<std::string>() != scene.objects[i].ref.str())
      throw IoError("layout object " + std::to_string(i) + " is not " + scene.objects[i].ref.str());
    s.poses.push_back(Pose{interval_from_json(o.at("x")), interval_from_json(o.at("y")),
                           interval_from_json(o.at("z")), interval_from_json(o.at("d"))});
  }
  return s;
}

inline json stats_to_json(const SolverStats& s, bool with_time) {
  json j{{"expansions", s.expansions},   {"prunes", s.prunes},       {"shrink_prunes", s.shrink_prunes},
         {"undecided", s.undecided},     {"solutions", s.solutions}, {"max_queue", s.max_queue},
         {"budget_hit", s.budget_hit}};
  if (with_time) j["seconds"] = s.seconds;
  return j;
}

/// Solution dump: the query (DSL), each solution box with its sampled pose, and the stats.
/// Wall time is left out so identical runs produce identical files.
inline json solutions_to_json(const Query& q, const CompiledScene& scene, const SolveResult& r,
                              std::uint64_t sample_seed) {
  json sols = json::array();
  for (std::size_t k = 0; k < r.solutions.size(); ++k)
    sols.push_back({{"box", layout_to_json(scene, r.solutions[k])},
                    {"sample", layout_to_json(scene, sample_layout(r.solutions[k], sample_seed + k))}});
  return {{"query", render_dsl(q)},
          {"room", {scene.room.x, scene.room.y, scene.room.z}},
          {"status", to_string(r.status)},
          {"proven", r.proven},
          {"stats", stats_to_json(r.stats, false)},
          {"solutions", sols}};
}

// ---------------------------------------------------------------------------
// 2D boxes, references, detections

inline json to_json(const Box2D& b) {
  json j{{"category", b.category}, {"x_min", b.x_min}, {"y_min", b.y_min},
         {"x_max", b.x_max},       {"y_max", b.y_max}, {"confidence", b.confidence}};
  if (!b.label.empty()) j["label"] = b.label;
  return j;
}

inline Box2D box_from_json(const json& j) {
  Box2D b;
  b.category = j.at("category").get<std::string>();
  b.x_min = j.at("x_min").get<double>();
  b.y_min = j.at("y_min").get<double>();
  b.x_max = j.at("x_max").get<double>();
  b.y_max = j.at("y_max").get<double>();
  b.confidence = j.value("confidence", 1.0);
  b.label = j.value("label", std::string{});
  if (!b.valid()) throw IoError("degenerate box for '" + b.category + "'");
  if (!(b.confidence >= 0 && b.confidence <= 1)) throw IoError("confidence outside [0, 1]");
  return b;
}

inline json to_json(const CameraPose& c) {
  return {{"x", c.x},
          {"y", c.y},
          {"z", c.z},
          {"yaw", c.yaw},
          {"hfov_deg", c.intrinsics.hfov_deg},
          {"width", c.intrinsics.width},
          {"height", c.intrinsics.height}};
}

inline CameraPose camera_from_json(const json& j) {
  CameraPose c;
  c.x = j.at("x").get<double>();
  c.y = j.at("y").get<double>();
  c.z = j.value("z", 1.7);
  c.yaw = j.at("yaw").get<double>();
  c.intrinsics.hfov_deg = j.value("hfov_deg", 60.0);
  c.intrinsics.width = j.value("width", 640);
  c.intrinsics.height = j.value("height", 480);
  return c;
}

inline json to_json(const ReferenceLayout& r) {
  json boxes = json::array();
  for (const auto& b : r.boxes) boxes.push_back(to_json(b));
  return {{"layout", r.layout_index}, {"camera_index", r.camera_index}, {"camera", to_json(r.camera)},
          {"width", r.width},         {"height", r.height},             {"boxes", boxes}};
}

inline ReferenceLayout reference_from_json(const json& j) {
  ReferenceLayout r;
  r.layout_index = j.value("layout", std::size_t(0));
  r.camera_index = j.value("camera_index", std::size_t(0));
  if (j.contains("camera")) r.camera = camera_from_json(j["camera"]);
  r.width = j.value("width", 640);
  r.height = j.value("height", 480);
  for (const auto& b : j.at("boxes")) r.boxes.push_back(box_from_json(b));
  if (r.boxes.empty()) throw IoError("reference layout without boxes");
  return r;
}

/// References file: the references plus the query's category histogram (for the baseline).
inline json references_to_json(const std::vector<ReferenceLayout>& refs, const std::map<std::string, int>& hist) {
  json arr = json::array();
  for (const auto& r : refs) arr.push_back(to_json(r));
  return {{"histogram", hist}, {"references", arr}};
}

struct ReferenceFile {
  std::vector<ReferenceLayout> references;
  std::map<std::string, int> histogram;
};

inline ReferenceFile references_from_json(const json& j) {
  ReferenceFile f;
  for (const auto& r : j.at("references")) f.references.push_back(reference_from_json(r));
  if (j.contains("histogram")) f.histogram = j["histogram"].get<std::map<std::string, int>>();
  return f;
}

inline json to_json(const DetectionSet& d) {
  json boxes = json::array();
  for (const auto& b : d.boxes) boxes.push_back(to_json(b));
  return {{"image_id", d.image_id}, {"width", d.width}, {"height", d.height}, {"boxes", boxes}};
}

inline DetectionSet detections_from_json(const json& j) {
  DetectionSet d;
  d.image_id = j.at("image_id").get<std::string>();
  d.width = j.at("width").get<int>();
  d.height = j.at("height").get<int>();
  if (d.width <= 0 || d.height <= 0) throw IoError(d.image_id + ": image size must be positive");
  for (const auto& b : j.at("boxes")) d.boxes.push_back(box_from_json(b));
  return d;
}

/// Every *.json file in `dir`, sorted by file name.
inline std::vector<DetectionSet> load_detections(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("'" + dir + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<DetectionSet> out;
  for (const auto& f : files) {
    try {
      out.push_back(detections_from_json(read_json(f.string())));
    } catch (const json::exception& e) {
      throw IoError("'" + f.string() + "': " + e.what());
    }
  }
  if (out.empty()) throw IoError("no detection files in '" + dir + "'");
  return out;
}

inline json ranking_to_json(const std::string& query_id, const std::string& scorer,
                            const std::vector<ImageScore>& ranking) {
  json arr = json::array();
  for (std::size_t k = 0; k < ranking.size(); ++k) {
    const auto& s = ranking[k];
    json e{{"rank", k + 1}, {"image_id", s.image_id}, {"score", s.score}};
    if (scorer != "histogram") {
      e["reference"] = s.reference;
      e["best_scale"] = s.match.scale;
      e["best_translation"] = {s.match.tx, s.match.ty};
      e["assignment"] = s.match.assignment;
    }
    arr.push_back(std::move(e));
  }
  return {{"query_id", query_id}, {"scorer", scorer}, {"ranking", arr}};
}

/// (query id, image ids in rank order).
inline std::pair<std::string, std::vector<ImageScore>> ranking_from_json(const json& j) {
  std::vector<ImageScore> out;
  for (const auto& e : j.at("ranking")) {
    ImageScore s;
    s.image_id = e.at("image_id").get<std::string>();
    s.score = e.at("score").get<double>();
    out.push_back(std::move(s));
  }
  return {j.at("query_id").get<std::string>(), out};
}

}  // namespace scenegen
