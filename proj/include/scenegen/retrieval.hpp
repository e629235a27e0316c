#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "scenegen/projection.hpp"
#include "scenegen/query.hpp"

namespace scenegen {

struct DetectionSet {
  std::string image_id;
  int width = 640;
  int height = 480;
  std::vector<Box2D> boxes;
};

struct MatchConfig {
  enum class Mode { Hard, Soft };
  Mode mode = Mode::Soft;
  double detection_threshold = 0.5;
  int scale_count = 5;
  double scale_min = 0.5;
  double scale_max = 1.0;
  double stride = 10;

  std::vector<double> scales() const {
    std::vector<double> s;
    for (int i = 0; i < scale_count; ++i)
      s.push_back(scale_count == 1 ? scale_max : scale_min + (scale_max - scale_min) * i / (scale_count - 1));
    return s;
  }

  void validate() const {
    if (!(scale_min > 0 && scale_min <= scale_max && scale_max <= 1)) throw ValidationError("scale range must lie in (0, 1]");
    if (scale_count < 1) throw ValidationError("scale count must be positive");
    if (!(stride >= 1)) throw ValidationError("stride must be >= 1");
  }
};

struct MatchResult {
  double score = 0;
  double scale = 1;  ///< s relative to the reference fitted into the detection image
  double tx = 0, ty = 0;
  std::vector<int> assignment;  ///< per reference box: detection index or -1
};

inline double iou(const Box2D& a, const Box2D& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0 || ih <= 0) return 0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0;
}

/// Detections entering the match score with their weight p: hard mode thresholds and uses
/// p = 1, soft mode keeps everything with p = confidence.
inline std::vector<std::pair<std::size_t, double>> weighted_detections(const DetectionSet& det,
                                                                      const MatchConfig& cfg) {
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t j = 0; j < det.boxes.size(); ++j) {
    const double c = det.boxes[j].confidence;
    if (cfg.mode == MatchConfig::Mode::Hard) {
      if (c >= cfg.detection_threshold) out.emplace_back(j, 1.0);
    } else if (c > 0) {
      out.emplace_back(j, c);
    }
  }
  return out;
}

namespace detail {

/// Category-compatible (reference, detection, weight) triples.
struct MatchPair {
  std::size_t i, j;
  double p;
};

inline std::vector<MatchPair> compatible_pairs(const std::vector<Box2D>& refs, const DetectionSet& det,
                                               const std::vector<std::pair<std::size_t, double>>& dets) {
  std::vector<MatchPair> out;
  for (std::size_t i = 0; i < refs.size(); ++i)
    for (const auto& [j, p] : dets)
      if (det.boxes[j].category == refs[i].category) out.push_back({i, j, p});
  return out;
}

struct GreedyScratch {
  struct Cand {
    double gain;
    std::size_t i, j;
  };
  std::vector<Cand> cands;
  std::vector<char> used;
};

inline double greedy_pairs(const std::vector<MatchPair>& pairs, const std::vector<Box2D>& refs,
                           const DetectionSet& det, std::vector<int>& assignment, GreedyScratch& scratch) {
  auto& cands = scratch.cands;
  cands.clear();
  for (const auto& m : pairs) {
    const double g = m.p * iou(refs[m.i], det.boxes[m.j]);
    if (g > 0) cands.push_back({g, m.i, m.j});
  }
  std::sort(cands.begin(), cands.end(), [](const GreedyScratch::Cand& a, const GreedyScratch::Cand& b) {
    return std::tie(b.gain, a.i, a.j) < std::tie(a.gain, b.i, b.j);
  });
  assignment.assign(refs.size(), -1);
  scratch.used.assign(det.boxes.size(), 0);
  double score = 0;
  for (const auto& c : cands) {
    if (assignment[c.i] >= 0 || scratch.used[c.j]) continue;
    assignment[c.i] = int(c.j);
    scratch.used[c.j] = 1;
    score += c.gain;
  }
  return score;
}

}  // namespace detail

/// Greedy assignment: repeatedly take the highest-gain category-matching pair of
/// unused boxes (ties: lower reference index, then lower detection index).
inline double greedy_assign(const std::vector<Box2D>& refs, const DetectionSet& det,
                            const std::vector<std::pair<std::size_t, double>>& dets, std::vector<int>& assignment) {
  detail::GreedyScratch scratch;
  return detail::greedy_pairs(detail::compatible_pairs(refs, det, dets), refs, det, assignment, scratch);
}

/// Match score: max over scales s and stride-grid translations t of the greedy
/// sum of p * IOU(s*b + t, b'). The reference image is first fitted into the
/// detection image by a uniform factor; t ranges over all grid points that keep
/// the scaled reference hull at least partly inside the image.
inline MatchResult match_layout(const ReferenceLayout& ref, const DetectionSet& det, const MatchConfig& cfg) {
  MatchResult best;
  best.assignment.assign(ref.boxes.size(), -1);
  const auto dets = weighted_detections(det, cfg);
  if (dets.empty() || ref.boxes.empty()) return best;

  // Reference boxes whose category never occurs among the detections cannot score.
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < ref.boxes.size(); ++i)
    for (const auto& [j, p] : dets)
      if (det.boxes[j].category == ref.boxes[i].category) {
        live.push_back(i);
        break;
      }
  if (live.empty()) return best;

  const double fit = std::min(double(det.width) / ref.width, double(det.height) / ref.height);
  double hx0 = 1e300, hy0 = 1e300, hx1 = -1e300, hy1 = -1e300;
  for (const auto& b : ref.boxes) {
    hx0 = std::min(hx0, b.x_min);
    hy0 = std::min(hy0, b.y_min);
    hx1 = std::max(hx1, b.x_max);
    hy1 = std::max(hy1, b.y_max);
  }

  std::vector<Box2D> moved(live.size());
  for (std::size_t m = 0; m < live.size(); ++m) moved[m].category = ref.boxes[live[m]].category;
  const auto pairs = detail::compatible_pairs(moved, det, dets);
  detail::GreedyScratch scratch;
  std::vector<int> assignment;
  bool have = false;
  for (double s : cfg.scales()) {
    const double k = s * fit;
    const long kx0 = long(std::floor(-k * hx1 / cfg.stride)) + 1;
    const long kx1 = long(std::ceil((det.width - k * hx0) / cfg.stride)) - 1;
    const long ky0 = long(std::floor(-k * hy1 / cfg.stride)) + 1;
    const long ky1 = long(std::ceil((det.height - k * hy0) / cfg.stride)) - 1;
    for (long ix = kx0; ix <= kx1; ++ix)
      for (long iy = ky0; iy <= ky1; ++iy) {
        const double tx = double(ix) * cfg.stride, ty = double(iy) * cfg.stride;
        for (std::size_t m = 0; m < live.size(); ++m) {
          const Box2D& b = ref.boxes[live[m]];
          moved[m].x_min = k * b.x_min + tx;
          moved[m].y_min = k * b.y_min + ty;
          moved[m].x_max = k * b.x_max + tx;
          moved[m].y_max = k * b.y_max + ty;
        }
        const double score = detail::greedy_pairs(pairs, moved, det, assignment, scratch);
        if (!have || score > best.score) {
          have = true;
          best.score = score;
          best.scale = s;
          best.tx = tx;
          best.ty = ty;
          best.assignment.assign(ref.boxes.size(), -1);
          for (std::size_t m = 0; m < live.size(); ++m) best.assignment[live[m]] = assignment[m];
        }
      }
  }
  return best;
}

struct ImageScore {
  std::string image_id;
  double score = 0;
  std::size_t reference = 0;  ///< index of the best reference layout
  MatchResult match;
};

/// Highest match score over all reference layouts.
inline ImageScore score_image(const std::vector<ReferenceLayout>& refs, const DetectionSet& det,
                              const MatchConfig& cfg) {
  ImageScore out;
  out.image_id = det.image_id;
  bool have = false;
  for (std::size_t r = 0; r < refs.size(); ++r) {
    auto m = match_layout(refs[r], det, cfg);
    if (!have || m.score > out.score) {
      have = true;
      out.score = m.score;
      out.reference = r;
      out.match = std::move(m);
    }
  }
  return out;
}

/// Descending score, ties by image id.
inline void sort_ranking(std::vector<ImageScore>& v) {
  std::sort(v.begin(), v.end(), [](const ImageScore& a, const ImageScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.image_id < b.image_id;
  });
}

/// Scores every image (in parallel over `workers` threads) and sorts the result.
template <typename Scorer>
std::vector<ImageScore> rank_with(const std::vector<DetectionSet>& db, Scorer&& scorer, unsigned workers = 1) {
  std::vector<ImageScore> out(db.size());
  workers = std::max(1u, std::min<unsigned>(workers, unsigned(db.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < db.size(); i = next++) out[i] = scorer(db[i]);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  sort_ranking(out);
  return out;
}

inline std::vector<ImageScore> rank_database(const std::vector<ReferenceLayout>& refs,
                                             const std::vector<DetectionSet>& db, const MatchConfig& cfg,
                                             unsigned workers = 1) {
  if (db.empty()) throw ValidationError("empty detection database");
  if (refs.empty()) throw ValidationError("no reference layouts");
  cfg.validate();
  return rank_with(db, [&](const DetectionSet& d) { return score_image(refs, d, cfg); }, workers);
}

// ---------------------------------------------------------------------------
// Occurrence-histogram baseline

/// Category -> number of objects in the query (counts included).
inline std::map<std::string, int> query_histogram(const Query& q) {
  std::map<std::string, int> h;
  for (const auto& [ref, n] : q.counts)
    if (!q.is_group(ref)) h[ref.category] += n;
  return h;
}

/// Negated l1 distance between category counts of the query and of the
/// detections at or above the threshold.
inline double baseline_histogram(const std::map<std::string, int>& query, const DetectionSet& det,
                                 const MatchConfig& cfg) {
  std::map<std::string, int> img;
  for (const auto& b : det.boxes)
    if (b.confidence >= cfg.detection_threshold) ++img[b.category];
  double l1 = 0;
  for (const auto& [c, n] : query) {
    auto it = img.find(c);
    l1 += std::abs(n - (it == img.end() ? 0 : it->second));
  }
  for (const auto& [c, n] : img)
    if (!query.count(c)) l1 += n;
  return -l1;
}

inline double baseline_histogram(const Query& q, const DetectionSet& det, const MatchConfig& cfg) {
  return baseline_histogram(query_histogram(q), det, cfg);
}

inline std::vector<ImageScore> rank_baseline(const std::map<std::string, int>& query,
                                             const std::vector<DetectionSet>& db, const MatchConfig& cfg,
                                             unsigned workers = 1) {
  if (db.empty()) throw ValidationError("empty detection database");
  return rank_with(
      db,
      [&](const DetectionSet& d) {
        ImageScore s;
        s.image_id = d.image_id;
        s.score = baseline_histogram(query, d, cfg);
        return s;
      },
      workers);
}

// ---------------------------------------------------------------------------
// Metrics

/// 1-based ranks of the ground-truth images within a ranking.
inline std::vector<std::size_t> ground_truth_ranks(const std::vector<ImageScore>& ranking,
                                                   const std::vector<std::string>& gt) {
  if (gt.empty()) throw ValidationError("query without ground truth");
  std::vector<std::size_t> out;
  for (const auto& id : gt) {
    auto it = std::find_if(ranking.begin(), ranking.end(), [&](const ImageScore& s) { return s.image_id == id; });
    if (it == ranking.end()) throw ValidationError("ground-truth image '" + id + "' is not in the ranking");
    out.push_back(std::size_t(it - ranking.begin()) + 1);
  }
  return out;
}

/// Fraction of queries whose best ground-truth rank is <= k.
inline double recall_at_k(const std::vector<std::vector<std::size_t>>& ranks, std::size_t k) {
  if (ranks.empty()) throw ValidationError("no queries");
  std::size_t hit = 0;
  for (const auto& r : ranks) {
    if (r.empty()) throw ValidationError("query without ground truth");
    if (*std::min_element(r.begin(), r.end()) <= k) ++hit;
  }
  return double(hit) / double(ranks.size());
}

/// Median of all ground-truth ranks (mean of the middle two for an even count).
inline double median_rank(const std::vector<std::vector<std::size_t>>& ranks) {
  std::vector<std::size_t> all;
  for (const auto& r : ranks) {
    if (r.empty()) throw ValidationError("query without ground truth");
    all.insert(all.end(), r.begin(), r.end());
  }
  if (all.empty()) throw ValidationError("no queries");
  std::sort(all.begin(), all.end());
  const std::size_t n = all.size();
  return n % 2 ? double(all[n / 2]) : (double(all[n / 2 - 1]) + double(all[n / 2])) / 2;
}

}  // namespace scenegen
