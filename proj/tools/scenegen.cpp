#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scenegen/scenegen.hpp"

namespace fs = std::filesystem;
using namespace scenegen;

namespace {

enum Exit { kOk = 0, kOther = 1, kParse = 2, kInfeasible = 3, kBudget = 4, kIo = 5 };

/// Command-line overrides; unset fields keep the config-file value.
struct Overrides {
  std::optional<std::string> config, objects, relations;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<std::size_t> K, max_expansions, layouts, cameras;
  std::optional<std::string> mode;
  std::optional<unsigned> workers;
  bool no_shrinkage = false;

  RunConfig apply() const {
    RunConfig cfg = load_default_config();
    if (config) cfg.merge(read_json(*config));
    if (objects) cfg.objects_path = *objects;
    if (relations) cfg.relations_path = *relations;
    if (seed) cfg.seed = *seed;
    if (tol) cfg.solver.tol = *tol;
    if (K) cfg.solver.K = *K;
    if (max_expansions) cfg.solver.max_expansions = *max_expansions;
    if (layouts) cfg.layouts = *layouts;
    if (cameras) cfg.cameras = *cameras;
    if (mode) cfg.match.mode = RunConfig::parse_mode(*mode);
    if (workers) cfg.workers = *workers;
    if (no_shrinkage) cfg.solver.shrinkage = false;
    cfg.validate();
    return cfg;
  }
};

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  return read_text(path);
}

int status_exit(SolveStatus s) {
  switch (s) {
    case SolveStatus::Solved: return kOk;
    case SolveStatus::Infeasible: return kInfeasible;
    case SolveStatus::BudgetExhausted: return kBudget;
  }
  return kOther;
}

void print_stats(const SolveResult& r) {
  std::printf("status: %s%s\n", to_string(r.status),
              r.status == SolveStatus::Infeasible ? " (proven infeasible)" : "");
  std::printf("solutions: %zu  expansions: %zu  prunes: %zu  shrink prunes: %zu  undecided: %zu  time: %.3f s\n",
              r.solutions.size(), r.stats.expansions, r.stats.prunes, r.stats.shrink_prunes, r.stats.undecided,
              r.stats.seconds);
}

void print_query(const Query& q) {
  std::cout << format_triplets(q);
  for (const auto& d : q.diagnostics) {
    const char* sev = d.severity == Diagnostic::Severity::Error     ? "error"
                      : d.severity == Diagnostic::Severity::Warning ? "warning"
                                                                    : "info";
    std::cerr << sev << ": line " << d.line << ": " << d.message << "\n";
  }
}

std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

std::string render_svg(const ReferenceLayout& r) {
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << r.width << "\" height=\"" << r.height << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\" stroke=\"black\"/>\n";
  for (const auto& b : r.boxes) {
    o << "<rect x=\"" << b.x_min << "\" y=\"" << b.y_min << "\" width=\"" << b.width() << "\" height=\""
      << b.height() << "\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << b.x_min + 3 << "\" y=\"" << b.y_min + 14 << "\" font-size=\"12\">"
      << svg_escape(b.label.empty() ? b.category : b.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

struct LoadedSolutions {
  Query query;
  CompiledScene scene;
  std::vector<LayoutState> solutions;
};

LoadedSolutions load_solutions(const std::string& path, const Vocabulary& v, const RunConfig& cfg) {
  const json j = read_json(path);
  LoadedSolutions out;
  try {
    out.query = parse_query(j.at("query").get<std::string>(), false, v);
    Room room = cfg.room;
    if (j.contains("room")) {
      const auto r = j["room"].get<std::array<double, 3>>();
      room = Room{r[0], r[1], r[2]};
    }
    out.scene = compile(out.query, v.objects, cfg.thresholds, room);
    for (const auto& s : j.at("solutions")) out.solutions.push_back(layout_from_json(out.scene, s.at("box")));
  } catch (const json::exception& e) {
    throw IoError("'" + path + "': " + e.what());
  }
  return out;
}

std::vector<std::size_t> parse_k_list(const std::string& s) {
  std::vector<std::size_t> ks;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      const long v = std::stol(tok, &pos);
      if (pos != tok.size() || v < 1) throw std::invalid_argument(tok);
      ks.push_back(std::size_t(v));
    } catch (const std::exception&) {
      throw ValidationError("bad k value '" + tok + "'");
    }
  }
  if (ks.empty()) throw ValidationError("empty k list");
  return ks;
}

std::vector<std::vector<std::size_t>> collect_ranks(
    const std::vector<std::pair<std::string, std::vector<ImageScore>>>& rankings,
    const std::map<std::string, std::vector<std::string>>& gt) {
  std::vector<std::vector<std::size_t>> ranks;
  for (const auto& [id, ranking] : rankings) {
    auto it = gt.find(id);
    if (it == gt.end()) throw ValidationError("no ground truth for query '" + id + "'");
    ranks.push_back(ground_truth_ranks(ranking, it->second));
  }
  return ranks;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text-to-layout scene synthesis and layout-based image retrieval"};
  app.require_subcommand(1);
  Overrides ov;
  app.add_option("--config", ov.config, "JSON config file (flags win over it)");
  app.add_option("--objects", ov.objects, "object library JSON");
  app.add_option("--relations", ov.relations, "relation dictionary JSON");
  app.add_option("--seed", ov.seed, "random seed");

  // parse
  auto* p = app.add_subcommand("parse", "parse a query and print its triplets");
  std::string p_in = "-", p_out;
  bool p_english = false, p_dsl = false;
  p->add_option("input", p_in, "query file, or - for stdin");
  auto* pe = p->add_flag("--english", p_english, "input is English text");
  p->add_flag("--dsl", p_dsl, "input is the triplet DSL (default)")->excludes(pe);
  p->add_option("-o,--out", p_out, "write the canonical DSL here");

  // solve
  auto* s = app.add_subcommand("solve", "synthesize 3D layouts for a query");
  std::string s_in, s_out;
  bool s_english = false, s_dsl = false;
  s->add_option("query", s_in, "query file, or - for stdin")->required();
  auto* se = s->add_flag("--english", s_english, "query is English text");
  s->add_flag("--dsl", s_dsl, "query is the triplet DSL (default)")->excludes(se);
  s->add_option("-o,--out", s_out, "solution file")->required();
  s->add_option("-K,--solutions", ov.K, "solutions to collect");
  s->add_option("--tol", ov.tol, "box width considered solved (m)");
  s->add_option("--max-expansions", ov.max_expansions, "node expansion budget");
  s->add_flag("--no-shrinkage", ov.no_shrinkage, "disable bound shrinkage (ablation)");

  // render
  auto* r = app.add_subcommand("render", "project solutions to 2D reference layouts");
  std::string r_in, r_out, r_svg;
  r->add_option("solutions", r_in, "solution file")->required();
  r->add_option("-o,--out", r_out, "references file")->required();
  r->add_option("-m,--layouts", ov.layouts, "layouts to sample");
  r->add_option("-v,--cameras", ov.cameras, "cameras per layout");
  r->add_option("--svg", r_svg, "directory for one SVG per reference");

  // rank
  auto* k = app.add_subcommand("rank", "rank a detection database against reference layouts");
  std::string k_in, k_det, k_out, k_id, k_baseline;
  k->add_option("references", k_in, "references file")->required();
  k->add_option("-d,--detections", k_det, "directory of detection JSON files")->required();
  k->add_option("-o,--out", k_out, "ranking file")->required();
  k->add_option("--mode", ov.mode, "hard or soft")->check(CLI::IsMember({"hard", "soft"}));
  k->add_option("--baseline", k_baseline, "h: occurrence-histogram baseline")->check(CLI::IsMember({"h"}));
  k->add_option("--query-id", k_id, "query id (default: references file stem)");
  k->add_option("-j,--workers", ov.workers, "worker threads");

  // eval
  auto* e = app.add_subcommand("eval", "recall@k and median rank of ranking files");
  std::vector<std::string> e_in;
  std::string e_gt, e_k = "1,10,50,100,500", e_out;
  e->add_option("rankings", e_in, "ranking files")->required();
  e->add_option("-g,--ground-truth", e_gt, "ground-truth JSON")->required();
  e->add_option("--k", e_k, "comma-separated k values");
  e->add_option("-o,--out", e_out, "metrics JSON");

  // pipeline
  auto* pl = app.add_subcommand("pipeline", "parse, solve, render, rank and evaluate a query set");
  std::string pl_q, pl_det, pl_gt, pl_out, pl_k = "1,10,50,100,500";
  bool pl_baseline = false;
  pl->add_option("queries", pl_q, "queries JSON: {\"queries\": [{\"id\", \"english\"|\"dsl\"}]}")->required();
  pl->add_option("-d,--detections", pl_det, "directory of detection JSON files")->required();
  pl->add_option("-g,--ground-truth", pl_gt, "ground-truth JSON");
  pl->add_option("-o,--out", pl_out, "output directory")->required();
  pl->add_option("--k", pl_k, "comma-separated k values");
  pl->add_option("--mode", ov.mode, "hard or soft")->check(CLI::IsMember({"hard", "soft"}));
  pl->add_flag("--baseline-h", pl_baseline, "also rank with the histogram baseline");
  pl->add_option("-K,--solutions", ov.K, "solutions to collect");
  pl->add_option("--max-expansions", ov.max_expansions, "node expansion budget");
  pl->add_option("-m,--layouts", ov.layouts, "layouts to sample");
  pl->add_option("-v,--cameras", ov.cameras, "cameras per layout");
  pl->add_option("-j,--workers", ov.workers, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? kOk : kOther;
  }

  try {
    const RunConfig cfg = ov.apply();
    const Vocabulary vocab = Vocabulary::load(cfg);

    if (p->parsed()) {
      const Query q = parse_query(read_input(p_in), p_english, vocab);
      print_query(q);
      if (!p_out.empty()) write_text(p_out, render_dsl(q));
      return kOk;
    }

    if (s->parsed()) {
      const Query q = parse_query(read_input(s_in), s_english, vocab);
      const CompiledScene scene = compile(q, vocab.objects, cfg.thresholds, cfg.room);
      SolverConfig sc = cfg.solver;
      sc.seed = cfg.seed;
      const SolveResult res = solve(scene, sc);
      print_stats(res);
      if (!res.solutions.empty()) write_json(s_out, solutions_to_json(q, scene, res, cfg.seed));
      if (res.status == SolveStatus::BudgetExhausted && !res.solutions.empty())
        std::fprintf(stderr, "budget exhausted after %zu of %zu solutions\n", res.solutions.size(), sc.K);
      return status_exit(res.status);
    }

    if (r->parsed()) {
      const auto sol = load_solutions(r_in, vocab, cfg);
      if (sol.solutions.empty()) throw ValidationError("solution file holds no solutions");
      const ReferenceSet refs =
          generate_references(sol.scene, sol.solutions, cfg.layouts, cfg.cameras, cfg.seed, cfg.intrinsics);
      std::printf("references: %zu  degenerate views: %zu\n", refs.references.size(), refs.degenerate);
      if (refs.references.empty()) {
        std::fprintf(stderr, "degenerate view: no camera sees any object\n");
        return kOther;
      }
      write_json(r_out, references_to_json(refs.references, query_histogram(sol.query)));
      if (!r_svg.empty())
        for (std::size_t i = 0; i < refs.references.size(); ++i)
          write_text((fs::path(r_svg) / ("reference-" + std::to_string(i) + ".svg")).string(),
                     render_svg(refs.references[i]));
      return kOk;
    }

    if (k->parsed()) {
      const ReferenceFile refs = [&] {
        try {
          return references_from_json(read_json(k_in));
        } catch (const json::exception& ex) {
          throw IoError("'" + k_in + "': " + ex.what());
        }
      }();
      const auto db = load_detections(k_det);
      const std::string id = k_id.empty() ? fs::path(k_in).stem().string() : k_id;
      const bool hist = !k_baseline.empty();
      const auto ranking = hist ? rank_baseline(refs.histogram, db, cfg.match, cfg.workers)
                                : rank_database(refs.references, db, cfg.match, cfg.workers);
      write_json(k_out, ranking_to_json(id, hist ? "histogram" : "layout", ranking));
      for (std::size_t i = 0; i < std::min<std::size_t>(ranking.size(), 10); ++i)
        std::printf("%4zu  %-24s %.4f\n", i + 1, ranking[i].image_id.c_str(), ranking[i].score);
      return kOk;
    }

    if (e->parsed()) {
      const auto ks = parse_k_list(e_k);
      const auto gt = load_ground_truth(e_gt);
      std::vector<std::pair<std::string, std::vector<ImageScore>>> rankings;
      for (const auto& f : e_in) {
        try {
          rankings.push_back(ranking_from_json(read_json(f)));
        } catch (const json::exception& ex) {
          throw IoError("'" + f + "': " + ex.what());
        }
      }
      const MetricsTable t = evaluate(collect_ranks(rankings, gt), ks);
      std::cout << format_metrics(t);
      if (!e_out.empty()) write_json(e_out, metrics_to_json(t));
      return kOk;
    }

    if (pl->parsed()) {
      const auto ks = parse_k_list(pl_k);
      const json qs = read_json(pl_q);
      const auto db = load_detections(pl_det);
      std::optional<std::map<std::string, std::vector<std::string>>> gt;
      if (!pl_gt.empty()) gt = load_ground_truth(pl_gt);

      struct Item {
        std::string id;
        Query q;
      };
      std::vector<Item> items;
      try {
        for (const auto& entry : qs.at("queries")) {
          const std::string id = entry.at("id").get<std::string>();
          const bool english = entry.contains("english");
          const std::string text = entry.at(english ? "english" : "dsl").get<std::string>();
          items.push_back({id, parse_query(text, english, vocab)});
          if (gt && !gt->count(id)) throw ValidationError("no ground truth for query '" + id + "'");
        }
      } catch (const json::exception& ex) {
        throw IoError("'" + pl_q + "': " + ex.what());
      }

      std::map<std::string, json> files;
      std::vector<std::pair<std::string, std::vector<ImageScore>>> layout_rankings, hist_rankings;
      for (const auto& it : items) {
        QueryRun run = synthesize(it.id, it.q, vocab, cfg);
        std::printf("%s: %s, %zu solutions, %zu references\n", it.id.c_str(), to_string(run.solve.status),
                    run.solve.solutions.size(), run.references.references.size());
        files[it.id + ".solutions.json"] = solutions_to_json(it.q, run.scene, run.solve, cfg.seed);
        files[it.id + ".references.json"] = references_to_json(run.references.references, query_histogram(it.q));
        auto ranking = rank_query(run, db, cfg, false);
        files[it.id + ".ranking.json"] = ranking_to_json(it.id, "layout", ranking);
        layout_rankings.emplace_back(it.id, std::move(ranking));
        if (pl_baseline) {
          auto h = rank_query(run, db, cfg, true);
          files[it.id + ".ranking-h.json"] = ranking_to_json(it.id, "histogram", h);
          hist_rankings.emplace_back(it.id, std::move(h));
        }
      }
      if (gt) {
        const MetricsTable t = evaluate(collect_ranks(layout_rankings, *gt), ks);
        std::cout << "layout\n" << format_metrics(t);
        json m{{"layout", metrics_to_json(t)}};
        if (pl_baseline) {
          const MetricsTable h = evaluate(collect_ranks(hist_rankings, *gt), ks);
          std::cout << "histogram\n" << format_metrics(h);
          m["histogram"] = metrics_to_json(h);
        }
        files["metrics.json"] = m;
      }
      for (const auto& [name, j] : files) write_json((fs::path(pl_out) / name).string(), j);
      return kOk;
    }
  } catch (const ParseError& ex) {
    std::cerr << "parse error: " << ex.what() << "\n";
    return kParse;
  } catch (const ValidationError& ex) {
    std::cerr << "invalid input: " << ex.what() << "\n";
    return kParse;
  } catch (const LibraryError& ex) {
    std::cerr << "library error: " << ex.what() << "\n";
    return kIo;
  } catch (const IoError& ex) {
    std::cerr << "I/O error: " << ex.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& ex) {
    std::cerr << "I/O error: " << ex.what() << "\n";
    return kIo;
  } catch (const json::exception& ex) {
    std::cerr << "I/O error: " << ex.what() << "\n";
    return kIo;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kOther;
  }
  return kOther;
}
