#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "scenegen/object_model.hpp"

namespace scenegen {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// ObjectRef

/// category-id[:sub][-instance], e.g. bed-0:head or chair-0-2.
struct ObjectRef {
  std::string category;
  int id = 0;
  std::optional<std::string> sub_object;
  std::optional<int> instance;

  /// The whole object this reference points into (sub-object dropped).
  ObjectRef object() const {
    ObjectRef r = *this;
    r.sub_object.reset();
    return r;
  }

  ObjectRef with_instance(int k) const {
    ObjectRef r = *this;
    r.instance = k;
    return r;
  }

  std::string str() const {
    std::string s = category + "-" + std::to_string(id);
    if (sub_object) s += ":" + *sub_object;
    if (instance) s += "-" + std::to_string(*instance);
    return s;
  }

  static ObjectRef parse(std::string_view text) {
    auto fail = [&] { return std::invalid_argument("malformed object reference '" + std::string(text) + "'"); };
    auto to_int = [](std::string_view s) -> std::optional<int> {
      if (s.empty()) return std::nullopt;
      int v = 0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size() || v < 0) return std::nullopt;
      return v;
    };

    ObjectRef r;
    std::string_view head = text;
    std::string_view tail;
    if (auto colon = text.find(':'); colon != std::string_view::npos) {
      head = text.substr(0, colon);
      tail = text.substr(colon + 1);
      if (tail.empty()) throw fail();
      if (auto dash = tail.rfind('-'); dash != std::string_view::npos) {
        if (auto k = to_int(tail.substr(dash + 1))) {
          r.instance = *k;
          tail = tail.substr(0, dash);
        }
      }
      if (tail.empty()) throw fail();
      r.sub_object = std::string(tail);
    }

    auto dash = head.rfind('-');
    if (dash == std::string_view::npos) throw fail();
    auto last = to_int(head.substr(dash + 1));
    if (!last) throw fail();
    std::string_view rest = head.substr(0, dash);
    auto dash2 = rest.rfind('-');
    if (dash2 != std::string_view::npos) {
      if (auto id = to_int(rest.substr(dash2 + 1))) {
        if (r.instance) throw fail();
        r.id = *id;
        r.instance = *last;
        rest = rest.substr(0, dash2);
      } else {
        r.id = *last;
      }
    } else {
      r.id = *last;
    }
    if (rest.empty()) throw fail();
    r.category = std::string(rest);
    return r;
  }

  friend bool operator==(const ObjectRef&, const ObjectRef&) = default;
  friend bool operator<(const ObjectRef& a, const ObjectRef& b) {
    return std::tie(a.category, a.id, a.instance, a.sub_object) < std::tie(b.category, b.id, b.instance, b.sub_object);
  }
};

inline std::ostream& operator<<(std::ostream& os, const ObjectRef& r) { return os << r.str(); }

// ---------------------------------------------------------------------------
// Triplets and queries

struct SemanticTriplet {
  ObjectRef target;
  std::optional<ObjectRef> reference;  ///< absent only for unary relations (in-a-row)
  std::string relation;

  std::string str() const {
    return "(" + target.str() + ", " + (reference ? reference->str() : std::string("-")) + ", " + relation + ")";
  }
  friend bool operator==(const SemanticTriplet&, const SemanticTriplet&) = default;
};

struct Diagnostic {
  enum class Severity { Info, Warning, Error };
  int line = 0;
  Severity severity = Severity::Info;
  std::string message;
};

inline const char* to_string(Diagnostic::Severity s) {
  switch (s) {
    case Diagnostic::Severity::Info: return "info";
    case Diagnostic::Severity::Warning: return "warning";
    default: return "error";
  }
}

struct Query {
  std::vector<SemanticTriplet> triplets;
  std::map<ObjectRef, int> counts;  ///< keyed by whole-object refs; every mentioned object appears
  std::map<ObjectRef, std::vector<std::string>> attributes;
  std::map<ObjectRef, std::vector<ObjectRef>> groups;  ///< virtual group objects after expansion
  std::vector<Diagnostic> diagnostics;

  bool is_group(const ObjectRef& r) const { return groups.count(r.object()) != 0; }

  void mention(const ObjectRef& r) {
    if (!is_group(r)) counts.try_emplace(r.object(), 1);
  }

  void add_attribute(const ObjectRef& r, const std::string& a) {
    auto& v = attributes[r.object()];
    if (std::find(v.begin(), v.end(), a) == v.end()) v.push_back(a);
  }

  std::vector<std::string> attributes_of(const ObjectRef& r) const {
    auto it = attributes.find(r.object());
    return it == attributes.end() ? std::vector<std::string>{} : it->second;
  }

  /// Concrete objects (no group keys), in canonical order.
  std::vector<ObjectRef> objects() const {
    std::vector<ObjectRef> out;
    for (const auto& [r, n] : counts)
      if (!is_group(r)) out.push_back(r);
    return out;
  }

  friend bool operator==(const Query& a, const Query& b) {
    return a.triplets == b.triplets && a.counts == b.counts && a.attributes == b.attributes && a.groups == b.groups;
  }
};

// ---------------------------------------------------------------------------
// Relation dictionary

class RelationDictionary {
 public:
  struct PhraseMatch {
    std::size_t length = 0;
    std::string value;  ///< relation name, or attribute name for placements
    bool placement = false;
  };

  bool is_atomic(const std::string& r) const { return atomic_.count(r) != 0; }
  bool is_composite(const std::string& r) const { return composite_.count(r) != 0; }

  /// Canonical relation name for a relation or alias.
  std::optional<std::string> canonical(const std::string& name) const {
    if (is_atomic(name) || is_composite(name)) return name;
    if (auto it = aliases_.find(name); it != aliases_.end()) return it->second;
    return std::nullopt;
  }

  int arity(const std::string& relation) const {
    if (auto it = composite_.find(relation); it != composite_.end()) return it->second;
    return 2;
  }

  const std::set<std::string>& atomic() const { return atomic_; }
  const std::map<std::string, int>& composite() const { return composite_; }

  /// Longest relation or placement phrase starting at `pos`.
  std::optional<PhraseMatch> match_phrase(const std::vector<std::string>& tokens, std::size_t pos) const {
    std::optional<PhraseMatch> best;
    auto try_table = [&](const std::vector<std::pair<std::vector<std::string>, std::string>>& table, bool placement) {
      for (const auto& [words, value] : table) {
        if (pos + words.size() > tokens.size()) continue;
        if (!std::equal(words.begin(), words.end(), tokens.begin() + std::ptrdiff_t(pos))) continue;
        if (!best || words.size() > best->length) best = PhraseMatch{words.size(), value, placement};
      }
    };
    try_table(phrases_, false);
    try_table(placements_, true);
    return best;
  }

  /// Number word or phrase at `pos`: (value, tokens consumed).
  std::optional<std::pair<int, std::size_t>> match_number(const std::vector<std::string>& tokens,
                                                          std::size_t pos) const {
    std::optional<std::pair<int, std::size_t>> best;
    for (const auto& [words, value] : numbers_) {
      if (pos + words.size() > tokens.size()) continue;
      if (!std::equal(words.begin(), words.end(), tokens.begin() + std::ptrdiff_t(pos))) continue;
      if (!best || words.size() > best->second) best = std::pair{value, words.size()};
    }
    if (!best && pos < tokens.size()) {
      const auto& t = tokens[pos];
      int v = 0;
      auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec == std::errc{} && ptr == t.data() + t.size() && v > 0) best = std::pair{v, std::size_t(1)};
    }
    return best;
  }

  bool is_filler(const std::string& w) const { return fillers_.count(w) != 0; }

  static RelationDictionary from_json(const nlohmann::json& j) {
    RelationDictionary d;
    for (const auto& a : j.at("atomic")) d.atomic_.insert(a.get<std::string>());
    for (auto it = j.at("composite").begin(); it != j.at("composite").end(); ++it)
      d.composite_[it.key()] = it.value().get<int>();
    if (j.contains("aliases"))
      for (auto it = j["aliases"].begin(); it != j["aliases"].end(); ++it) {
        auto target = it.value().get<std::string>();
        if (!d.is_atomic(target) && !d.is_composite(target))
          throw LibraryError("alias '" + it.key() + "' names unknown relation '" + target + "'");
        d.aliases_[it.key()] = target;
      }
    if (j.contains("phrases"))
      for (auto it = j["phrases"].begin(); it != j["phrases"].end(); ++it) {
        auto rel = it.value().get<std::string>();
        if (!d.canonical(rel)) throw LibraryError("phrase '" + it.key() + "' maps to unknown relation '" + rel + "'");
        d.phrases_.emplace_back(words(it.key()), *d.canonical(rel));
      }
    if (j.contains("placements"))
      for (auto it = j["placements"].begin(); it != j["placements"].end(); ++it)
        d.placements_.emplace_back(words(it.key()), it.value().get<std::string>());
    if (j.contains("numbers"))
      for (auto it = j["numbers"].begin(); it != j["numbers"].end(); ++it)
        d.numbers_.emplace_back(words(it.key()), it.value().get<int>());
    if (j.contains("fillers"))
      for (const auto& f : j["fillers"]) d.fillers_.insert(f.get<std::string>());
    return d;
  }

  static RelationDictionary load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LibraryError("cannot open relation dictionary '" + path + "'");
    try {
      return from_json(nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true));
    } catch (const nlohmann::json::exception& e) {
      throw LibraryError("relation dictionary '" + path + "': " + e.what());
    }
  }

  static std::vector<std::string> words(const std::string& phrase) {
    std::vector<std::string> out;
    std::istringstream in(phrase);
    for (std::string w; in >> w;) out.push_back(w);
    return out;
  }

 private:
  std::set<std::string> atomic_;
  std::map<std::string, int> composite_;
  std::map<std::string, std::string> aliases_;
  std::vector<std::pair<std::vector<std::string>, std::string>> phrases_;
  std::vector<std::pair<std::vector<std::string>, std::string>> placements_;
  std::vector<std::pair<std::vector<std::string>, int>> numbers_;
  std::set<std::string> fillers_;
};

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline void check_ref(const ObjectRef& r, const ObjectLibrary& lib, int line) {
  if (!lib.contains(r.category)) throw ParseError(line, "unknown category '" + r.category + "'");
  if (r.sub_object && !lib.at(r.category).has_sub_object(*r.sub_object))
    throw ParseError(line, "category '" + r.category + "' has no sub-object '" + *r.sub_object + "'");
}

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

/// Checks every reference and relation against the vocabularies.
inline void validate(const Query& q, const ObjectLibrary& lib, const RelationDictionary& dict) {
  auto check = [&](const ObjectRef& r) {
    try {
      detail::check_ref(r, lib, 0);
    } catch (const ParseError& e) {
      throw ValidationError(e.what());
    }
  };
  for (const auto& [r, n] : q.counts) {
    check(r);
    if (n < 1) throw ValidationError("count of " + r.str() + " must be >= 1");
  }
  for (const auto& [g, members] : q.groups) {
    check(g);
    if (members.empty()) throw ValidationError("group " + g.str() + " has no members");
    for (const auto& m : members) {
      check(m);
      if (!q.counts.count(m.object())) throw ValidationError("group member " + m.str() + " is not an object");
    }
  }
  for (const auto& t : q.triplets) {
    check(t.target);
    if (!dict.canonical(t.relation) || *dict.canonical(t.relation) != t.relation)
      throw ValidationError("unknown relation '" + t.relation + "'");
    const int arity = dict.arity(t.relation);
    if (arity == 2 && !t.reference) throw ValidationError(t.str() + ": relation needs a reference object");
    if (arity == 1 && t.reference) throw ValidationError(t.str() + ": relation takes no reference object");
    if (t.reference) {
      check(*t.reference);
      if (t.reference->object() == t.target.object()) throw ValidationError(t.str() + ": target equals reference");
    }
    for (const ObjectRef* r : {&t.target, t.reference ? &*t.reference : nullptr}) {
      if (r && !q.is_group(*r) && !q.counts.count(r->object()))
        throw ValidationError(r->str() + " is missing from the object counts");
    }
  }
}

// ---------------------------------------------------------------------------
// DSL

/// Line-oriented triplet format:
///   target relation reference      (binary relation)
///   target relation                (unary relation, e.g. in-a-row)
///   count N ref | attr ref name | object ref | group ref member...
/// `#` starts a comment.
inline Query parse_dsl(std::string_view text, const ObjectLibrary& lib, const RelationDictionary& dict) {
  Query q;
  std::vector<std::pair<ObjectRef, int>> mentioned;
  std::istringstream in{std::string(text)};
  int line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::vector<std::string> tok = RelationDictionary::words(raw);
    if (tok.empty()) continue;

    auto ref = [&](const std::string& s) {
      ObjectRef r;
      try {
        r = ObjectRef::parse(s);
      } catch (const std::invalid_argument& e) {
        throw ParseError(line_no, e.what());
      }
      detail::check_ref(r, lib, line_no);
      return r;
    };

    const std::string& head = tok[0];
    if (head == "count") {
      if (tok.size() != 3) throw ParseError(line_no, "expected 'count N ref'");
      int n = 0;
      auto [ptr, ec] = std::from_chars(tok[1].data(), tok[1].data() + tok[1].size(), n);
      if (ec != std::errc{} || ptr != tok[1].data() + tok[1].size() || n < 1)
        throw ParseError(line_no, "count must be a positive integer");
      q.counts[ref(tok[2]).object()] = n;
    } else if (head == "attr") {
      if (tok.size() != 3) throw ParseError(line_no, "expected 'attr ref name'");
      auto r = ref(tok[1]);
      q.add_attribute(r, tok[2]);
      mentioned.emplace_back(r, line_no);
    } else if (head == "object") {
      if (tok.size() != 2) throw ParseError(line_no, "expected 'object ref'");
      mentioned.emplace_back(ref(tok[1]), line_no);
    } else if (head == "group") {
      if (tok.size() < 3) throw ParseError(line_no, "expected 'group ref member...'");
      auto& members = q.groups[ref(tok[1]).object()];
      for (std::size_t i = 2; i < tok.size(); ++i) members.push_back(ref(tok[i]));
    } else {
      if (tok.size() != 2 && tok.size() != 3) throw ParseError(line_no, "expected 'target relation [reference]'");
      auto rel = dict.canonical(tok[1]);
      if (!rel) throw ParseError(line_no, "unknown relation '" + tok[1] + "'");
      SemanticTriplet t{ref(tok[0]), std::nullopt, *rel};
      if (tok.size() == 3) t.reference = ref(tok[2]);
      const int arity = dict.arity(*rel);
      if (arity == 2 && !t.reference) throw ParseError(line_no, "relation '" + *rel + "' needs a reference");
      if (arity == 1 && t.reference) throw ParseError(line_no, "relation '" + *rel + "' takes no reference");
      if (t.reference && t.reference->object() == t.target.object())
        throw ParseError(line_no, "target and reference are the same object");
      mentioned.emplace_back(t.target, line_no);
      if (t.reference) mentioned.emplace_back(*t.reference, line_no);
      q.triplets.push_back(std::move(t));
    }
  }
  for (const auto& [r, line] : mentioned) q.mention(r);
  for (const auto& [g, members] : q.groups) {
    q.counts.erase(g);
    for (const auto& m : members) q.mention(m);
  }
  return q;
}

inline std::string render_dsl(const Query& q) {
  std::ostringstream os;
  for (const auto& [r, n] : q.counts) {
    if (n == 1) os << "object " << r.str() << '\n';
    else os << "count " << n << ' ' << r.str() << '\n';
  }
  for (const auto& [r, attrs] : q.attributes)
    for (const auto& a : attrs) os << "attr " << r.str() << ' ' << a << '\n';
  for (const auto& [g, members] : q.groups) {
    os << "group " << g.str();
    for (const auto& m : members) os << ' ' << m.str();
    os << '\n';
  }
  for (const auto& t : q.triplets) {
    os << t.target.str() << ' ' << t.relation;
    if (t.reference) os << ' ' << t.reference->str();
    os << '\n';
  }
  return os.str();
}

/// One triplet per line, "(target, reference, relation)".
inline std::string format_triplets(const Query& q) {
  std::string out;
  for (const auto& t : q.triplets) out += t.str() + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// English pattern matcher

namespace detail {

class EnglishParser {
 public:
  EnglishParser(const ObjectLibrary& lib, const RelationDictionary& dict) : lib_(lib), dict_(dict) {
    for (const auto& [cat, model] : lib.models()) {
      for (const auto& phrase : lib.phrases(cat)) {
        auto w = RelationDictionary::words(phrase);
        if (w.empty()) continue;
        forms_.push_back({w, cat, false});
        for (const char* suffix : {"s", "es"}) {
          auto p = w;
          p.back() += suffix;
          forms_.push_back({p, cat, true});
        }
      }
    }
    std::stable_sort(forms_.begin(), forms_.end(),
                     [](const NounForm& a, const NounForm& b) { return a.words.size() > b.words.size(); });
  }

  Query run(std::string_view text) {
    for (const auto& s : sentences(text)) sentence(s.tokens, s.line);
    return std::move(q_);
  }

 private:
  struct NounForm {
    std::vector<std::string> words;
    std::string category;
    bool plural;
  };

  enum class Det { None, Indefinite, Another, Definite };

  struct NounPhrase {
    std::string category;
    Det det = Det::None;
    int count = 1;
    bool explicit_count = false;
    bool plural = false;
    std::vector<std::string> attributes;
    std::optional<std::string> sub;
  };

  struct Sentence {
    std::vector<std::string> tokens;
    int line;
  };

  static std::vector<Sentence> sentences(std::string_view text) {
    std::vector<Sentence> out;
    Sentence cur{{}, 1};
    int line = 1;
    std::string word;
    auto flush_word = [&] {
      if (!word.empty()) {
        if (cur.tokens.empty()) cur.line = line;
        cur.tokens.push_back(word);
        word.clear();
      }
    };
    auto flush_sentence = [&] {
      flush_word();
      if (!cur.tokens.empty()) out.push_back(cur);
      cur = Sentence{{}, line};
    };
    for (char ch : text) {
      const auto c = static_cast<unsigned char>(ch);
      if (std::isalnum(c) || ch == '-' || ch == '\'') {
        word += static_cast<char>(std::tolower(c));
      } else if (ch == '.' || ch == ';' || ch == '!' || ch == '?') {
        flush_sentence();
      } else {
        flush_word();
      }
      if (ch == '\n') ++line;
    }
    flush_sentence();
    return out;
  }

  void warn(int line, std::string msg) {
    q_.diagnostics.push_back({line, Diagnostic::Severity::Warning, std::move(msg)});
  }
  void info(int line, std::string msg) { q_.diagnostics.push_back({line, Diagnostic::Severity::Info, std::move(msg)}); }

  void sentence(const std::vector<std::string>& raw, int line) {
    std::vector<std::string> tok;
    for (const auto& w : raw)
      if (!dict_.is_filler(w)) tok.push_back(w);
    const bool existential = !tok.empty() && tok.front() == "there";
    if (existential) tok.erase(tok.begin());
    if (tok.empty()) return;

    std::optional<RelationDictionary::PhraseMatch> match;
    std::size_t at = 0;
    for (std::size_t i = 1; i < tok.size() && !match; ++i) {
      // A number phrase such as "a pair of" is part of the noun phrase.
      if (auto m = dict_.match_phrase(tok, i)) {
        match = m;
        at = i;
      }
    }

    if (!match) {
      if (existential) {
        auto np = noun_phrase({tok.begin(), tok.end()}, line);
        resolve(np, line);
        return;
      }
      warn(line, "no relation pattern found; sentence skipped");
      return;
    }

    std::vector<std::string> subject(tok.begin(), tok.begin() + std::ptrdiff_t(at));
    std::vector<std::string> object(tok.begin() + std::ptrdiff_t(at + match->length), tok.end());

    auto target_np = noun_phrase(subject, line);
    if (match->placement) {
      auto target = resolve(target_np, line);
      q_.add_attribute(target, match->value);
      return;
    }

    const std::string& rel = match->value;
    if (dict_.arity(rel) == 1) {
      auto target = resolve(target_np, line);
      q_.triplets.push_back({target, std::nullopt, rel});
      return;
    }
    if (object.empty()) {
      warn(line, "relation '" + rel + "' without a reference object; sentence skipped");
      return;
    }
    auto reference_np = noun_phrase(object, line);
    auto target = resolve(target_np, line);
    auto reference = resolve(reference_np, line);
    if (target.object() == reference.object()) {
      warn(line, "object related to itself; sentence skipped");
      return;
    }
    q_.triplets.push_back({target, reference, rel});
  }

  NounPhrase noun_phrase(std::vector<std::string> tok, int line) {
    NounPhrase np;
    std::size_t i = 0;
    if (auto n = dict_.match_number(tok, 0)) {
      np.count = n->first;
      np.explicit_count = true;
      np.det = Det::Indefinite;
      i = n->second;
      // "a"/"an" alone parse as determiners, not as the number one.
    }
    if (i == 0 && !tok.empty()) {
      const auto& w = tok[0];
      if (w == "a" || w == "an") np.det = Det::Indefinite, i = 1;
      else if (w == "another") np.det = Det::Another, i = 1;
      else if (w == "the" || w == "this" || w == "that" || w == "these" || w == "those") np.det = Det::Definite, i = 1;
    }
    tok.erase(tok.begin(), tok.begin() + std::ptrdiff_t(i));

    // "<det> <sub> of <noun phrase>"
    if (auto of = std::find(tok.begin(), tok.end(), "of"); of != tok.end()) {
      std::vector<std::string> sub_words(tok.begin(), of);
      std::vector<std::string> rest(of + 1, tok.end());
      auto inner = noun_phrase(rest, line);
      std::string sub;
      for (const auto& w : sub_words) {
        if (w == "the" || w == "a" || w == "an") continue;
        sub += (sub.empty() ? "" : "-") + w;
      }
      if (sub.empty()) throw ParseError(line, "expected a sub-object name before 'of'");
      if (!lib_.at(inner.category).has_sub_object(sub))
        throw ParseError(line, "'" + inner.category + "' has no sub-object '" + sub + "'");
      inner.sub = sub;
      return inner;
    }

    if (tok.empty()) throw ParseError(line, "missing noun");
    const NounForm* form = nullptr;
    for (const auto& f : forms_) {
      if (f.words.size() > tok.size()) continue;
      if (std::equal(f.words.begin(), f.words.end(), tok.end() - std::ptrdiff_t(f.words.size()))) {
        form = &f;
        break;
      }
    }
    if (!form) throw ParseError(line, "unknown object '" + tok.back() + "'");
    np.category = form->category;
    np.plural = form->plural;
    const auto& model = lib_.at(np.category);
    for (std::size_t k = 0; k + form->words.size() < tok.size(); ++k) {
      const auto& w = tok[k];
      if (model.variants().count(w)) np.attributes.push_back(w);
      else info(line, "ignored modifier '" + w + "'");
    }
    if (np.plural && !np.explicit_count) {
      np.count = 2;
      info(line, "plural '" + np.category + "' without a number; assuming 2");
    }
    return np;
  }

  ObjectRef resolve(const NounPhrase& np, int line) {
    ObjectRef ref;
    auto last = last_.find(np.category);
    if (np.det == Det::Definite && last != last_.end()) {
      ref = last->second;
    } else {
      ref = ObjectRef{np.category, next_id_[np.category]++, std::nullopt, std::nullopt};
      last_[np.category] = ref;
      q_.counts[ref] = np.count;
      if (np.det == Det::Definite) info(line, "'the " + np.category + "' has no antecedent; introduced " + ref.str());
    }
    if (np.explicit_count && np.det == Det::Definite) q_.counts[ref] = np.count;
    for (const auto& a : np.attributes) q_.add_attribute(ref, a);
    ref.sub_object = np.sub;
    return ref;
  }

  const ObjectLibrary& lib_;
  const RelationDictionary& dict_;
  std::vector<NounForm> forms_;
  std::map<std::string, int> next_id_;
  std::map<std::string, ObjectRef> last_;
  Query q_;
};

}  // namespace detail

/// Rule-based reading of simple scene sentences. "the X" binds to the most
/// recently introduced X; "a/an/another X" and counted phrases allocate new IDs.
inline Query parse_english(std::string_view text, const ObjectLibrary& lib, const RelationDictionary& dict) {
  return detail::EnglishParser(lib, dict).run(text);
}

// ---------------------------------------------------------------------------
// Count expansion

/// Splits every object with count k > 1 into k instances. A group used as target
/// yields one triplet per instance; a group used as reference (or as the operand
/// of a unary relation) becomes a virtual group object over its instances.
inline Query expand_counts(const Query& in) {
  for (const auto& [r, n] : in.counts)
    if (n < 1) throw ValidationError("count of " + r.str() + " must be >= 1");

  std::map<ObjectRef, std::vector<ObjectRef>> expanded;
  for (const auto& [r, n] : in.counts) {
    if (n <= 1) continue;
    auto& members = expanded[r];
    for (int k = 0; k < n; ++k) members.push_back(r.with_instance(k));
  }
  if (expanded.empty()) return in;

  Query out;
  out.diagnostics = in.diagnostics;
  out.groups = in.groups;
  for (const auto& [r, n] : in.counts) {
    if (auto it = expanded.find(r); it != expanded.end()) {
      for (const auto& m : it->second) out.counts[m] = 1;
    } else {
      out.counts[r] = n;
    }
  }
  for (const auto& [r, attrs] : in.attributes) {
    if (auto it = expanded.find(r); it != expanded.end()) {
      for (const auto& m : it->second)
        for (const auto& a : attrs) out.add_attribute(m, a);
    } else {
      for (const auto& a : attrs) out.add_attribute(r, a);
    }
  }
  auto as_group = [&](const ObjectRef& r) {
    auto it = expanded.find(r.object());
    if (it != expanded.end()) out.groups[r.object()] = it->second;
  };
  for (const auto& t : in.triplets) {
    if (t.reference) as_group(*t.reference);
    auto it = expanded.find(t.target.object());
    if (it == expanded.end() || !t.reference) {
      if (!t.reference) as_group(t.target);
      out.triplets.push_back(t);
      continue;
    }
    for (const auto& m : it->second) {
      SemanticTriplet copy = t;
      copy.target = m;
      copy.target.sub_object = t.target.sub_object;
      out.triplets.push_back(std::move(copy));
    }
  }
  return out;
}

}  // namespace scenegen
