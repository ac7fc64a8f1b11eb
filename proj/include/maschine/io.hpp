#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "maschine/error.hpp"
#include "maschine/graph.hpp"
#include "maschine/schema.hpp"
#include "maschine/vocabulary.hpp"

namespace maschine {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

/// Splits a three-column record. Tab-separated when the line holds a tab,
/// otherwise any run of blanks separates fields.
inline bool split3(std::string_view line, std::array<std::string_view, 3>& out) {
  if (line.find('\t') != std::string_view::npos) {
    std::size_t n = 0;
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find('\t', start);
      const auto field = trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
      if (n == 3 || field.empty()) return false;
      out[n++] = field;
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    return n == 3;
  }
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i == line.size()) break;
    const auto j = line.find(' ', i);
    if (n == 3) return false;
    out[n++] = line.substr(i, j == std::string_view::npos ? std::string_view::npos : j - i);
    i = j == std::string_view::npos ? line.size() : j;
  }
  return n == 3;
}

/// Two-column variant used by label files.
inline bool split2(std::string_view line, std::array<std::string_view, 2>& out) {
  const bool tabbed = line.find('\t') != std::string_view::npos;
  const char sep = tabbed ? '\t' : ' ';
  const auto pos = line.find(sep);
  if (pos == std::string_view::npos) return false;
  out[0] = trim(line.substr(0, pos));
  out[1] = trim(line.substr(pos + 1));
  if (out[0].empty() || out[1].empty()) return false;
  if (out[1].find('\t') != std::string_view::npos) return false;
  return !(!tabbed && out[1].find(' ') != std::string_view::npos);
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

template <class Fn>
void for_each_record(std::istream& in, const std::string& source, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    fn(body, line_no);
  }
  if (in.bad()) throw DataError("read error in " + source);
}

} // namespace detail

/// Reads `head<TAB>relation<TAB>tail` lines, interning names on first sight.
/// Line order and duplicates are preserved.
inline std::vector<Triple> load_triples(std::istream& in, Vocabulary& vocab,
                                        const std::string& source = "<stream>") {
  std::vector<Triple> out;
  std::array<std::string_view, 3> f;
  detail::for_each_record(in, source, [&](std::string_view line, std::size_t line_no) {
    if (!detail::split3(line, f))
      throw DataError(source + ":" + std::to_string(line_no) + ": expected 3 fields");
    const EntityId h = vocab.entities.intern(f[0]);
    const RelationId r = vocab.relations.intern(f[1]);
    const EntityId t = vocab.entities.intern(f[2]);
    out.push_back({h, r, t});
  });
  if (vocab.entities.size() > kMaxPackedId || vocab.relations.size() > kMaxPackedId)
    throw DataError(source + ": vocabulary exceeds 2^21 ids");
  return out;
}

inline std::vector<Triple> load_triples(const std::filesystem::path& path, Vocabulary& vocab) {
  auto in = detail::open_input(path);
  return load_triples(in, vocab, path.string());
}

inline void save_triples(std::ostream& out, std::span<const Triple> triples, const Vocabulary& vocab) {
  for (const auto& t : triples)
    out << vocab.entities.name(t.head) << '\t' << vocab.relations.name(t.relation) << '\t'
        << vocab.entities.name(t.tail) << '\n';
}

inline void save_triples(const std::filesystem::path& path, std::span<const Triple> triples,
                         const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  save_triples(out, triples, vocab);
}

struct SchemaOptions {
  /// Intern entities that appear only in rdf:type lines. Off when the
  /// knowledge graph defines the entity vocabulary.
  bool intern_entities = false;
  /// Intern relations that appear only in domain/range lines. When off,
  /// such axioms are skipped and counted.
  bool intern_relations = true;
};

struct SchemaLoad {
  Schema schema;
  std::size_t unknown_type_rows = 0;     // rdf:type rows naming entities not in the vocabulary
  std::size_t unknown_relation_rows = 0; // domain/range rows naming relations not in the vocabulary
  std::size_t duplicate_axioms = 0;
};

namespace detail {

enum class Keyword { domain, range, subclass_of, type };

inline std::optional<Keyword> parse_keyword(std::string_view k) {
  if (k == "rdfs:domain" || k == "<http://www.w3.org/2000/01/rdf-schema#domain>") return Keyword::domain;
  if (k == "rdfs:range" || k == "<http://www.w3.org/2000/01/rdf-schema#range>") return Keyword::range;
  if (k == "rdfs:subClassOf" || k == "<http://www.w3.org/2000/01/rdf-schema#subClassOf>")
    return Keyword::subclass_of;
  if (k == "rdf:type" || k == "a" || k == "<http://www.w3.org/1999/02/22-rdf-syntax-ns#type>")
    return Keyword::type;
  return std::nullopt;
}

} // namespace detail

/// Reads `subject<TAB>keyword<TAB>object` axioms.
///
/// Relations and classes are interned into `vocab`. A relation with two
/// distinct domains (or ranges) and subClassOf cycles are rejected.
inline SchemaLoad load_schema(std::istream& in, Vocabulary& vocab, const std::string& source = "<stream>",
                              SchemaOptions options = {}) {
  std::map<RelationId, ClassId> domains;
  std::map<RelationId, ClassId> ranges;
  std::set<SubclassEdge> edges;
  std::map<EntityId, std::set<ClassId>> types;
  SchemaLoad result;

  auto set_unique = [&](std::map<RelationId, ClassId>& m, RelationId r, ClassId c, const char* what,
                        std::size_t line_no) {
    auto [it, inserted] = m.emplace(r, c);
    if (inserted) return;
    if (it->second == c) {
      ++result.duplicate_axioms;
      return;
    }
    throw DataError(source + ":" + std::to_string(line_no) + ": relation '" + vocab.relations.name(r) +
                    "' has a second " + what + " '" + vocab.classes.name(c) + "' (already '" +
                    vocab.classes.name(it->second) + "')");
  };

  std::array<std::string_view, 3> f;
  detail::for_each_record(in, source, [&](std::string_view line, std::size_t line_no) {
    if (!detail::split3(line, f))
      throw DataError(source + ":" + std::to_string(line_no) + ": expected 3 fields");
    const auto kw = detail::parse_keyword(f[1]);
    if (!kw)
      throw DataError(source + ":" + std::to_string(line_no) + ": unknown keyword '" + std::string(f[1]) + "'");
    auto relation = [&]() -> std::optional<RelationId> {
      if (options.intern_relations) return vocab.relations.intern(f[0]);
      auto r = vocab.relations.find(f[0]);
      if (!r) ++result.unknown_relation_rows;
      return r;
    };
    switch (*kw) {
    case detail::Keyword::domain:
      if (auto r = relation()) set_unique(domains, *r, vocab.classes.intern(f[2]), "domain", line_no);
      break;
    case detail::Keyword::range:
      if (auto r = relation()) set_unique(ranges, *r, vocab.classes.intern(f[2]), "range", line_no);
      break;
    case detail::Keyword::subclass_of: {
      const ClassId child = vocab.classes.intern(f[0]);
      const ClassId parent = vocab.classes.intern(f[2]);
      if (!edges.emplace(child, parent).second) ++result.duplicate_axioms;
      break;
    }
    case detail::Keyword::type: {
      std::optional<EntityId> e =
          options.intern_entities ? std::optional(vocab.entities.intern(f[0])) : vocab.entities.find(f[0]);
      const ClassId c = vocab.classes.intern(f[2]);
      if (!e) {
        ++result.unknown_type_rows;
        break;
      }
      if (!types[*e].insert(c).second) ++result.duplicate_axioms;
      break;
    }
    }
  });

  if (auto cycle = find_subclass_cycle(vocab.classes.size(), edges); !cycle.empty()) {
    std::string msg = source + ": subClassOf cycle: ";
    for (std::size_t i = 0; i < cycle.size(); ++i) msg += (i ? " -> " : "") + vocab.classes.name(cycle[i]);
    throw DataError(msg);
  }
  result.schema = Schema(vocab.classes.size(), std::move(domains), std::move(ranges), std::move(edges),
                         std::move(types));
  return result;
}

inline SchemaLoad load_schema(const std::filesystem::path& path, Vocabulary& vocab, SchemaOptions options = {}) {
  auto in = detail::open_input(path);
  return load_schema(in, vocab, path.string(), options);
}

struct LabelSet {
  std::map<EntityId, int> labels;
  std::vector<std::string> label_names; // label id -> name, first-seen order
  std::size_t skipped = 0;              // rows naming entities outside the vocabulary

  std::size_t num_labels() const noexcept { return label_names.size(); }
};

/// Reads `entity<TAB>label` rows. Rows whose entity is not in `vocab` are
/// counted in `skipped`; label ids are assigned over resolved rows only.
inline LabelSet load_labels(std::istream& in, const Vocabulary& vocab, const std::string& source = "<stream>") {
  LabelSet out;
  std::map<std::string, int, std::less<>> label_ids;
  std::array<std::string_view, 2> f;
  detail::for_each_record(in, source, [&](std::string_view line, std::size_t line_no) {
    if (!detail::split2(line, f))
      throw DataError(source + ":" + std::to_string(line_no) + ": expected 2 fields");
    const auto e = vocab.entities.find(f[0]);
    if (!e) {
      ++out.skipped;
      return;
    }
    auto it = label_ids.find(f[1]);
    if (it == label_ids.end()) {
      it = label_ids.emplace(std::string(f[1]), static_cast<int>(out.label_names.size())).first;
      out.label_names.emplace_back(f[1]);
    }
    auto [pos, inserted] = out.labels.emplace(*e, it->second);
    if (!inserted && pos->second != it->second)
      throw DataError(source + ":" + std::to_string(line_no) + ": entity '" + std::string(f[0]) +
                      "' has two labels");
  });
  return out;
}

inline LabelSet load_labels(const std::filesystem::path& path, const Vocabulary& vocab) {
  auto in = detail::open_input(path);
  return load_labels(in, vocab, path.string());
}

struct DatasetLayout {
  std::string train = "train.txt";
  std::string valid = "valid.txt";
  std::string test = "test.txt";
  std::string schema = "schema.txt";
};

struct DatasetBundle {
  std::string name;
  KnowledgeGraph kg;
  Schema schema;
  bool has_schema = false;
  std::size_t unknown_type_rows = 0;
  std::size_t unknown_relation_rows = 0;
  /// KG relations lacking a domain or a range.
  std::vector<RelationId> schema_incomplete;
};

/// Loads train/valid/test (in that order, so ids are stable) and then the
/// schema if present. A missing valid or test file is an error; a missing
/// schema is allowed and leaves `has_schema` false.
inline DatasetBundle load_dataset(const std::filesystem::path& dir, const DatasetLayout& layout = {}) {
  DatasetBundle b;
  b.name = dir.filename().string();
  if (b.name.empty()) b.name = dir.parent_path().filename().string();
  b.kg.train = load_triples(dir / layout.train, b.kg.vocab);
  b.kg.valid = load_triples(dir / layout.valid, b.kg.vocab);
  b.kg.test = load_triples(dir / layout.test, b.kg.vocab);
  const std::size_t kg_relations = b.kg.vocab.relations.size();

  // The triples define the relation set; schema-only relations are skipped.
  if (std::filesystem::exists(dir / layout.schema)) {
    auto loaded = load_schema(dir / layout.schema, b.kg.vocab, {.intern_entities = false, .intern_relations = false});
    b.schema = std::move(loaded.schema);
    b.unknown_type_rows = loaded.unknown_type_rows;
    b.unknown_relation_rows = loaded.unknown_relation_rows;
    b.has_schema = true;
  } else {
    b.schema = Schema(b.kg.vocab.classes.size(), {}, {}, {}, {});
  }

  for (std::size_t r = 0; r < kg_relations; ++r) {
    const auto rel = id_at<RelationId>(r);
    if (!b.schema.domain(rel) || !b.schema.range(rel)) b.schema_incomplete.push_back(rel);
  }
  b.kg.validate();
  return b;
}

} // namespace maschine
