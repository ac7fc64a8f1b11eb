#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "maschine/error.hpp"
#include "maschine/model.hpp"
#include "maschine/vocabulary.hpp"

namespace maschine {

struct Checkpoint {
  ModelParams params;
  int epoch = 0;
  double valid_mrr = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t vocabulary_hash = 0;
};

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::uint64_t parse_hex64(const std::string& s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc{} || p != s.data() + s.size()) throw DataError("bad hash '" + s + "'");
  return v;
}

namespace detail {

inline void write_floats_le(std::ostream& out, const std::vector<float>& v) {
  static_assert(sizeof(float) == 4);
  std::vector<char> buf(v.size() * 4);
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(v[i]);
    for (int b = 0; b < 4; ++b) buf[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

inline void read_floats_le(std::istream& in, std::vector<float>& v, std::size_t n) {
  std::vector<unsigned char> buf(n * 4);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) throw DataError("checkpoint truncated");
  v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= std::uint32_t{buf[i * 4 + b]} << (8 * b);
    v[i] = std::bit_cast<float>(bits);
  }
}

} // namespace detail

/// One JSON metadata line, then entity, relation and core blocks as
/// little-endian 32-bit floats.
inline void write_checkpoint(std::ostream& out, const Checkpoint& ck) {
  const auto& p = ck.params;
  nlohmann::ordered_json meta = {
      {"format", "maschine-checkpoint"},
      {"version", 1},
      {"model", to_string(p.kind)},
      {"dim", p.dim},
      {"num_entities", p.num_entities},
      {"num_relations", p.num_relations},
      {"reciprocal", p.reciprocal},
      {"transe_norm", p.transe_norm},
      {"vocabulary_hash", hex64(ck.vocabulary_hash)},
      {"epoch", ck.epoch},
      {"seed", ck.seed},
      {"valid_mrr", ck.valid_mrr},
      {"blocks", {{"entities", p.entities.size()}, {"relations", p.relations.size()}, {"core", p.core.size()}}},
  };
  out << meta.dump() << '\n';
  detail::write_floats_le(out, p.entities);
  detail::write_floats_le(out, p.relations);
  detail::write_floats_le(out, p.core);
}

inline Checkpoint read_checkpoint(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw DataError("empty checkpoint");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint header: ") + e.what());
  }
  if (meta.value("format", "") != "maschine-checkpoint") throw DataError("not a checkpoint file");
  Checkpoint ck;
  auto& p = ck.params;
  try {
    p.kind = parse_model_kind(meta.at("model").get<std::string>());
    p.dim = meta.at("dim").get<std::size_t>();
    p.num_entities = meta.at("num_entities").get<std::size_t>();
    p.num_relations = meta.at("num_relations").get<std::size_t>();
    p.reciprocal = meta.at("reciprocal").get<bool>();
    p.transe_norm = meta.at("transe_norm").get<int>();
    ck.vocabulary_hash = parse_hex64(meta.at("vocabulary_hash").get<std::string>());
    ck.epoch = meta.at("epoch").get<int>();
    ck.seed = meta.at("seed").get<std::uint64_t>();
    ck.valid_mrr = meta.at("valid_mrr").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint header: ") + e.what());
  }
  const std::size_t core = p.kind == ModelKind::tucker ? p.dim * p.dim * p.dim : 0;
  detail::read_floats_le(in, p.entities, p.num_entities * p.width());
  detail::read_floats_le(in, p.relations, p.relation_rows() * p.width());
  detail::read_floats_le(in, p.core, core);
  return ck;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_checkpoint(out, ck);
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_checkpoint(in);
}

/// Shortest round-trip decimal form of a float.
inline void append_float(std::string& out, float v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

/// Text export: an `ENT <count> <dim> <model>` header with one
/// tab-separated row per entity, then the same for relations. ComplEx rows
/// hold 2*dim interleaved values. Reciprocal relation rows are named
/// `<relation>^-1`.
inline void write_embeddings(std::ostream& out, const ModelParams& p, const Vocabulary& vocab) {
  if (vocab.entities.size() != p.num_entities || vocab.relations.size() != p.num_relations)
    throw DataError("embedding export: vocabulary does not match parameters");
  std::string line;
  auto row = [&](const std::string& name, std::span<const float> values) {
    line = name;
    for (float v : values) {
      line += '\t';
      append_float(line, v);
    }
    line += '\n';
    out << line;
  };
  out << "ENT " << p.num_entities << ' ' << p.dim << ' ' << to_string(p.kind) << '\n';
  for (std::size_t i = 0; i < p.num_entities; ++i) row(vocab.entities.names()[i], p.entity(i));
  out << "REL " << p.relation_rows() << ' ' << p.dim << ' ' << to_string(p.kind) << '\n';
  for (std::size_t r = 0; r < p.relation_rows(); ++r) {
    const auto& base = vocab.relations.names()[r % p.num_relations];
    row(r < p.num_relations ? base : base + "^-1", p.relation(r));
  }
}

} // namespace maschine
