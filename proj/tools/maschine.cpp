// maschine command-line entry point.
//
//   maschine build-protograph --dataset DIR --heuristic p1|p2 --out DIR
//   maschine train --spec runspec.json
//   maschine evaluate --checkpoint FILE --dataset DIR --task lp|cluster|classify|pca
//
// Exit codes: 0 ok, 2 usage, 3 data, 4 numerical.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "maschine/maschine.hpp"

namespace fs = std::filesystem;
using namespace maschine;

namespace {

constexpr int kUsage = 2;
constexpr int kData = 3;
constexpr int kNumerical = 4;

/// Relative dataset paths that do not exist from the working directory are
/// looked up under $MASCHINE_DATA_ROOT.
fs::path resolve_dataset(const fs::path& p, const fs::path& base = {}) {
  if (p.is_absolute()) return p;
  if (!base.empty() && fs::exists(base / p)) return base / p;
  if (fs::exists(p)) return p;
  if (const char* root = std::getenv("MASCHINE_DATA_ROOT"); root && *root)
    if (fs::exists(fs::path(root) / p)) return fs::path(root) / p;
  throw DataError("dataset directory '" + p.string() + "' not found (also tried $MASCHINE_DATA_ROOT)");
}

/// FNV-1a over the file's bytes.
std::string content_hash(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open '" + p.string() + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return hex64(h);
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + p.string() + "'");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

struct ProtoArgs {
  std::string dataset, heuristic = "p2", out;
};

int build_protograph_cmd(const ProtoArgs& a) {
  const auto dir = resolve_dataset(a.dataset);
  const auto h = parse_heuristic(a.heuristic);
  const auto b = load_dataset(dir);
  if (!b.has_schema) throw DataError("no schema file in '" + dir.string() + "'");
  const std::size_t relations = b.kg.vocab.relations.size();
  const auto pg = build_protograph(h, b.schema, relations);
  const auto mapping = build_mapping(b.kg, b.schema);

  fs::create_directories(a.out);
  std::ostringstream triples, map;
  save_protograph(triples, pg, b.kg.vocab);
  save_mapping(map, mapping, b.kg.vocab);
  write_text(fs::path(a.out) / "protograph.txt", triples.str());
  write_text(fs::path(a.out) / "mapping.txt", map.str());

  std::cerr << "schema-only relations skipped: " << b.unknown_relation_rows
            << ", type rows for unknown entities: " << b.unknown_type_rows
            << ", relations lacking domain or range: " << b.schema_incomplete.size()
            << ", untyped entities: " << mapping.untyped.size() << '\n';
  std::cout << pg.nodes().size() << ' ' << relations << ' ' << pg.triples().size() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string spec;
  unsigned threads = 1;
  bool quiet = false;
};

int train_cmd(const TrainArgs& a) {
  const fs::path spec_path(a.spec);
  json spec;
  {
    std::ifstream in(spec_path);
    if (!in) throw UsageError("cannot open run spec '" + a.spec + "'");
    try {
      spec = json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("run spec is not valid JSON: " + std::string(e.what()));
    }
  }
  if (!spec.is_object()) throw UsageError("run spec must be a JSON object");
  static const std::set<std::string> known{"dataset", "output", "model", "setting", "seed", "config"};
  for (const auto& [k, v] : spec.items())
    if (!known.contains(k)) throw UsageError("unknown run spec key '" + k + "'");
  if (!spec.contains("dataset") || !spec["dataset"].is_string()) throw UsageError("run spec needs a 'dataset' string");
  if (!spec.contains("output") || !spec["output"].is_string()) throw UsageError("run spec needs an 'output' string");

  const fs::path base = spec_path.parent_path();
  const auto dir = resolve_dataset(spec["dataset"].get<std::string>(), base);
  fs::path out_dir = spec["output"].get<std::string>();
  if (out_dir.is_relative() && !base.empty()) out_dir = base / out_dir;

  json overrides = spec.value("config", json::object());
  if (!overrides.is_object()) throw UsageError("run spec 'config' must be an object");
  for (const char* k : {"model", "setting", "seed"})
    if (spec.contains(k)) {
      if (overrides.contains(k)) throw UsageError(std::string("'") + k + "' given both at top level and in config");
      overrides[k] = spec[k];
    }
  TrainConfig cfg = train_config_from_json(overrides);
  cfg.threads = a.threads;
  cfg.validate();

  const auto b = load_dataset(dir);
  if (cfg.setting != Setting::vanilla && !b.has_schema)
    throw DataError("setting " + std::string(to_string(cfg.setting)) + " needs a schema file in '" + dir.string() + "'");

  TrainHooks hooks;
  hooks.on_validation = [&](int epoch, double mrr) {
    if (!a.quiet) std::cerr << "epoch " << epoch << " valid MRR " << mrr << '\n';
  };
  const auto res = run_maschine(b.kg, b.schema, cfg, &hooks);

  fs::create_directories(out_dir);
  Checkpoint ck;
  ck.params = res.kg.best;
  ck.epoch = res.kg.best_epoch;
  ck.valid_mrr = res.kg.best_valid_mrr;
  ck.seed = cfg.seed;
  ck.vocabulary_hash = b.kg.vocab.hash();
  save_checkpoint(out_dir / "checkpoint.bin", ck);
  std::ostringstream emb;
  write_embeddings(emb, ck.params, b.kg.vocab);
  write_text(out_dir / "embeddings.tsv", emb.str());

  // Timings vary run to run, so they live apart from the manifest.
  json timings = json::array();
  json stages = json::array();
  for (const auto& s : res.stages) {
    stages.push_back(s.name);
    timings.push_back(json{{"stage", s.name}, {"seconds", s.seconds}});
  }
  write_text(out_dir / "timings.json", dump(timings));

  json inputs = json::object();
  for (const char* f : {"train.txt", "valid.txt", "test.txt", "schema.txt"})
    if (fs::exists(dir / f)) inputs[f] = content_hash(dir / f);
  json validation = json::array();
  for (const auto& [epoch, mrr] : res.kg.validation) validation.push_back(json{{"epoch", epoch}, {"mrr", mrr}});

  json manifest{{"dataset", json{{"name", b.name}, {"files", inputs}}},
                {"vocabulary_hash", hex64(ck.vocabulary_hash)},
                {"entities", b.kg.vocab.entities.size()},
                {"relations", b.kg.vocab.relations.size()},
                {"config", to_json(cfg)},
                {"stages", stages},
                {"best_epoch", res.kg.best_epoch},
                {"best_valid_mrr", res.kg.best_valid_mrr},
                {"validation", validation},
                {"final_epoch_loss", res.kg.epoch_loss.empty() ? json(nullptr) : json(res.kg.epoch_loss.back())}};
  if (cfg.setting != Setting::vanilla) {
    manifest["protograph"] = json{{"nodes", res.proto_nodes},
                                  {"triples", res.proto_triples},
                                  {"final_epoch_loss", res.proto_epoch_loss.empty()
                                                           ? json(nullptr)
                                                           : json(res.proto_epoch_loss.back())}};
    manifest["transfer"] = json{{"copied", res.transfer.copied},
                                {"averaged", res.transfer.averaged},
                                {"random", res.transfer.random}};
  }
  manifest["outputs"] = json{{"checkpoint.bin", content_hash(out_dir / "checkpoint.bin")},
                             {"embeddings.tsv", content_hash(out_dir / "embeddings.tsv")}};
  write_text(out_dir / "manifest.json", dump(manifest));
  if (!a.quiet) std::cerr << "wrote " << out_dir.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint, dataset, task, split = "test", labels, out, report;
  std::optional<std::uint64_t> seed;
  double test_fraction = 0.2;
  unsigned threads = 1;
};

int evaluate_cmd(const EvalArgs& a) {
  const auto ck = load_checkpoint(a.checkpoint);
  const auto dir = resolve_dataset(a.dataset);
  const auto b = load_dataset(dir);
  const auto vh = b.kg.vocab.hash();
  if (vh != ck.vocabulary_hash)
    throw DataError("vocabulary mismatch: checkpoint " + hex64(ck.vocabulary_hash) + ", dataset " + hex64(vh));
  const std::uint64_t seed = a.seed.value_or(ck.seed);
  const auto& p = ck.params;

  json j;
  std::string table;
  if (a.task == "lp") {
    std::span<const Triple> triples = a.split == "valid" ? std::span<const Triple>(b.kg.valid)
                                      : a.split == "test" ? std::span<const Triple>(b.kg.test)
                                                          : throw UsageError("--split must be valid or test");
    const FilterIndex filter(b.kg.view());
    const auto rep = evaluate_link_prediction(p, triples, filter, b.has_schema ? &b.schema : nullptr, a.threads);
    j = to_json(rep);
    j["split"] = a.split;
    table = lp_table(rep);
  } else if (a.task == "cluster") {
    if (!b.has_schema) throw DataError("clustering needs a schema file with rdf:type rows");
    const auto rep = entity_clustering_eval(p, b.schema, seed);
    j = to_json(rep);
    table = cluster_table(rep.report);
  } else if (a.task == "classify") {
    const fs::path lp = a.labels.empty() ? dir / "labels.txt" : fs::path(a.labels);
    const auto ls = load_labels(lp, b.kg.vocab);
    std::vector<EntityId> ids;
    std::vector<int> y;
    for (const auto& [e, l] : ls.labels) {
      ids.push_back(e);
      y.push_back(l);
    }
    if (ids.empty()) throw DataError("no label rows match the dataset's entities");
    const auto split = stratified_split(y, a.test_fraction, seed);
    std::vector<EntityId> tr_ids, te_ids;
    std::vector<int> tr_y, te_y;
    for (auto i : split.train) {
      tr_ids.push_back(ids[i]);
      tr_y.push_back(y[i]);
    }
    for (auto i : split.test) {
      te_ids.push_back(ids[i]);
      te_y.push_back(y[i]);
    }
    if (te_ids.empty()) throw DataError("test split is empty; add labelled entities or raise --test-fraction");
    const auto rep = nc_eval(entity_matrix(p, tr_ids), tr_y, entity_matrix(p, te_ids), te_y);
    j = to_json(rep);
    j["labels"] = ls.num_labels();
    j["skipped_label_rows"] = ls.skipped;
    table = nc_table(rep);
  } else if (a.task == "pca") {
    if (a.out.empty()) throw UsageError("--task pca needs --out FILE for the coordinates");
    std::vector<EntityId> ids;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < p.num_entities; ++i) {
      const auto e = id_at<EntityId>(i);
      ids.push_back(e);
      const auto roots = b.has_schema ? most_generic_classes(e, b.schema) : std::set<ClassId>{};
      labels.push_back(roots.empty() ? "untyped"
                       : roots.size() > 1 ? "multiple"
                                          : b.kg.vocab.classes.name(*roots.begin()));
    }
    const auto r = pca_2d(entity_matrix(p, ids));
    std::ostringstream csv;
    write_pca_csv(csv, ids, labels, r.coords, b.kg.vocab);
    write_text(a.out, csv.str());
    j = json{{"task", "pca"}, {"points", ids.size()}, {"variances", {r.variances[0], r.variances[1]}}};
    table = "PC1\tPC2\n" + fixed3(r.variances[0]) + '\t' + fixed3(r.variances[1]) + '\n';
  } else {
    throw UsageError("unknown task '" + a.task + "'");
  }
  j["model"] = to_string(p.kind);
  j["checkpoint_epoch"] = ck.epoch;
  if (!a.report.empty()) write_text(a.report, dump(j));
  std::cout << table;
  if (a.report.empty()) std::cout << dump(j);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"MASCHInE: protograph pre-training for knowledge graph embeddings"};
  app.require_subcommand(1);
  unsigned threads = 1;
  app.add_option("--threads", threads, "worker threads for evaluation; 1 is the deterministic path")
      ->check(CLI::Range(1u, 1024u));

  ProtoArgs pa;
  auto* proto = app.add_subcommand("build-protograph", "build a protograph from a dataset's schema");
  proto->add_option("--dataset", pa.dataset, "dataset directory")->required();
  proto->add_option("--heuristic", pa.heuristic, "p1 or p2")->check(CLI::IsMember({"p1", "p2"}));
  proto->add_option("--out", pa.out, "output directory")->required();

  TrainArgs ta;
  auto* trainc = app.add_subcommand("train", "train embeddings from a run spec");
  trainc->add_option("--spec", ta.spec, "run spec JSON")->required()->check(CLI::ExistingFile);
  trainc->add_flag("--quiet", ta.quiet, "no progress output");

  EvalArgs ea;
  auto* evalc = app.add_subcommand("evaluate", "evaluate a checkpoint");
  evalc->add_option("--checkpoint", ea.checkpoint, "checkpoint file")->required()->check(CLI::ExistingFile);
  evalc->add_option("--dataset", ea.dataset, "dataset directory")->required();
  evalc->add_option("--task", ea.task, "lp, cluster, classify or pca")
      ->required()
      ->check(CLI::IsMember({"lp", "cluster", "classify", "pca"}));
  evalc->add_option("--split", ea.split, "lp: valid or test")->check(CLI::IsMember({"valid", "test"}));
  evalc->add_option("--labels", ea.labels, "classify: label file (default <dataset>/labels.txt)");
  evalc->add_option("--test-fraction", ea.test_fraction, "classify: held-out share per label");
  evalc->add_option("--seed", ea.seed, "cluster/classify seed (default: the checkpoint's)");
  evalc->add_option("--out", ea.out, "pca: CSV output file");
  evalc->add_option("--report", ea.report, "write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*proto) return build_protograph_cmd(pa);
    if (*trainc) {
      ta.threads = threads;
      return train_cmd(ta);
    }
    ea.threads = threads;
    return evaluate_cmd(ea);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  }
}
