#pragma once

#include <cstdio>
#include <ostream>
#include <set>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "maschine/checkpoint.hpp"
#include "maschine/classification.hpp"
#include "maschine/clustering.hpp"
#include "maschine/error.hpp"
#include "maschine/link_prediction.hpp"
#include "maschine/pca.hpp"
#include "maschine/training.hpp"
#include "maschine/vocabulary.hpp"

namespace maschine {

using json = nlohmann::ordered_json;

inline json to_json(const TrainConfig& c) {
  return json{{"model", to_string(c.model)},
              {"setting", to_string(c.setting)},
              {"dim", c.dim},
              {"epochs_kg", c.epochs_kg},
              {"epochs_proto", c.epochs_proto},
              {"eval_every", c.eval_every},
              {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate},
              {"negatives_per_positive", c.negatives_per_positive},
              {"optimizer", to_string(c.optimizer)},
              {"seed", c.seed},
              {"margin", c.margin},
              {"label_smoothing", c.label_smoothing},
              {"transe_norm", c.transe_norm},
              {"transe_unit_entities", c.transe_unit_entities}};
}

/// Applies the keys present in `j` on top of `base`. Unknown keys and
/// ill-typed values are usage errors.
inline TrainConfig train_config_from_json(const json& j, TrainConfig base = {}) {
  if (!j.is_object()) throw UsageError("training config must be a JSON object");
  static const std::set<std::string> known{"model",      "setting",     "dim",          "epochs_kg",
                                           "epochs_proto", "eval_every", "batch_size",   "learning_rate",
                                           "negatives_per_positive", "optimizer", "seed", "margin",
                                           "label_smoothing", "transe_norm", "transe_unit_entities"};
  for (const auto& [k, v] : j.items())
    if (!known.contains(k)) throw UsageError("unknown training config key '" + k + "'");
  try {
    if (j.contains("model")) base.model = parse_model_kind(j.at("model").get<std::string>());
    if (j.contains("setting")) base.setting = parse_setting(j.at("setting").get<std::string>());
    if (j.contains("dim")) base.dim = j.at("dim").get<std::size_t>();
    if (j.contains("epochs_kg")) base.epochs_kg = j.at("epochs_kg").get<int>();
    if (j.contains("epochs_proto")) base.epochs_proto = j.at("epochs_proto").get<int>();
    if (j.contains("eval_every")) base.eval_every = j.at("eval_every").get<int>();
    if (j.contains("batch_size")) base.batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("learning_rate")) base.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("negatives_per_positive")) base.negatives_per_positive = j.at("negatives_per_positive").get<int>();
    if (j.contains("optimizer")) base.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
    if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("margin")) base.margin = j.at("margin").get<double>();
    if (j.contains("label_smoothing")) base.label_smoothing = j.at("label_smoothing").get<double>();
    if (j.contains("transe_norm")) base.transe_norm = j.at("transe_norm").get<int>();
    if (j.contains("transe_unit_entities")) base.transe_unit_entities = j.at("transe_unit_entities").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad training config value: ") + e.what());
  }
  return base;
}

inline json to_json(const LPReport& r) {
  return json{{"task", "lp"},
              {"triples", r.num_triples},
              {"mrr", r.mrr},
              {"hits@1", r.hits1},
              {"hits@3", r.hits3},
              {"hits@10", r.hits10},
              {"sem@1", r.sem1},
              {"sem@3", r.sem3},
              {"sem@10", r.sem10},
              {"sem_head_queries", r.sem_head_queries},
              {"sem_tail_queries", r.sem_tail_queries}};
}

inline std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

/// One header row and one value row: MRR H@3 H@10 S@3 S@10.
inline std::string lp_table(const LPReport& r) {
  std::string out = "MRR\tH@3\tH@10\tS@3\tS@10\n";
  out += fixed3(r.mrr) + '\t' + fixed3(r.hits3) + '\t' + fixed3(r.hits10) + '\t' + fixed3(r.sem3) + '\t' +
         fixed3(r.sem10) + '\n';
  return out;
}

inline json to_json(const ClusterReport& r) {
  return json{{"ari", r.ari},
              {"nmi", r.nmi},
              {"ami", r.ami},
              {"v_measure", r.v_measure},
              {"fowlkes_mallows", r.fowlkes_mallows},
              {"homogeneity", r.homogeneity},
              {"completeness", r.completeness}};
}

inline json to_json(const EntityClusteringResult& r) {
  json j{{"task", "cluster"}, {"entities", r.entities}, {"classes", r.classes},
         {"excluded_multi_root", r.multi_root}, {"excluded_untyped", r.untyped}};
  j["metrics"] = to_json(r.report);
  return j;
}

inline std::string cluster_table(const ClusterReport& r) {
  std::string out = "ARI\tNMI\tAMI\tVM\tFM\tH\tC\n";
  out += fixed3(r.ari) + '\t' + fixed3(r.nmi) + '\t' + fixed3(r.ami) + '\t' + fixed3(r.v_measure) + '\t' +
         fixed3(r.fowlkes_mallows) + '\t' + fixed3(r.homogeneity) + '\t' + fixed3(r.completeness) + '\n';
  return out;
}

inline json to_json(const NCReport& r) {
  json f = json::object();
  for (const auto& [name, v] : r.f1) f[name] = v;
  return json{{"task", "classify"}, {"train", r.train_size},     {"test", r.test_size},
              {"f1", f},            {"best", r.best},            {"best_f1", r.best_f1},
              {"unseen_test_labels", r.unseen_test_labels}};
}

inline std::string nc_table(const NCReport& r) {
  std::string out = "classifier\tF1\n";
  for (const auto& [name, v] : r.f1) out += name + '\t' + fixed3(v) + '\n';
  out += "best:" + r.best + '\t' + fixed3(r.best_f1) + '\n';
  return out;
}

/// CSV `entity,label,x,y`. Names containing commas or quotes are quoted.
inline void write_pca_csv(std::ostream& out, std::span<const EntityId> ids, std::span<const std::string> labels,
                          const Matrix& coords, const Vocabulary& vocab) {
  if (ids.size() != coords.rows || labels.size() != ids.size() || coords.cols != 2)
    throw UsageError("pca export: mismatched ids, labels and coordinates");
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  };
  std::string line;
  out << "entity,label,x,y\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    line = field(vocab.entities.name(ids[i])) + ',' + field(labels[i]) + ',';
    append_float(line, static_cast<float>(coords(i, 0)));
    line += ',';
    append_float(line, static_cast<float>(coords(i, 1)));
    line += '\n';
    out << line;
  }
}

} // namespace maschine
