// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any checked criterion fails. Criteria 5 and 6 need the full
// YAGO14k dataset and run in acceptance_yago14k.
//
//   acceptance --data DIR --cli PATH --work DIR

#include <CLI11.hpp>

#include <sys/wait.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace maschine;
using testutil::E;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int n, const std::string& name, const Outcome& o) {
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << name << "): " << o.detail << std::endl;
  if (!o.pass) ++failures;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

/// Runs a shell command with stdout sent to `out`; returns the exit status.
int run(const std::string& cmd, const fs::path& out) {
  const int rc = std::system((cmd + " > " + quote(out) + " 2> " + quote(out.string() + ".err")).c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) s.pop_back();
  return s;
}

using NamedSet = std::set<std::array<std::string, 3>>;

NamedSet read_named(const fs::path& path) {
  std::ifstream in(path);
  NamedSet out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::array<std::string, 3> t;
    std::getline(ss, t[0], '\t');
    std::getline(ss, t[1], '\t');
    std::getline(ss, t[2], '\t');
    out.insert(t);
  }
  return out;
}

NamedSet named(const std::set<ProtoTriple>& s, const Vocabulary& v) {
  NamedSet out;
  for (const auto& t : s) out.insert({v.classes.name(t.head), v.relations.name(t.relation), v.classes.name(t.tail)});
  return out;
}

// ---------------------------------------------------------------------------

Outcome protograph_oracle(const fs::path& data, const fs::path& cli, const fs::path& work) {
  Outcome o;
  std::ostringstream d;
  const fs::path syn = data / "synthetic";
  const auto b = load_dataset(syn);
  const std::size_t nr = b.kg.vocab.relations.size(), nc = b.kg.vocab.classes.size();
  const struct {
    const char* h;
    std::string stats;
    NamedSet oracle;
    const char* expected;
  } cases[] = {{"p1", "11 10 8", named(testutil::oracle_p1(b.schema, nr), b.kg.vocab), "expected_p1.txt"},
               {"p2", "15 10 25", named(testutil::oracle_p2(b.schema, nc, nr), b.kg.vocab), "expected_p2.txt"}};
  for (const auto& c : cases) {
    const fs::path out = work / ("c1_synthetic_" + std::string(c.h));
    const int rc = run(quote(cli) + " build-protograph --dataset " + quote(syn) + " --heuristic " + c.h + " --out " +
                           quote(out),
                       work / ("c1_" + std::string(c.h) + ".txt"));
    const std::string stats = trim(slurp(work / ("c1_" + std::string(c.h) + ".txt")));
    const auto produced = read_named(out / "protograph.txt");
    const bool ok = rc == 0 && stats == c.stats && produced == c.oracle && produced == read_named(syn / c.expected);
    o.pass = o.pass && ok;
    d << "synthetic " << c.h << " [" << stats << "]" << (ok ? " ok" : " MISMATCH") << "; ";
  }

  // The released schemas, when present under $MASCHINE_DATA_ROOT.
  const char* root = std::getenv("MASCHINE_DATA_ROOT");
  const struct {
    const char* name;
    const char* p1;
    const char* p2;
  } table[] = {{"YAGO14k", "22 37 37", "590 37 4959"},
               {"FB15k187", "138 187 187", "138 187 187"},
               {"DBpedia77k", "55 150 150", "186 150 3210"}};
  std::size_t found = 0;
  for (const auto& t : table) {
    const fs::path dir = root ? fs::path(root) / t.name : fs::path();
    if (!root || !fs::exists(dir / "schema.txt")) continue;
    ++found;
    for (const auto& [h, want] : {std::pair{"p1", t.p1}, std::pair{"p2", t.p2}}) {
      const fs::path stdout_file = work / ("c1_" + std::string(t.name) + "_" + h + ".txt");
      const int rc = run(quote(cli) + " build-protograph --dataset " + quote(dir) + " --heuristic " + h + " --out " +
                             quote(work / ("c1_" + std::string(t.name) + "_" + h)),
                         stdout_file);
      const std::string stats = trim(slurp(stdout_file));
      const bool ok = rc == 0 && stats == want;
      o.pass = o.pass && ok;
      d << t.name << ' ' << h << " [" << stats << "] want [" << want << "]" << (ok ? " ok" : " MISMATCH") << "; ";
    }
  }
  if (found == 0) d << "released schemas not found under $MASCHINE_DATA_ROOT, synthetic substitute only";
  o.detail = d.str();
  return o;
}

Outcome gradient_correctness() {
  Outcome o;
  std::ostringstream d;
  for (auto kind : {ModelKind::transe, ModelKind::distmult, ModelKind::complex, ModelKind::tucker}) {
    double worst = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) worst = std::max(worst, testutil::gradient_check(kind, seed));
    o.pass = o.pass && worst < 1e-4;
    d << to_string(kind) << " max rel err " << worst << "; ";
  }
  d << "tolerance 1e-4";
  o.detail = d.str();
  return o;
}

Outcome ranking_oracle() {
  Outcome o;
  Rng rng(2024);
  std::size_t rank_mismatch = 0, triples = 0, instances = 0;
  double worst = 0;
  for (auto kind : {ModelKind::transe, ModelKind::distmult, ModelKind::complex, ModelKind::tucker})
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t ne = 2 + rng.below(19), nr = 1 + rng.below(4);
      const auto kg = testutil::random_kg(rng, ne, nr, std::min<std::size_t>(4 + rng.below(40), ne * ne * nr));
      const auto schema = testutil::random_schema(rng, 1 + rng.below(8), nr, ne);
      auto p = testutil::random_params<double>(kind, ne, nr, 1 + rng.below(4), rng.next());
      p.transe_norm = rng.coin() ? 1 : 2;
      if (trial % 2 == 0) testutil::quantize_params(p, rng);
      const FilterIndex f(kg.view());
      const auto ranked = Ranker<double>(p, f).rank_all(kg.test, 0);
      const auto rep = evaluate_link_prediction(p, kg.test, f, &schema);
      const auto oracle =
          testutil::oracle_lp(p, kg.test, testutil::known_triples(kg.train, kg.valid, kg.test), &schema);
      const auto ranks = pooled_ranks(ranked);
      for (std::size_t i = 0; i < ranks.size(); ++i) rank_mismatch += ranks[i] != oracle.ranks[i];
      for (auto [a, b] : {std::pair{rep.mrr, oracle.mrr}, {rep.hits1, oracle.hits1}, {rep.hits3, oracle.hits3},
                          {rep.hits10, oracle.hits10}, {rep.sem1, oracle.sem1}, {rep.sem3, oracle.sem3},
                          {rep.sem10, oracle.sem10}})
        worst = std::max(worst, std::abs(a - b));
      triples += kg.test.size();
      ++instances;
    }
  o.pass = rank_mismatch == 0 && worst <= 1e-12;
  o.detail = std::to_string(instances) + " random KGs, " + std::to_string(triples) + " test triples, " +
             std::to_string(rank_mismatch) + " rank mismatches, max metric diff " + std::to_string(worst) +
             " (tolerance 1e-12)";
  return o;
}

Outcome clustering_oracle() {
  std::size_t pairs = 0;
  double worst = 0;
  for (std::size_t n = 1; n <= 8; ++n) {
    const auto parts = testutil::all_partitions(n);
    const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<double> worst_by(workers, 0.0);
    std::atomic<std::size_t> next{0};
    {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
          for (std::size_t i = next++; i < parts.size(); i = next++)
            for (const auto& pred : parts) {
              const auto got = clustering_metrics(pred, parts[i]);
              worst_by[w] = std::max(worst_by[w], testutil::max_metric_diff(got, testutil::metrics_oracle(pred, parts[i])));
            }
        });
    }
    for (double v : worst_by) worst = std::max(worst, v);
    pairs += parts.size() * parts.size();
  }
  Outcome o;
  o.pass = worst <= 1e-9;
  o.detail = std::to_string(pairs) + " partition pairs over 1..8 points, max diff " + std::to_string(worst) +
             " (tolerance 1e-9)";
  return o;
}

Outcome transfer_semantics(const fs::path& data) {
  Outcome o;
  const auto b = load_dataset(data / "synthetic");
  const auto nr = b.kg.vocab.relations.size();
  const auto pg = build_p2(b.schema, nr);
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.learning_rate = 0.01;
  auto proto = testutil::random_params<double>(ModelKind::transe, pg.nodes().size(), nr, 8, 5);
  proto = train(pg.view(), 20, cfg, std::move(proto), 6).final_params;
  const auto mapping = build_mapping(b.kg, b.schema);
  TransferReport rep;
  const auto kg = transfer(proto, pg, mapping, b.kg.vocab.entities.size(), 7, &rep);

  std::size_t same_pairs = 0, same_bad = 0, averaged = 0, flagged_bad = 0;
  double worst_mean = 0;
  const std::size_t n = b.kg.vocab.entities.size();
  auto rows_of = [&](EntityId e) {
    std::vector<std::size_t> rows;
    if (auto it = mapping.mapped.find(e); it != mapping.mapped.end())
      for (ClassId c : it->second)
        if (auto r = pg.row_of(c)) rows.push_back(*r);
    return rows;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto ri = rows_of(E(i));
    if (ri.size() == 1)
      for (std::size_t j = i + 1; j < n; ++j)
        if (rows_of(E(j)) == ri) {
          ++same_pairs;
          if (!std::equal(kg.entity(i).begin(), kg.entity(i).end(), kg.entity(j).begin())) ++same_bad;
        }
    if (ri.size() > 1) {
      ++averaged;
      for (std::size_t k = 0; k < kg.width(); ++k) {
        double m = 0;
        for (auto r : ri) m += proto.entity(r)[k];
        worst_mean = std::max(worst_mean, std::abs(kg.entity(i)[k] - m / double(ri.size())));
      }
    }
    if (ri.empty()) {
      const bool is_flagged = std::find(rep.flagged.begin(), rep.flagged.end(), E(i)) != rep.flagged.end();
      bool fresh = true;
      for (std::size_t r = 0; r < proto.num_entities; ++r)
        if (std::equal(kg.entity(i).begin(), kg.entity(i).end(), proto.entity(r).begin())) fresh = false;
      bool nonzero = false;
      for (double v : kg.entity(i)) nonzero = nonzero || v != 0;
      if (!is_flagged || !fresh || !nonzero) ++flagged_bad;
    }
  }
  const auto crossover = b.kg.vocab.entities.find("crossover1");
  const auto mystery = b.kg.vocab.entities.find("mystery1");
  const bool fixtures = crossover && rows_of(*crossover).size() == 2 && mystery && rows_of(*mystery).empty();
  o.pass = fixtures && same_pairs > 0 && same_bad == 0 && averaged > 0 && worst_mean <= 1e-12 && flagged_bad == 0 &&
           rep.flagged.size() == rep.random;
  std::ostringstream d;
  d << same_pairs << " same-class pairs (" << same_bad << " differ); " << averaged
    << " multi-class entities, max |v - mean| " << worst_mean << " (tolerance 1e-12); " << rep.random
    << " unmapped entities flagged, " << flagged_bad << " not freshly initialized";
  o.detail = d.str();
  return o;
}

Outcome determinism(const fs::path& data, const fs::path& cli, const fs::path& work) {
  Outcome o;
  std::ostringstream d;
  const fs::path syn = fs::absolute(data / "synthetic");
  std::size_t compared = 0, differ = 0;
  auto same = [&](const fs::path& a, const fs::path& b) {
    ++compared;
    const auto x = slurp(a), y = slurp(b);
    if (x.empty() || x != y) {
      ++differ;
      d << "differs: " << a.filename().string() << "; ";
    }
  };

  struct Run {
    const char* name;
    const char* model;
    const char* setting;
  };
  for (const Run& r : {Run{"transe_p2", "TransE", "P2"}, Run{"tucker_v", "TuckER", "V"},
                       Run{"complex_p1", "ComplEx", "P1"}}) {
    fs::path outs[2];
    for (int rep = 0; rep < 2; ++rep) {
      outs[rep] = work / ("c8_" + std::string(r.name) + "_" + std::to_string(rep));
      json spec{{"dataset", syn.string()},
                {"output", outs[rep].string()},
                {"model", r.model},
                {"setting", r.setting},
                {"seed", 11},
                {"config", {{"dim", 8}, {"epochs_kg", 20}, {"epochs_proto", 10}, {"eval_every", 5},
                            {"learning_rate", 0.01}}}};
      const fs::path spec_path = work / ("c8_" + std::string(r.name) + "_" + std::to_string(rep) + ".json");
      std::ofstream(spec_path) << spec.dump(2);
      const int rc = run(quote(cli) + " --threads 1 train --quiet --spec " + quote(spec_path),
                         work / ("c8_" + std::string(r.name) + "_train.txt"));
      if (rc != 0) {
        o.pass = false;
        d << r.name << " train exit " << rc << "; ";
      }
    }
    for (const char* f : {"embeddings.tsv", "manifest.json", "checkpoint.bin"}) same(outs[0] / f, outs[1] / f);

    for (const char* task : {"lp", "cluster", "classify", "pca"}) {
      fs::path reports[2], stdouts[2], csvs[2];
      for (int rep = 0; rep < 2; ++rep) {
        const std::string stem = "c8_" + std::string(r.name) + "_" + task + "_" + std::to_string(rep);
        reports[rep] = work / (stem + ".json");
        stdouts[rep] = work / (stem + ".out");
        csvs[rep] = work / (stem + ".csv");
        std::string cmd = quote(cli) + " --threads 1 evaluate --checkpoint " + quote(outs[rep] / "checkpoint.bin") +
                          " --dataset " + quote(syn) + " --task " + task + " --report " + quote(reports[rep]);
        if (std::string(task) == "pca") cmd += " --out " + quote(csvs[rep]);
        const int rc = run(cmd, stdouts[rep]);
        if (rc != 0) {
          o.pass = false;
          d << r.name << ' ' << task << " exit " << rc << "; ";
        }
      }
      same(reports[0], reports[1]);
      same(stdouts[0], stdouts[1]);
      if (std::string(task) == "pca") same(csvs[0], csvs[1]);
    }
  }
  for (int rep = 0; rep < 2; ++rep)
    run(quote(cli) + " build-protograph --dataset " + quote(syn) + " --heuristic p2 --out " +
            quote(work / ("c8_proto_" + std::to_string(rep))),
        work / ("c8_proto_" + std::to_string(rep) + ".txt"));
  for (const char* f : {"protograph.txt", "mapping.txt"}) same(work / "c8_proto_0" / f, work / "c8_proto_1" / f);
  same(work / "c8_proto_0.txt", work / "c8_proto_1.txt");

  o.pass = o.pass && differ == 0;
  d << compared << " output pairs compared byte for byte, " << differ << " differ";
  o.detail = d.str();
  return o;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string data, cli, work;
  app.add_option("--data", data)->required();
  app.add_option("--cli", cli)->required();
  app.add_option("--work", work)->required();
  CLI11_PARSE(app, argc, argv);
  const fs::path work_dir = fs::absolute(work);
  fs::remove_all(work_dir);
  fs::create_directories(work_dir);

  auto guarded = [](auto&& fn) {
    try {
      return fn();
    } catch (const std::exception& e) {
      return Outcome{false, std::string("exception: ") + e.what()};
    }
  };
  report(1, "protograph oracle", guarded([&] { return protograph_oracle(data, cli, work_dir); }));
  report(2, "gradient correctness", guarded([] { return gradient_correctness(); }));
  report(3, "ranking oracle", guarded([] { return ranking_oracle(); }));
  report(4, "clustering-metric oracle", guarded([] { return clustering_oracle(); }));
  std::cout << "---- criteria 5 and 6 need YAGO14k and are checked by acceptance_yago14k" << std::endl;
  report(7, "transfer semantics", guarded([&] { return transfer_semantics(data); }));
  report(8, "determinism", guarded([&] { return determinism(data, cli, work_dir); }));
  std::cout << (failures == 0 ? "all checked criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
