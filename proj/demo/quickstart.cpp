// Trains TransE on a small dataset in the vanilla and P2 settings and prints
// link prediction results for both.
//
//   quickstart [dataset-dir]    (default: data/synthetic)

#include <iostream>

#include "maschine/maschine.hpp"

using namespace maschine;

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "data/synthetic";
  try {
    const auto b = load_dataset(dir);
    std::cout << b.name << ": " << b.kg.vocab.entities.size() << " entities, " << b.kg.vocab.relations.size()
              << " relations, " << b.kg.train.size() << " training triples\n\n";
    for (auto setting : {Setting::vanilla, Setting::p2}) {
      TrainConfig cfg;
      cfg.model = ModelKind::transe;
      cfg.setting = setting;
      cfg.dim = 16;
      cfg.epochs_kg = 100;
      cfg.epochs_proto = 50;
      cfg.learning_rate = 0.01;
      cfg.seed = 1;
      const auto res = run_maschine(b.kg, b.schema, cfg);
      const auto rep = evaluate_link_prediction(res.kg.best, b.kg.test, FilterIndex(b.kg.view()), &b.schema);
      std::cout << "setting " << to_string(setting) << " (best epoch " << res.kg.best_epoch << ")\n"
                << lp_table(rep) << '\n';
    }
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
