#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "bnet/banksim.hpp"
#include "bnet/bundle.hpp"
#include "bnet/fixtures.hpp"
#include "bnet/graph.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

json categorical_override(const std::string& node, const std::vector<double>& probs,
                          std::uint64_t seed) {
  return json{{"overrides", {{node, {{"type", "categorical"}, {"probs", probs}}}}},
              {"reps", 100},
              {"samples", 5000},
              {"bins", 20},
              {"seed", seed}};
}

int make_toy(const std::string& out_dir, std::size_t n_train, std::size_t n_eval,
             std::uint64_t seed) {
  fs::create_directories(out_dir);
  fs::path dir(out_dir);

  bnet::Dag dag = bnet::fixtures::toy_network();
  write_text(dir / "network.json", bnet::dag_to_json(dag).dump(2) + "\n");

  // Same wiring with a boosted-stumps frequency model, for swap experiments.
  bnet::Dag stumps = dag;
  stumps.find("m2")->model->arch = bnet::BoostedStumps{150, 0.3};
  write_text(dir / "network_stumps_m2.json", bnet::dag_to_json(stumps).dump(2) + "\n");

  bnet::write_data_csv(bnet::fixtures::toy_data(n_train, seed),
                       (dir / "train.csv").string());
  bnet::write_data_csv(bnet::fixtures::toy_data(n_eval, seed + 1),
                       (dir / "eval.csv").string());

  // Variant where m2's label is non-monotone in x3; the swap experiment
  // trains both architectures on it.
  bnet::write_data_csv(bnet::fixtures::toy_data_nonlinear(n_train, seed),
                       (dir / "train_nonlinear.csv").string());
  bnet::write_data_csv(bnet::fixtures::toy_data_nonlinear(n_eval, seed + 1),
                       (dir / "eval_nonlinear.csv").string());

  // Single-feature shift scenarios plus the identity (null) scenario.
  write_text(dir / "shift_x3.json",
             categorical_override("x3", {0.1, 0.2, 0.7}, seed).dump(2) + "\n");
  write_text(dir / "shift_x1.json",
             categorical_override("x1", {0.9, 0.1}, seed).dump(2) + "\n");
  write_text(dir / "shift_x2.json",
             categorical_override("x2", {0.6, 0.3, 0.1}, seed).dump(2) + "\n");
  json all = categorical_override("x3", {0.1, 0.2, 0.7}, seed);
  all["overrides"]["x1"] = {{"type", "categorical"}, {"probs", {0.9, 0.1}}};
  all["overrides"]["x2"] = {{"type", "categorical"}, {"probs", {0.6, 0.3, 0.1}}};
  write_text(dir / "shift_all.json", all.dump(2) + "\n");
  write_text(dir / "shift_null.json",
             categorical_override("x3", {0.55, 0.3, 0.15}, seed).dump(2) + "\n");

  json ablate_m2 = {{"ablate", {"m2"}}, {"reps", 100}, {"samples", 5000},
                    {"bins", 20}, {"seed", seed}};
  write_text(dir / "ablate_m2.json", ablate_m2.dump(2) + "\n");
  json ablate_m1 = ablate_m2;
  ablate_m1["ablate"] = {"m1"};
  write_text(dir / "ablate_m1.json", ablate_m1.dump(2) + "\n");

  // The swap target path is filled by training network_stumps_m2.json and
  // copying models/m2.json next to this scenario.
  json swap = {{"swaps", {{"m2", "stumps_m2.json"}}}, {"reps", 100},
               {"samples", 5000}, {"bins", 20}, {"seed", seed}};
  write_text(dir / "swap_m2.json", swap.dump(2) + "\n");

  std::cout << "toy fixture written to " << out_dir << "\n";
  return 0;
}

int make_banksim(const std::string& out_dir, std::size_t rows, std::uint64_t seed) {
  fs::create_directories(out_dir);
  fs::path dir(out_dir);
  auto records = bnet::banksim::generate_synthetic(rows, seed);
  std::ofstream out(dir / "banksim_synthetic.csv");
  if (!out) throw std::runtime_error("cannot write banksim_synthetic.csv");
  out << "step,customer,age,gender,merchant,category,amount,fraud\n";
  std::size_t fraud = 0;
  for (const auto& r : records) {
    out << r.step << ",'" << r.customer << "',"
        << (r.age < 0 ? std::string("U") : std::to_string(r.age)) << ",'"
        << r.gender << "','" << r.merchant << "','" << r.category << "',"
        << r.amount << "," << r.fraud << "\n";
    fraud += static_cast<std::size_t>(r.fraud);
  }
  std::cout << "wrote " << records.size() << " rows (" << fraud
            << " fraud) to " << (dir / "banksim_synthetic.csv").string() << "\n";
  return 0;
}

int prepare_banksim(const std::string& in_path, const std::string& out_dir,
                    double train_fraction) {
  fs::create_directories(out_dir);
  fs::path dir(out_dir);

  bnet::banksim::LoadStats stats;
  auto records = bnet::banksim::load_csv(in_path, &stats);
  auto table = bnet::banksim::engineer_features(std::move(records));
  bnet::banksim::derive_labels(table);

  bnet::Dag dag = bnet::banksim::build_network(table);
  write_text(dir / "network.json", bnet::dag_to_json(dag).dump(2) + "\n");
  bnet::banksim::write_features_csv(table, (dir / "features.csv").string());

  // Deterministic row-stride split.
  bnet::banksim::FeatureTable train = table, eval = table;
  train.rows.clear();
  eval.rows.clear();
  std::size_t stride = 10;
  auto cut = static_cast<std::size_t>(train_fraction * static_cast<double>(stride));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    (i % stride < cut ? train : eval).rows.push_back(table.rows[i]);
  }
  bnet::banksim::write_features_csv(train, (dir / "features_train.csv").string());
  bnet::banksim::write_features_csv(eval, (dir / "features_eval.csv").string());

  json scenario_m1 = {{"ablate", {"m1"}}, {"reps", 100}, {"samples", 5000},
                      {"bins", 20}, {"seed", 1}};
  write_text(dir / "ablate_m1.json", scenario_m1.dump(2) + "\n");
  json scenario_m2 = scenario_m1;
  scenario_m2["ablate"] = {"m2"};
  write_text(dir / "ablate_m2.json", scenario_m2.dump(2) + "\n");

  std::cout << "loaded " << stats.rows << " rows (" << stats.fraud_rows
            << " fraud); features and network written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate bundled fixtures and prepare transaction data"};
  app.require_subcommand(1);

  std::string out_dir, in_path;
  std::size_t n_train = 20000, n_eval = 10000, rows = 60000;
  std::uint64_t seed = 7;
  double train_fraction = 0.7;

  auto* toy = app.add_subcommand("toy", "Toy network, data and scenarios");
  toy->add_option("--out", out_dir)->required();
  toy->add_option("--train-rows", n_train);
  toy->add_option("--eval-rows", n_eval);
  toy->add_option("--seed", seed);

  auto* synth = app.add_subcommand("banksim-synthetic", "Synthetic transaction CSV");
  synth->add_option("--out", out_dir)->required();
  synth->add_option("--rows", rows);
  synth->add_option("--seed", seed);

  auto* prep = app.add_subcommand("banksim-prepare",
                                  "Engineer features and build the network");
  prep->add_option("--in", in_path)->required();
  prep->add_option("--out", out_dir)->required();
  prep->add_option("--train-fraction", train_fraction);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(toy)) return make_toy(out_dir, n_train, n_eval, seed);
    if (app.got_subcommand(synth)) return make_banksim(out_dir, rows, seed);
    if (app.got_subcommand(prep)) return prepare_banksim(in_path, out_dir, train_fraction);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
