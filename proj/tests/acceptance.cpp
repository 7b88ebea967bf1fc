// Acceptance checks, one per criterion; run as `acceptance <cli> <fixtures> [n]`.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "bnet/banksim.hpp"
#include "bnet/bundle.hpp"
#include "bnet/distributions.hpp"
#include "bnet/fixtures.hpp"
#include "bnet/graph.hpp"
#include "bnet/inference.hpp"
#include "bnet/metrics.hpp"
#include "bnet/models.hpp"
#include "bnet/rng.hpp"
#include "bnet/simulate.hpp"
#include "bnet/stress.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bnet;

namespace {

std::string g_cli;
std::string g_fixtures;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

int run_cmd(const std::string& cmd) {
  int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

// Report content with the wall-clock field removed, for byte-level
// determinism comparisons.
std::string canonical_report(const std::string& path) {
  json j = load_json(path);
  if (j.contains("manifest")) j["manifest"].erase("duration_seconds");
  return j.dump();
}

ModelSpec numeric_spec(std::variant<LinearSoftmax, Mlp, BoostedStumps> arch,
                       int n_classes, int n_features) {
  ModelSpec spec;
  spec.arch = arch;
  spec.n_classes = n_classes;
  for (int i = 0; i < n_features; ++i) {
    spec.inputs.push_back({"f" + std::to_string(i), Encoding::Numeric, 0});
  }
  return spec;
}

std::vector<double> random_simplex(Rng& rng, int dim) {
  std::vector<double> p(static_cast<std::size_t>(dim));
  double total = 0.0;
  for (auto& v : p) {
    v = rng.gamma(1.0, 1.0) + 0.01;
    total += v;
  }
  for (auto& v : p) v /= total;
  return p;
}

Dag random_discrete_network(Rng& rng) {
  Dag dag;
  int n_feat = 2 + static_cast<int>(rng.uniform() * 3.0);  // 2..4
  for (int i = 0; i < n_feat; ++i) {
    Node n;
    n.id = "f" + std::to_string(i);
    n.kind = NodeKind::Feature;
    int cats = 2 + static_cast<int>(rng.uniform() * 3.0);  // 2..4
    n.dist = Categorical{random_simplex(rng, cats), {}, false};
    dag.nodes.push_back(std::move(n));
  }

  // Sometimes add a conditional child of the first feature.
  if (rng.uniform() < 0.5) {
    const auto& parent = std::get<Categorical>(*dag.nodes[0].dist);
    int pcats = static_cast<int>(parent.probs.size());
    int cats = 2 + static_cast<int>(rng.uniform() * 2.0);
    ConditionalCategorical cc;
    cc.parent_cards = {pcats};
    for (int r = 0; r < pcats; ++r) cc.table.push_back(random_simplex(rng, cats));
    Node n;
    n.id = "c0";
    n.kind = NodeKind::Feature;
    n.parents = {"f0"};
    n.dist = std::move(cc);
    dag.nodes.push_back(std::move(n));
  }

  // Model output over every feature, random linear weights.
  Node out;
  out.id = "out";
  out.kind = NodeKind::Model;
  ModelSpec spec;
  spec.arch = LinearSoftmax{};
  spec.n_classes = 2 + static_cast<int>(rng.uniform() * 3.0);
  for (const auto& n : dag.nodes) {
    out.parents.push_back(n.id);
    spec.inputs.push_back({n.id, Encoding::Numeric, 0});
  }
  out.model = spec;
  auto trained = std::make_shared<TrainedModel>();
  trained->spec = spec;
  trained->parameters.resize(spec.parameter_count());
  for (auto& p : trained->parameters) p = 1.5 * (rng.uniform() * 2.0 - 1.0);
  out.trained = trained;
  dag.nodes.push_back(std::move(out));
  dag.output_node = "out";
  return dag;
}

struct ToyWorkbench {
  Dag dag;
  DataTable train_table;
  TrainingData train;
  LabeledData eval;
  Scenario config;
};

ToyWorkbench trained_toy() {
  ToyWorkbench w;
  w.dag = fixtures::toy_network();
  w.train_table = fixtures::toy_data(20000, 7);
  TrainBundleOptions opts;
  opts.seed = 7;
  train_bundle(w.dag, w.train_table, opts);
  w.train = to_training_data(w.dag, w.train_table);
  w.eval = to_labeled_data(w.dag, fixtures::toy_data(10000, 1007));
  w.config.reps = 100;
  w.config.samples = 5000;
  w.config.bins = 20;
  w.config.seed = 42;
  return w;
}

// ---------------------------------------------------------------------------

// Exact enumeration agrees with ancestral sampling on randomized networks,
// and the toy joint sums to one.
Check criterion_1() {
  Check c;
  auto start = std::chrono::steady_clock::now();

  Rng rng(2026);
  for (int net = 0; net < 20; ++net) {
    Dag dag = random_discrete_network(rng);
    auto exact = exact_output_distribution(dag);
    auto batch = ancestral_sample(dag, 100000, 500 + net);
    std::vector<double> freq(exact.probs.size(), 0.0);
    for (double v : batch.column("out")) freq[static_cast<std::size_t>(v)] += 1e-5;
    double l1 = 0.0;
    for (std::size_t k = 0; k < freq.size(); ++k) {
      l1 += std::abs(freq[k] - exact.probs[k]);
    }
    c.require(l1 <= 0.01,
              "network " + std::to_string(net) + " L1 " + std::to_string(l1));
  }

  auto w = trained_toy();
  double total = 0.0;
  for (int x1 = 0; x1 < 2; ++x1)
    for (int x2 = 0; x2 < 3; ++x2)
      for (int x3 = 0; x3 < 3; ++x3)
        for (int m1 = 0; m1 < 3; ++m1)
          for (int m2 = 0; m2 < 2; ++m2)
            for (int y = 0; y < 2; ++y) {
              Assignment a{{"x1", double(x1)}, {"x2", double(x2)},
                           {"x3", double(x3)}, {"m1", double(m1)},
                           {"m2", double(m2)}, {"y", double(y)}};
              total += std::exp(joint_log_prob(w.dag, a));
            }
  c.require(std::abs(total - 1.0) <= 1e-6,
            "toy joint mass " + std::to_string(total));

  double elapsed = seconds_since(start);
  c.require(elapsed < 30.0, "runtime " + std::to_string(elapsed) + "s");
  return c;
}

// Analytic gradients match central finite differences.
Check criterion_2() {
  Check c;
  Rng rng(4242);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 50; ++i) {
    rows.push_back({rng.normal(), rng.normal(), rng.normal()});
    labels.push_back(static_cast<int>(rng.uniform() * 3.0));
  }
  for (ModelSpec spec : {numeric_spec(LinearSoftmax{}, 3, 3),
                         numeric_spec(Mlp{{6}}, 3, 3)}) {
    std::size_t dim = spec.parameter_count();
    for (int point = 0; point < 10; ++point) {
      std::vector<double> params(dim), grad(dim), scratch(dim);
      for (auto& p : params) p = 0.5 * rng.normal();
      loss_and_grad(spec, params, rows, labels, grad);
      const double h = 1e-5;
      double worst = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        std::vector<double> tmp = params;
        tmp[k] = params[k] + h;
        double up = loss_and_grad(spec, tmp, rows, labels, scratch);
        tmp[k] = params[k] - h;
        double down = loss_and_grad(spec, tmp, rows, labels, scratch);
        double numeric = (up - down) / (2.0 * h);
        double scale = std::max({1.0, std::abs(numeric), std::abs(grad[k])});
        worst = std::max(worst, std::abs(grad[k] - numeric) / scale);
      }
      c.require(worst <= 1e-4, "gradient rel err " + std::to_string(worst));
    }
  }
  return c;
}

// Conjugate posterior mean and standard-normal chain variance.
Check criterion_3() {
  Check c;
  auto start = std::chrono::steady_clock::now();

  Dag dag;
  Node x;
  x.id = "x";
  x.kind = NodeKind::Feature;
  x.dist = Categorical{{0.5, 0.5}, {}, false};
  x.prior = PriorSpec{{1.0, 1.0}};
  Node m;
  m.id = "m";
  m.kind = NodeKind::Model;
  m.parents = {"x"};
  ModelSpec spec = numeric_spec(LinearSoftmax{}, 2, 1);
  spec.inputs[0].parent = "x";
  m.model = spec;
  auto trained = std::make_shared<TrainedModel>();
  trained->spec = spec;
  trained->parameters = {-40.0, 40.0, 20.0, -20.0};
  m.trained = trained;
  dag.nodes = {x, m};
  dag.output_node = "m";

  SampleBatch data;
  data.n_rows = 4;
  data.columns["x"] = {0.0, 0.0, 0.0, 1.0};
  auto layout = theta_layout(dag);

  McmcConfig config;
  config.n_samples = 10000;
  config.burn_in = 1000;
  config.proposal_scale = 0.8;
  config.seed = 99;
  auto chain = rwm_sample(
      [&](std::span<const double> theta) {
        return posterior_log_density(dag, data, theta);
      },
      {0.0}, config);
  double mean = 0.0;
  for (const auto& draw : chain.draws) {
    mean += constrain_theta(layout, draw, nullptr)[0][0];
  }
  mean /= static_cast<double>(chain.draws.size());
  c.require(std::abs(mean - 4.0 / 6.0) <= 0.02,
            "posterior mean " + std::to_string(mean));

  McmcConfig normal_config;
  normal_config.n_samples = 50000;
  normal_config.burn_in = 2000;
  normal_config.proposal_scale = 2.0;
  normal_config.seed = 101;
  auto normal_chain = rwm_sample(
      [](std::span<const double> v) { return -0.5 * v[0] * v[0]; }, {0.0},
      normal_config);
  double m1 = 0.0, m2 = 0.0;
  for (const auto& d : normal_chain.draws) {
    m1 += d[0];
    m2 += d[0] * d[0];
  }
  m1 /= static_cast<double>(normal_chain.draws.size());
  m2 /= static_cast<double>(normal_chain.draws.size());
  double variance = m2 - m1 * m1;
  c.require(std::abs(variance - 1.0) <= 0.1,
            "chain variance " + std::to_string(variance));

  double elapsed = seconds_since(start);
  c.require(elapsed < 20.0, "runtime " + std::to_string(elapsed) + "s");
  return c;
}

// Ablating the signal model collapses AUC to chance and blows up the output
// KL; ablating the weak model barely moves AUC.
Check criterion_4() {
  Check c;
  auto w = trained_toy();

  auto strong = ablation_test(w.dag, "m2", w.train, w.eval, w.config);
  c.require(std::abs(strong.scenario_metrics->auc - 0.5) <= 0.03,
            "ablate m2 AUC " + std::to_string(strong.scenario_metrics->auc));
  c.require(std::isinf(strong.kl) || strong.kl > 2.0,
            "ablate m2 KL " + std::to_string(strong.kl));

  auto weak = ablation_test(w.dag, "m1", w.train, w.eval, w.config);
  c.require(std::abs(weak.delta_auc) < 0.05,
            "ablate m1 delta AUC " + std::to_string(weak.delta_auc));
  return c;
}

// Single-feature shifts register, the null shift does not, and the compound
// shift dominates.
Check criterion_5() {
  Check c;
  auto w = trained_toy();

  std::map<std::string, DistSpec> shift_x3{
      {"x3", Categorical{{0.1, 0.2, 0.7}, {}, false}}};
  std::map<std::string, DistSpec> shift_x1{
      {"x1", Categorical{{0.9, 0.1}, {}, false}}};
  std::map<std::string, DistSpec> shift_x2{
      {"x2", Categorical{{0.6, 0.3, 0.1}, {}, false}}};
  std::map<std::string, DistSpec> null_shift{
      {"x3", Categorical{{0.55, 0.3, 0.15}, {}, false}}};
  std::map<std::string, DistSpec> shift_all = shift_x1;
  shift_all.insert(shift_x2.begin(), shift_x2.end());
  shift_all.insert(shift_x3.begin(), shift_x3.end());

  double kl_x3 = feature_shift_test(w.dag, shift_x3, w.config).kl;
  double kl_x1 = feature_shift_test(w.dag, shift_x1, w.config).kl;
  double kl_x2 = feature_shift_test(w.dag, shift_x2, w.config).kl;
  double kl_null = feature_shift_test(w.dag, null_shift, w.config).kl;
  double kl_all = feature_shift_test(w.dag, shift_all, w.config).kl;

  c.require(kl_x3 > 0.02, "x3 shift KL " + std::to_string(kl_x3));
  c.require(kl_x1 > 0.02, "x1 shift KL " + std::to_string(kl_x1));
  c.require(kl_x2 > 0.02, "x2 shift KL " + std::to_string(kl_x2));
  c.require(kl_null <= 0.01, "null shift KL " + std::to_string(kl_null));
  c.require(kl_all > kl_x1 && kl_all > kl_x2 && kl_all > kl_x3,
            "compound KL " + std::to_string(kl_all) + " not maximal");
  return c;
}

// Swapping the linear frequency model for boosted stumps lifts both its own
// accuracy and the end-to-end AUC.
Check criterion_6() {
  Check c;
  // The nonlinear variant marks only the middle x3 category positive, which
  // a numeric-encoded linear model cannot represent but stumps can.
  auto train_table = fixtures::toy_data_nonlinear(20000, 7);
  TrainBundleOptions opts;
  opts.seed = 7;
  // Train y against gold m2 labels. With pipeline training y would learn to
  // anti-use the mis-specified linear m2 and a better m2 could not help it.
  opts.gold_inputs = true;

  Dag linear_dag = fixtures::toy_network();
  train_bundle(linear_dag, train_table, opts);

  Dag stumps_dag = fixtures::toy_network();
  stumps_dag.find("m2")->model->arch = BoostedStumps{150, 0.3};
  train_bundle(stumps_dag, train_table, opts);

  auto eval_table = fixtures::toy_data_nonlinear(10000, 1007);
  auto eval = to_labeled_data(linear_dag, eval_table);

  Scenario config;
  config.reps = 100;
  config.samples = 5000;
  config.bins = 20;
  config.seed = 42;
  auto report = model_swap_test(linear_dag, "m2",
                                stumps_dag.find("m2")->trained, eval, config);
  c.require(report.delta_auc > 0.0,
            "delta AUC " + std::to_string(report.delta_auc));

  // m2 accuracy on gold inputs, linear vs stumps.
  auto m2_accuracy = [&](const TrainedModel& model) {
    const auto& x2 = eval_table.column("x2");
    const auto& x3 = eval_table.column("x3");
    const auto& gold = eval_table.column("m2");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < eval_table.n_rows; ++i) {
      auto x = encode_inputs(model.spec, std::vector<double>{x2[i], x3[i]});
      correct += model.predict_class(x) == static_cast<int>(gold[i]) ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(eval_table.n_rows);
  };
  double linear_acc = m2_accuracy(*linear_dag.find("m2")->trained);
  double stumps_acc = m2_accuracy(*stumps_dag.find("m2")->trained);
  c.require(stumps_acc - linear_acc >= 0.05,
            "m2 accuracy gain " + std::to_string(stumps_acc - linear_acc));
  return c;
}

// Transaction pipeline end to end through the CLI: timing, class balance,
// recall drops and median directions under model ablation.
Check criterion_7() {
  Check c;
  std::string dir = fresh_dir("bnet_accept_txn");
  c.require(run_cmd(g_fixtures + " banksim-synthetic --out " + dir +
                    " --rows 60000 --seed 7") == 0,
            "synthetic generation failed");
  c.require(run_cmd(g_fixtures + " banksim-prepare --in " + dir +
                    "/banksim_synthetic.csv --out " + dir) == 0,
            "feature preparation failed");
  if (!c.ok) return c;

  auto start = std::chrono::steady_clock::now();
  c.require(run_cmd(g_cli + " train --network " + dir + "/network.json --data " +
                    dir + "/features_train.csv --out " + dir +
                    "/bundle --seed 7 --balance-output") == 0,
            "train failed");
  c.require(run_cmd(g_cli + " stress --bundle " + dir + "/bundle --scenario " +
                    dir + "/ablate_m1.json --eval " + dir +
                    "/features_eval.csv --seed 42 --out " + dir +
                    "/rep_m1.json") == 0,
            "m1 ablation stress failed");
  double elapsed = seconds_since(start);
  c.require(elapsed < 300.0, "train+stress took " + std::to_string(elapsed) + "s");
  c.require(run_cmd(g_cli + " stress --bundle " + dir + "/bundle --scenario " +
                    dir + "/ablate_m2.json --eval " + dir +
                    "/features_eval.csv --seed 42 --out " + dir +
                    "/rep_m2.json") == 0,
            "m2 ablation stress failed");
  if (!c.ok) return c;

  // Down-sampling balances the classes exactly.
  auto table = banksim::engineer_features(banksim::generate_synthetic(60000, 7));
  banksim::derive_labels(table);
  auto balanced = banksim::downsample_majority(table.rows, 7);
  std::size_t fraud = 0;
  for (const auto& r : balanced) fraud += static_cast<std::size_t>(r.fraud);
  c.require(fraud * 2 == balanced.size(),
            "balance " + std::to_string(fraud) + "/" +
                std::to_string(balanced.size() - fraud));

  json m1 = load_json(dir + "/rep_m1.json");
  json m2 = load_json(dir + "/rep_m2.json");
  double recall_m1 = m1.at("delta_recall").get<double>();
  double recall_m2 = m2.at("delta_recall").get<double>();
  c.require(recall_m1 <= -0.05, "m1 recall delta " + std::to_string(recall_m1));
  c.require(recall_m2 <= -0.05, "m2 recall delta " + std::to_string(recall_m2));

  double median_m1 = m1.at("median_shift").get<double>();
  double median_m2 = m2.at("median_shift").get<double>();
  c.require(median_m1 > 0.0, "m1 median shift " + std::to_string(median_m1));
  c.require(median_m2 < 0.0, "m2 median shift " + std::to_string(median_m2));
  return c;
}

// Byte-identical reports across reruns and thread counts.
Check criterion_8() {
  Check c;
  std::string dir = fresh_dir("bnet_accept_det");
  c.require(run_cmd(g_fixtures + " toy --out " + dir +
                    " --train-rows 8000 --eval-rows 4000 --seed 7") == 0,
            "fixture generation failed");
  c.require(run_cmd(g_cli + " train --network " + dir + "/network.json --data " +
                    dir + "/train.csv --out " + dir + "/bundle_a --seed 7") == 0,
            "first train failed");
  c.require(run_cmd(g_cli + " train --network " + dir + "/network.json --data " +
                    dir + "/train.csv --out " + dir + "/bundle_b --seed 7") == 0,
            "second train failed");
  if (!c.ok) return c;

  auto file_equal = [](const std::string& a, const std::string& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    return fa && fb && sa.str() == sb.str();
  };
  for (const std::string name :
       {"network.json", "manifest.json", "models/m1.json", "models/m2.json",
        "models/y.json"}) {
    c.require(file_equal(dir + "/bundle_a/" + name, dir + "/bundle_b/" + name),
              "bundle file differs: " + name);
  }

  auto simulate = [&](const std::string& out, int threads) {
    return run_cmd(g_cli + " simulate --bundle " + dir +
                   "/bundle_a --reps 20 --samples 1000 --seed 11 --threads " +
                   std::to_string(threads) + " --out " + dir + "/" + out);
  };
  c.require(simulate("sim_a.json", 1) == 0, "simulate run 1 failed");
  c.require(simulate("sim_b.json", 1) == 0, "simulate run 2 failed");
  c.require(simulate("sim_c.json", 8) == 0, "simulate run 3 failed");
  if (!c.ok) return c;
  c.require(canonical_report(dir + "/sim_a.json") ==
                canonical_report(dir + "/sim_b.json"),
            "simulate rerun differs");
  c.require(canonical_report(dir + "/sim_a.json") ==
                canonical_report(dir + "/sim_c.json"),
            "simulate thread count changes output");
  c.require(file_equal(dir + "/sim_a.hist.csv", dir + "/sim_c.hist.csv"),
            "histogram csv differs across threads");

  auto stress = [&](const std::string& out, int threads) {
    return run_cmd(g_cli + " stress --bundle " + dir + "/bundle_a --scenario " +
                   dir + "/shift_x3.json --eval " + dir +
                   "/eval.csv --seed 42 --threads " + std::to_string(threads) +
                   " --out " + dir + "/" + out);
  };
  c.require(stress("st_a.json", 1) == 0, "stress run 1 failed");
  c.require(stress("st_b.json", 1) == 0, "stress run 2 failed");
  c.require(stress("st_c.json", 8) == 0, "stress run 3 failed");
  if (!c.ok) return c;
  c.require(canonical_report(dir + "/st_a.json") ==
                canonical_report(dir + "/st_b.json"),
            "stress rerun differs");
  c.require(canonical_report(dir + "/st_a.json") ==
                canonical_report(dir + "/st_c.json"),
            "stress thread count changes output");
  return c;
}

// Property suites: KL non-negativity, AUC rank invariance, simplex outputs,
// histogram normalization, transform round-trip.
Check criterion_9() {
  Check c;
  Rng rng(777);

  for (int trial = 0; trial < 1000; ++trial) {
    int dim = 2 + static_cast<int>(rng.uniform() * 9.0);
    auto p = random_simplex(rng, dim);
    auto q = random_simplex(rng, dim);
    double kl = kl_divergence(p, q);
    if (!(kl >= 0.0)) {
      c.require(false, "negative KL " + std::to_string(kl));
      break;
    }
  }

  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> scores(60);
    std::vector<int> labels(60);
    int pos = 0;
    for (std::size_t i = 0; i < 60; ++i) {
      scores[i] = rng.uniform();
      labels[i] = rng.uniform() < 0.5 ? 1 : 0;
      pos += labels[i];
    }
    if (pos == 0 || pos == 60) labels[0] = 1 - labels[0];
    std::vector<double> warped(60);
    for (std::size_t i = 0; i < 60; ++i) warped[i] = std::atan(10.0 * scores[i]);
    if (std::abs(auc(scores, labels) - auc(warped, labels)) > 1e-12) {
      c.require(false, "AUC not rank-invariant");
      break;
    }
  }

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 300; ++i) {
    rows.push_back({rng.normal(), rng.normal()});
    labels.push_back(static_cast<int>(rng.uniform() * 3.0));
  }
  TrainConfig config;
  config.epochs = 30;
  for (auto arch : std::vector<std::variant<LinearSoftmax, Mlp, BoostedStumps>>{
           LinearSoftmax{}, Mlp{{5}}, BoostedStumps{20, 0.3}}) {
    auto model = train(numeric_spec(arch, 3, 2), rows, labels, config);
    bool ok = true;
    for (int trial = 0; trial < 1000 && ok; ++trial) {
      auto probs =
          model.predict_proba(std::vector<double>{rng.normal(), rng.normal()});
      double total = 0.0;
      for (double p : probs) {
        ok = ok && p >= 0.0 && p <= 1.0;
        total += p;
      }
      ok = ok && std::abs(total - 1.0) <= 1e-9;
    }
    c.require(ok, "simplex violation");
  }

  std::vector<double> values(5000);
  for (auto& v : values) v = rng.uniform();
  auto h = histogram(values, 13);
  double freq_total = 0.0;
  std::uint64_t count_total = 0;
  for (double f : h.frequencies()) freq_total += f;
  for (auto n : h.counts) count_total += n;
  c.require(std::abs(freq_total - 1.0) <= 1e-12 && count_total == 5000,
            "histogram not normalized");

  Dag dag;
  Node a;
  a.id = "a";
  a.kind = NodeKind::Feature;
  a.dist = Categorical{{0.5, 0.5}, {}, false};
  a.prior = PriorSpec{{1.0, 1.0}};
  Node b = a;
  b.id = "b";
  b.dist = Categorical{{0.2, 0.3, 0.5}, {}, false};
  b.prior = PriorSpec{{1.0, 1.0, 1.0}};
  Node m;
  m.id = "m";
  m.kind = NodeKind::Model;
  m.parents = {"a", "b"};
  ModelSpec spec = numeric_spec(LinearSoftmax{}, 2, 2);
  spec.inputs[0].parent = "a";
  spec.inputs[1].parent = "b";
  m.model = spec;
  auto trained = std::make_shared<TrainedModel>();
  trained->spec = spec;
  trained->parameters.assign(spec.parameter_count(), 0.1);
  m.trained = trained;
  dag.nodes = {a, b, m};
  dag.output_node = "m";
  auto layout = theta_layout(dag);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    Dag copy = dag;
    std::get<Categorical>(*copy.find("a")->dist).probs = random_simplex(rng, 2);
    std::get<Categorical>(*copy.find("b")->dist).probs = random_simplex(rng, 3);
    auto theta = unconstrain_theta(layout, copy);
    auto back = constrain_theta(layout, theta, nullptr);
    const auto& pa = std::get<Categorical>(*copy.find("a")->dist).probs;
    const auto& pb = std::get<Categorical>(*copy.find("b")->dist).probs;
    for (std::size_t k = 0; k < 2; ++k) worst = std::max(worst, std::abs(back[0][k] - pa[k]));
    for (std::size_t k = 0; k < 3; ++k) worst = std::max(worst, std::abs(back[1][k] - pb[k]));
  }
  c.require(worst <= 1e-12, "transform round-trip err " + std::to_string(worst));
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <cli-binary> <fixtures-binary> [criterion]\n";
    return 2;
  }
  g_cli = argv[1];
  g_fixtures = argv[2];
  int only = argc > 3 ? std::atoi(argv[3]) : 0;

  using Fn = Check (*)();
  const Fn criteria[] = {criterion_1, criterion_2, criterion_3,
                         criterion_4, criterion_5, criterion_6,
                         criterion_7, criterion_8, criterion_9};
  int failures = 0;
  for (int n = 1; n <= 9; ++n) {
    if (only != 0 && only != n) continue;
    Check result;
    try {
      result = criteria[n - 1]();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    std::cout << "criterion " << n << ": " << (result.ok ? "PASS" : "FAIL");
    if (!result.detail.empty()) std::cout << " (" << result.detail << ")";
    std::cout << "\n";
    failures += result.ok ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
