#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "bnet/bundle.hpp"
#include "bnet/fixtures.hpp"
#include "bnet/graph.hpp"
#include "bnet/report.hpp"
#include "bnet/simulate.hpp"
#include "bnet/stress.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

// Exit-code contract: 0 ok, 1 domain error, 2 I/O or usage error.
constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kIoError = 2;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

json make_manifest(const std::string& command, json config, std::uint64_t seed,
                   std::chrono::steady_clock::time_point start) {
  auto elapsed = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  return json{{"command", command},
              {"config", std::move(config)},
              {"seed", seed},
              {"version", kVersion},
              {"duration_seconds", elapsed}};
}

std::string hist_csv_path(const std::string& report_path, const std::string& tag) {
  fs::path p(report_path);
  p.replace_extension();
  return p.string() + "." + tag + ".csv";
}

int cmd_validate(const std::string& network_path) {
  bnet::Dag dag = bnet::dag_from_json(read_json_file(network_path));
  auto result = bnet::validate(dag);
  for (const auto& v : result.violations) {
    std::cout << v.rule << ": " << v.detail << "\n";
  }
  if (!result.ok()) return kDomainError;
  std::cout << "ok\n";
  return kOk;
}

int cmd_train(const std::string& network_path, const std::string& data_path,
              const std::string& out_dir, std::uint64_t seed,
              const std::string& config_path, bool balance_output,
              bool gold_labels) {
  auto start = std::chrono::steady_clock::now();
  bnet::Dag dag = bnet::dag_from_json(read_json_file(network_path));
  auto validation = bnet::validate(dag);
  if (!validation.ok()) {
    for (const auto& v : validation.violations) {
      std::cerr << v.rule << ": " << v.detail << "\n";
    }
    return kDomainError;
  }
  bnet::DataTable data = bnet::read_data_csv(data_path);

  bnet::TrainBundleOptions opts;
  opts.seed = seed;
  opts.balance_output = balance_output;
  opts.gold_inputs = gold_labels;
  json config_echo = json::object();
  if (!config_path.empty()) {
    config_echo = read_json_file(config_path);
    if (config_echo.contains("epochs")) opts.config.epochs = config_echo["epochs"];
    if (config_echo.contains("learning_rate")) {
      opts.config.learning_rate = config_echo["learning_rate"];
    }
    if (config_echo.contains("batch_size")) {
      opts.config.batch_size = config_echo["batch_size"];
    }
    if (config_echo.contains("balance_output")) {
      opts.balance_output = config_echo["balance_output"];
    }
    if (config_echo.contains("gold_inputs")) {
      opts.gold_inputs = config_echo["gold_inputs"];
    }
  }

  auto summary = bnet::train_bundle(dag, data, opts);
  bnet::save_bundle(out_dir, dag, data, seed);

  config_echo["network"] = network_path;
  config_echo["data"] = data_path;
  config_echo["balance_output"] = opts.balance_output;
  config_echo["gold_inputs"] = opts.gold_inputs;
  json manifest = make_manifest("train", config_echo, seed, start);
  write_text_file((fs::path(out_dir) / "run_manifest.json").string(),
                  manifest.dump(2) + "\n");

  for (const auto& [id, acc] : summary.accuracy) {
    std::cout << "trained " << id << ": accuracy " << acc << "\n";
  }
  std::cout << "bundle written to " << out_dir << "\n";
  return kOk;
}

int cmd_simulate(const std::string& bundle_dir, std::size_t reps,
                 std::size_t samples, int bins, std::uint64_t seed,
                 int threads, const std::string& out_path) {
  auto start = std::chrono::steady_clock::now();
  bnet::Bundle bundle = bnet::load_bundle(bundle_dir);
  auto validation = bnet::validate(bundle.dag);
  if (!validation.ok()) {
    std::cerr << "invalid bundle network\n";
    return kDomainError;
  }
  auto sim = bnet::run_simulation(bundle.dag, reps, samples, bins, seed, threads);
  json report = bnet::simulation_to_json(sim);
  report["manifest"] = make_manifest(
      "simulate",
      json{{"bundle", bundle_dir}, {"reps", reps}, {"samples", samples},
           {"bins", bins}},
      seed, start);
  write_text_file(out_path, report.dump(2) + "\n");
  bnet::write_histogram_csv(sim.pooled(), hist_csv_path(out_path, "hist"));
  std::cout << bnet::summarize_report(report);
  return kOk;
}

// apply_scenario error messages name the action and node; translate to the
// scenario file's JSON pointer for the CLI contract.
std::string scenario_pointer(const std::string& message) {
  auto pointer = [&](const std::string& prefix, const char* key) {
    if (message.rfind(prefix, 0) != 0) return std::string();
    std::string rest = message.substr(prefix.size());
    auto colon = rest.find(':');
    std::string node = colon == std::string::npos ? rest : rest.substr(0, colon);
    auto space = node.find_last_of(' ');
    if (space != std::string::npos) node = node.substr(space + 1);
    return std::string("/") + key + "/" + node;
  };
  for (const auto& [prefix, key] :
       {std::pair<std::string, const char*>{"scenario override: ", "overrides"},
        {"scenario swap: ", "swaps"},
        {"scenario ablation: ", "ablate"},
        {"scenario ablation requires", "ablate"}}) {
    auto p = pointer(prefix, key);
    if (!p.empty()) return p;
  }
  return "";
}

int cmd_stress(const std::string& bundle_dir, const std::string& scenario_path,
               const std::string& eval_path, std::uint64_t seed, int threads,
               double kl_smoothing, const std::string& out_path) {
  auto start = std::chrono::steady_clock::now();
  bnet::Bundle bundle = bnet::load_bundle(bundle_dir);
  json scenario_json = read_json_file(scenario_path);
  bnet::Scenario scenario = bnet::scenario_from_json(
      scenario_json, fs::path(scenario_path).parent_path().string());
  scenario.seed = seed;
  if (scenario.empty()) {
    std::cerr << "scenario has no actions\n";
    return kDomainError;
  }

  bnet::TrainingData training = bnet::to_training_data(bundle.dag, bundle.training_data);
  std::optional<bnet::LabeledData> eval;
  if (!eval_path.empty()) {
    eval = bnet::to_labeled_data(bundle.dag, bnet::read_data_csv(eval_path));
  }

  bnet::StressReport result;
  try {
    result = bnet::run_stress(bundle.dag, scenario, &training,
                              eval ? &*eval : nullptr, threads);
  } catch (const std::invalid_argument& e) {
    std::string pointer = scenario_pointer(e.what());
    if (!pointer.empty()) {
      std::cerr << "at " << pointer << ": " << e.what() << "\n";
      return kDomainError;
    }
    throw;
  }

  if (kl_smoothing > 0.0) {
    // Laplace smoothing for users who want finite KL values.
    auto smooth = [&](const bnet::Histogram& h) {
      std::vector<double> f(h.counts.size());
      double total = static_cast<double>(h.total()) +
                     kl_smoothing * static_cast<double>(h.counts.size());
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        f[b] = (static_cast<double>(h.counts[b]) + kl_smoothing) / total;
      }
      return f;
    };
    auto p = smooth(result.baseline_sim.pooled());
    auto q = smooth(result.scenario_sim.pooled());
    result.kl = bnet::kl_divergence(p, q);
  }

  json report = bnet::stress_report_to_json(result);
  scenario_json["file"] = scenario_path;
  report["manifest"] = make_manifest(
      "stress",
      json{{"bundle", bundle_dir}, {"scenario", scenario_json},
           {"eval", eval_path}, {"kl_smoothing", kl_smoothing}},
      seed, start);
  write_text_file(out_path, report.dump(2) + "\n");
  bnet::write_histogram_csv(result.baseline_sim.pooled(),
                            hist_csv_path(out_path, "baseline"));
  bnet::write_histogram_csv(result.scenario_sim.pooled(),
                            hist_csv_path(out_path, "scenario"));
  std::cout << bnet::summarize_report(report);
  return kOk;
}

std::string format_number(double v) {
  if (std::isinf(v)) return "inf";
  std::ostringstream out;
  out << v;
  return out.str();
}

int cmd_report(const std::string& in_path, const std::string& format) {
  json report = read_json_file(in_path);
  const std::string kind = report.value("kind", "");
  const std::string sep = format == "csv" ? "," : " | ";

  if (kind == "stress") {
    double kl = report.at("kl").is_string()
                    ? std::numeric_limits<double>::infinity()
                    : report.at("kl").get<double>();
    double delta_auc = report.value("delta_auc", 0.0);
    double delta_recall = report.value("delta_recall", 0.0);
    double median_shift = report.at("median_shift").get<double>();
    std::string name = "scenario";
    if (report.contains("manifest")) {
      const auto& scenario = report["manifest"]["config"]["scenario"];
      if (scenario.contains("file")) name = scenario["file"].get<std::string>();
    }
    if (format == "md") {
      std::cout << "| scenario | kl | delta_auc | delta_recall | median_shift |\n";
      std::cout << "| --- | --- | --- | --- | --- |\n";
      std::cout << "| " << name << " | " << format_number(kl) << " | "
                << format_number(delta_auc) << " | " << format_number(delta_recall)
                << " | " << format_number(median_shift) << " |\n";
    } else {
      std::cout << "scenario,kl,delta_auc,delta_recall,median_shift\n";
      std::cout << name << "," << format_number(kl) << ","
                << format_number(delta_auc) << "," << format_number(delta_recall)
                << "," << format_number(median_shift) << "\n";
    }
    return kOk;
  }
  if (kind == "simulation") {
    auto freqs = report.at("rep_class_freqs").get<std::vector<std::vector<double>>>();
    if (format == "md") {
      std::cout << "| rep | class frequencies |\n| --- | --- |\n";
      for (std::size_t r = 0; r < freqs.size(); ++r) {
        std::cout << "| " << r << " |";
        for (double f : freqs[r]) std::cout << " " << f;
        std::cout << " |\n";
      }
    } else {
      std::cout << "rep";
      if (!freqs.empty()) {
        for (std::size_t c = 0; c < freqs[0].size(); ++c) std::cout << ",class" << c;
      }
      std::cout << "\n";
      for (std::size_t r = 0; r < freqs.size(); ++r) {
        std::cout << r;
        for (double f : freqs[r]) std::cout << "," << f;
        std::cout << "\n";
      }
    }
    return kOk;
  }
  std::cerr << "unknown report kind\n";
  return kDomainError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classifier-hierarchy network simulation and stress testing"};
  app.require_subcommand(1);

  std::string network_path, data_path, out_dir, config_path;
  std::string bundle_dir, scenario_path, eval_path, out_path, in_path;
  std::string format = "md";
  std::uint64_t seed = 0;
  std::size_t reps = 100, samples = 5000;
  int bins = 20, threads = 1;
  double kl_smoothing = 0.0;
  bool balance_output = false, gold_labels = false;

  auto* validate_cmd = app.add_subcommand("validate", "Check a network file");
  validate_cmd->add_option("--network", network_path)->required();

  auto* train_cmd = app.add_subcommand("train", "Fit features and train models");
  train_cmd->add_option("--network", network_path)->required();
  train_cmd->add_option("--data", data_path)->required();
  train_cmd->add_option("--out", out_dir)->required();
  train_cmd->add_option("--seed", seed)->required();
  train_cmd->add_option("--config", config_path);
  train_cmd->add_flag("--balance-output", balance_output);
  train_cmd->add_flag("--gold-labels", gold_labels);

  auto* simulate_cmd = app.add_subcommand("simulate", "Replicated forward sampling");
  simulate_cmd->add_option("--bundle", bundle_dir)->required();
  simulate_cmd->add_option("--reps", reps);
  simulate_cmd->add_option("--samples", samples);
  simulate_cmd->add_option("--bins", bins);
  simulate_cmd->add_option("--seed", seed)->required();
  simulate_cmd->add_option("--threads", threads);
  simulate_cmd->add_option("--out", out_path)->required();

  auto* stress_cmd = app.add_subcommand("stress", "Baseline-vs-scenario comparison");
  stress_cmd->add_option("--bundle", bundle_dir)->required();
  stress_cmd->add_option("--scenario", scenario_path)->required();
  stress_cmd->add_option("--eval", eval_path);
  stress_cmd->add_option("--seed", seed)->required();
  stress_cmd->add_option("--threads", threads);
  stress_cmd->add_option("--kl-smoothing", kl_smoothing);
  stress_cmd->add_option("--out", out_path)->required();

  auto* report_cmd = app.add_subcommand("report", "Render a report file");
  report_cmd->add_option("--in", in_path)->required();
  report_cmd->add_option("--format", format)->check(CLI::IsMember({"md", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kIoError;
  }

  try {
    if (app.got_subcommand(validate_cmd)) return cmd_validate(network_path);
    if (app.got_subcommand(train_cmd)) {
      return cmd_train(network_path, data_path, out_dir, seed, config_path,
                       balance_output, gold_labels);
    }
    if (app.got_subcommand(simulate_cmd)) {
      return cmd_simulate(bundle_dir, reps, samples, bins, seed, threads, out_path);
    }
    if (app.got_subcommand(stress_cmd)) {
      return cmd_stress(bundle_dir, scenario_path, eval_path, seed, threads,
                        kl_smoothing, out_path);
    }
    if (app.got_subcommand(report_cmd)) return cmd_report(in_path, format);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomainError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kIoError;
}
