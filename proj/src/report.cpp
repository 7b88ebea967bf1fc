#include "bnet/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "bnet/models.hpp"

namespace bnet {

namespace fs = std::filesystem;

Scenario scenario_from_json(const nlohmann::json& j, const std::string& base_dir) {
  Scenario s;
  if (j.contains("overrides")) {
    for (const auto& [id, dist] : j.at("overrides").items()) {
      s.feature_overrides[id] = dist_from_json(dist);
    }
  }
  if (j.contains("swaps")) {
    for (const auto& [id, path] : j.at("swaps").items()) {
      fs::path p(path.get<std::string>());
      if (p.is_relative()) p = fs::path(base_dir) / p;
      std::ifstream in(p);
      if (!in) throw std::runtime_error("cannot open swap model " + p.string());
      s.model_swaps[id] =
          std::make_shared<TrainedModel>(model_from_json(nlohmann::json::parse(in)));
    }
  }
  if (j.contains("ablate")) {
    s.ablations = j.at("ablate").get<std::vector<std::string>>();
  }
  if (j.contains("reps")) s.reps = j.at("reps").get<std::size_t>();
  if (j.contains("samples")) s.samples = j.at("samples").get<std::size_t>();
  if (j.contains("bins")) s.bins = j.at("bins").get<int>();
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

nlohmann::json histogram_to_json(const Histogram& h) {
  return {{"bin_edges", h.bin_edges}, {"counts", h.counts}};
}

Histogram histogram_from_json(const nlohmann::json& j) {
  Histogram h;
  h.bin_edges = j.at("bin_edges").get<std::vector<double>>();
  h.counts = j.at("counts").get<std::vector<std::uint64_t>>();
  return h;
}

nlohmann::json simulation_to_json(const SimulationResult& sim) {
  nlohmann::json j;
  j["kind"] = "simulation";
  j["seed"] = sim.seed;
  j["reps"] = sim.reps;
  j["samples"] = sim.samples_per_rep;
  j["bins"] = sim.bins;
  j["pooled"] = histogram_to_json(sim.pooled());
  j["mean_class_freqs"] = sim.mean_class_freqs();
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& h : sim.rep_histograms) reps.push_back(h.counts);
  j["rep_counts"] = std::move(reps);
  j["rep_class_freqs"] = sim.rep_class_freqs;
  return j;
}

SimulationResult simulation_from_json(const nlohmann::json& j) {
  SimulationResult sim;
  sim.seed = j.at("seed").get<std::uint64_t>();
  sim.reps = j.at("reps").get<std::size_t>();
  sim.samples_per_rep = j.at("samples").get<std::size_t>();
  sim.bins = j.at("bins").get<int>();
  auto pooled = histogram_from_json(j.at("pooled"));
  for (const auto& counts : j.at("rep_counts")) {
    Histogram h;
    h.bin_edges = pooled.bin_edges;
    h.counts = counts.get<std::vector<std::uint64_t>>();
    sim.rep_histograms.push_back(std::move(h));
  }
  sim.rep_class_freqs =
      j.at("rep_class_freqs").get<std::vector<std::vector<double>>>();
  return sim;
}

namespace {

nlohmann::json kl_to_json(double kl) {
  if (std::isinf(kl)) return "inf";
  return kl;
}

double kl_from_json(const nlohmann::json& j) {
  if (j.is_string()) return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

nlohmann::json metrics_to_json(const EvalMetrics& m) {
  return {{"auc", m.auc},
          {"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"median_positive_prob", m.median_positive_prob}};
}

EvalMetrics metrics_from_json(const nlohmann::json& j) {
  EvalMetrics m;
  m.auc = j.at("auc").get<double>();
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
  m.median_positive_prob = j.at("median_positive_prob").get<double>();
  return m;
}

}  // namespace

nlohmann::json stress_report_to_json(const StressReport& report) {
  nlohmann::json j;
  j["kind"] = "stress";
  j["seed"] = report.seed;
  j["reps"] = report.reps;
  j["samples"] = report.samples;
  j["bins"] = report.bins;
  j["kl"] = kl_to_json(report.kl);
  j["median_shift"] = report.median_shift;
  j["baseline"] = simulation_to_json(report.baseline_sim);
  j["scenario"] = simulation_to_json(report.scenario_sim);
  if (report.baseline_metrics) {
    j["baseline_metrics"] = metrics_to_json(*report.baseline_metrics);
    j["scenario_metrics"] = metrics_to_json(*report.scenario_metrics);
    j["delta_auc"] = report.delta_auc;
    j["delta_recall"] = report.delta_recall;
    j["delta_precision"] = report.delta_precision;
    j["delta_f1"] = report.delta_f1;
  }
  return j;
}

StressReport stress_report_from_json(const nlohmann::json& j) {
  StressReport report;
  report.seed = j.at("seed").get<std::uint64_t>();
  report.reps = j.at("reps").get<std::size_t>();
  report.samples = j.at("samples").get<std::size_t>();
  report.bins = j.at("bins").get<int>();
  report.kl = kl_from_json(j.at("kl"));
  report.median_shift = j.at("median_shift").get<double>();
  report.baseline_sim = simulation_from_json(j.at("baseline"));
  report.scenario_sim = simulation_from_json(j.at("scenario"));
  if (j.contains("baseline_metrics")) {
    report.baseline_metrics = metrics_from_json(j.at("baseline_metrics"));
    report.scenario_metrics = metrics_from_json(j.at("scenario_metrics"));
    report.delta_auc = j.at("delta_auc").get<double>();
    report.delta_recall = j.at("delta_recall").get<double>();
    report.delta_precision = j.at("delta_precision").get<double>();
    report.delta_f1 = j.at("delta_f1").get<double>();
  }
  return report;
}

void write_histogram_csv(const Histogram& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "bin_lo,bin_hi,count,frequency\n";
  auto freqs = h.frequencies();
  char buf[96];
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%llu,%.9g\n", h.bin_edges[b],
                  h.bin_edges[b + 1],
                  static_cast<unsigned long long>(h.counts[b]), freqs[b]);
    out << buf;
  }
}

std::string summarize_report(const nlohmann::json& j) {
  std::ostringstream out;
  const std::string kind = j.value("kind", "");
  if (kind == "simulation") {
    out << "simulation: reps=" << j.at("reps") << " samples=" << j.at("samples")
        << " bins=" << j.at("bins") << " seed=" << j.at("seed") << "\n";
    auto freqs = j.at("mean_class_freqs").get<std::vector<double>>();
    out << "mean output class frequencies:";
    for (double f : freqs) out << " " << f;
    out << "\n";
  } else if (kind == "stress") {
    out << "stress: reps=" << j.at("reps") << " samples=" << j.at("samples")
        << " bins=" << j.at("bins") << " seed=" << j.at("seed") << "\n";
    double kl = kl_from_json(j.at("kl"));
    if (std::isinf(kl)) {
      out << "kl(baseline||scenario) = inf\n";
    } else {
      out << "kl(baseline||scenario) = " << kl << "\n";
    }
    out << "median shift = " << j.at("median_shift").get<double>() << "\n";
    if (j.contains("baseline_metrics")) {
      auto b = metrics_from_json(j.at("baseline_metrics"));
      auto s = metrics_from_json(j.at("scenario_metrics"));
      out << "auc " << b.auc << " -> " << s.auc
          << " (delta " << j.at("delta_auc").get<double>() << ")\n";
      out << "recall " << b.recall << " -> " << s.recall
          << " (delta " << j.at("delta_recall").get<double>() << ")\n";
      out << "precision " << b.precision << " -> " << s.precision
          << " (delta " << j.at("delta_precision").get<double>() << ")\n";
      out << "f1 " << b.f1 << " -> " << s.f1
          << " (delta " << j.at("delta_f1").get<double>() << ")\n";
    }
  } else {
    throw std::runtime_error("unknown report kind");
  }
  return out.str();
}

}  // namespace bnet
