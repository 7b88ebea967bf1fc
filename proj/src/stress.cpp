#include "bnet/stress.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bnet {

namespace {

// Encoded training inputs for one model node drawn from raw data columns;
// model parents contribute their gold-label column when present, otherwise
// the already-trained parent's predicted class.
std::vector<std::vector<double>> model_training_rows(const Dag& /*dag*/,
                                                     const Node& node,
                                                     const TrainingData& data) {
  std::vector<const std::vector<double>*> pcols;
  for (const auto& p : node.parents) pcols.push_back(&data.columns.column(p));
  std::vector<std::vector<double>> rows;
  rows.reserve(data.columns.n_rows);
  std::vector<double> raw(node.parents.size());
  for (std::size_t i = 0; i < data.columns.n_rows; ++i) {
    for (std::size_t k = 0; k < pcols.size(); ++k) raw[k] = (*pcols[k])[i];
    rows.push_back(encode_inputs(*node.model, raw));
  }
  return rows;
}

}  // namespace

Dag apply_scenario(const Dag& dag, const Scenario& s,
                   const TrainingData* train_data) {
  Dag out = dag;
  for (const auto& [id, dist] : s.feature_overrides) {
    Node* n = out.find(id);
    if (!n) throw std::invalid_argument("scenario override: unknown node " + id);
    if (n->kind != NodeKind::Feature) {
      throw std::invalid_argument("scenario override: " + id + " is not a feature node");
    }
    validate_dist(dist);
    int old_cats = n->n_categories();
    if (old_cats > 0 && n_categories(dist) != old_cats) {
      throw std::invalid_argument("scenario override: category count mismatch on " + id);
    }
    n->dist = dist;
  }
  for (const auto& [id, model] : s.model_swaps) {
    Node* n = out.find(id);
    if (!n) throw std::invalid_argument("scenario swap: unknown node " + id);
    if (n->kind != NodeKind::Model) {
      throw std::invalid_argument("scenario swap: " + id + " is not a model node");
    }
    if (model->spec.inputs.size() != n->parents.size()) {
      throw std::invalid_argument("scenario swap: input schema mismatch on " + id);
    }
    for (std::size_t i = 0; i < n->parents.size(); ++i) {
      if (model->spec.inputs[i].parent != n->parents[i]) {
        throw std::invalid_argument("scenario swap: input schema mismatch on " + id);
      }
    }
    n->model = model->spec;
    n->trained = model;
  }
  for (const auto& id : s.ablations) {
    Node* n = out.find(id);
    if (!n) throw std::invalid_argument("scenario ablation: unknown node " + id);
    if (n->kind != NodeKind::Model) {
      throw std::invalid_argument("scenario ablation: " + id + " is not a model node");
    }
    if (!n->trained) {
      throw std::invalid_argument("scenario ablation: untrained model " + id);
    }
    if (!train_data) {
      throw std::invalid_argument("scenario ablation requires training data");
    }
    auto labels_it = train_data->model_labels.find(id);
    if (labels_it == train_data->model_labels.end()) {
      throw std::invalid_argument("scenario ablation: no labels for " + id);
    }
    auto rows = model_training_rows(out, *n, *train_data);
    n->trained = std::make_shared<TrainedModel>(retrain_random_labels(
        *n->trained, rows, labels_it->second, s.seed));
  }
  return out;
}

EvalMetrics evaluate(const Dag& dag, const LabeledData& eval) {
  auto order = topological_order(dag);
  std::map<std::string, std::vector<double>> cols = eval.features.columns;
  std::vector<double> scores;
  std::vector<int> pred;
  for (const auto& id : order) {
    const Node* n = dag.find(id);
    if (n->kind == NodeKind::Feature) {
      if (!cols.count(id)) {
        throw std::invalid_argument("evaluate: eval data missing feature column " + id);
      }
      continue;
    }
    if (!n->trained) throw std::invalid_argument("evaluate: untrained model " + id);
    std::vector<const std::vector<double>*> pcols;
    for (const auto& p : n->parents) {
      auto it = cols.find(p);
      if (it == cols.end()) {
        throw std::invalid_argument("evaluate: missing column " + p);
      }
      pcols.push_back(&it->second);
    }
    std::vector<double> col(eval.features.n_rows);
    const bool is_output = (id == dag.output_node);
    const bool binary = n->n_categories() == 2;
    std::vector<double> raw(n->parents.size());
    for (std::size_t i = 0; i < eval.features.n_rows; ++i) {
      for (std::size_t k = 0; k < pcols.size(); ++k) raw[k] = (*pcols[k])[i];
      auto probs = n->trained->predict_proba(encode_inputs(*n->model, raw));
      int cls = static_cast<int>(std::max_element(probs.begin(), probs.end()) -
                                 probs.begin());
      col[i] = static_cast<double>(cls);
      if (is_output) {
        scores.push_back(binary ? probs[1]
                                : *std::max_element(probs.begin(), probs.end()));
        pred.push_back(cls);
      }
    }
    cols[id] = std::move(col);
  }
  if (scores.size() != eval.labels.size()) {
    throw std::invalid_argument("evaluate: label count mismatch");
  }
  EvalMetrics m;
  m.auc = auc(scores, eval.labels);
  auto cm = classification_metrics(pred, eval.labels, 1);
  m.precision = cm.precision;
  m.recall = cm.recall;
  m.f1 = cm.f1;
  m.median_positive_prob = median(scores);
  return m;
}

StressReport run_stress(const Dag& dag, const Scenario& s,
                        const TrainingData* train_data,
                        const LabeledData* eval, int threads) {
  Dag scenario_dag = apply_scenario(dag, s, train_data);

  StressReport report;
  report.seed = s.seed;
  report.reps = s.reps;
  report.samples = s.samples;
  report.bins = s.bins;
  // Same master seed for both runs: common random numbers.
  report.baseline_sim = run_simulation(dag, s.reps, s.samples, s.bins, s.seed, threads);
  report.scenario_sim =
      run_simulation(scenario_dag, s.reps, s.samples, s.bins, s.seed, threads);
  report.kl = kl_divergence(report.baseline_sim.pooled(), report.scenario_sim.pooled());

  auto hist_median = [](const Histogram& h) {
    // Median of the pooled statistic, linearly interpolated inside the
    // median bin so sub-bin shifts register.
    std::uint64_t total = h.total();
    std::uint64_t acc = 0;
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      if (2 * (acc + h.counts[b]) >= total && h.counts[b] > 0) {
        double need = 0.5 * static_cast<double>(total) - static_cast<double>(acc);
        double lo = h.bin_edges[b];
        double width = h.bin_edges[b + 1] - lo;
        return lo + width * need / static_cast<double>(h.counts[b]);
      }
      acc += h.counts[b];
    }
    return 0.5;
  };
  report.median_shift = hist_median(report.scenario_sim.pooled()) -
                        hist_median(report.baseline_sim.pooled());

  if (eval) {
    report.baseline_metrics = evaluate(dag, *eval);
    report.scenario_metrics = evaluate(scenario_dag, *eval);
    report.delta_auc = report.scenario_metrics->auc - report.baseline_metrics->auc;
    report.delta_recall =
        report.scenario_metrics->recall - report.baseline_metrics->recall;
    report.delta_precision =
        report.scenario_metrics->precision - report.baseline_metrics->precision;
    report.delta_f1 = report.scenario_metrics->f1 - report.baseline_metrics->f1;
  }
  return report;
}

StressReport feature_shift_test(const Dag& dag,
                                const std::map<std::string, DistSpec>& overrides,
                                const Scenario& config, const LabeledData* eval) {
  if (overrides.empty()) {
    throw std::invalid_argument("feature_shift_test: no overrides given");
  }
  Scenario s = config;
  s.feature_overrides = overrides;
  s.model_swaps.clear();
  s.ablations.clear();
  return run_stress(dag, s, nullptr, eval);
}

StressReport model_swap_test(const Dag& dag, const std::string& node,
                             std::shared_ptr<const TrainedModel> replacement,
                             const LabeledData& eval, const Scenario& config) {
  Scenario s = config;
  s.feature_overrides.clear();
  s.ablations.clear();
  s.model_swaps = {{node, std::move(replacement)}};
  return run_stress(dag, s, nullptr, &eval);
}

StressReport ablation_test(const Dag& dag, const std::string& node,
                           const TrainingData& train_data,
                           const LabeledData& eval, const Scenario& config) {
  const Node* n = dag.find(node);
  if (!n || n->kind != NodeKind::Model) {
    throw std::invalid_argument("ablation_test: " + node + " is not a model node");
  }
  Scenario s = config;
  s.feature_overrides.clear();
  s.model_swaps.clear();
  s.ablations = {node};
  return run_stress(dag, s, &train_data, &eval);
}

}  // namespace bnet
