#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bnet/graph.hpp"
#include "bnet/metrics.hpp"
#include "bnet/simulate.hpp"

namespace bnet {

// Labeled evaluation set for metric deltas: raw feature columns plus gold
// output labels.
struct LabeledData {
  SampleBatch features;
  std::vector<int> labels;
};

struct Scenario {
  std::map<std::string, DistSpec> feature_overrides;
  std::map<std::string, std::shared_ptr<const TrainedModel>> model_swaps;
  std::vector<std::string> ablations;
  std::size_t reps = 100;
  std::size_t samples = 5000;
  int bins = 20;
  std::uint64_t seed = 0;

  bool empty() const {
    return feature_overrides.empty() && model_swaps.empty() && ablations.empty();
  }
};

// Training material for ablation retraining: feature columns plus gold
// labels for every model node (column named after the node).
struct TrainingData {
  SampleBatch columns;
  std::map<std::string, std::vector<int>> model_labels;
};

struct EvalMetrics {
  double auc = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double median_positive_prob = 0.0;
};

struct StressReport {
  SimulationResult baseline_sim;
  SimulationResult scenario_sim;
  std::optional<EvalMetrics> baseline_metrics;
  std::optional<EvalMetrics> scenario_metrics;
  double kl = 0.0;  // KL(baseline || scenario), pooled histograms; may be inf
  double delta_auc = 0.0;
  double delta_recall = 0.0;
  double delta_precision = 0.0;
  double delta_f1 = 0.0;
  double median_shift = 0.0;  // scenario - baseline median of simulated output
  std::uint64_t seed = 0;
  std::size_t reps = 0;
  std::size_t samples = 0;
  int bins = 0;
};

// New dag with overrides substituted, swaps installed, and ablated models
// retrained on permuted labels. The input dag is untouched.
Dag apply_scenario(const Dag& dag, const Scenario& s,
                   const TrainingData* train_data);

// Deterministic pipeline evaluation on labeled rows: lower models feed their
// predicted class upward, the output node's positive-class probability is the
// score.
EvalMetrics evaluate(const Dag& dag, const LabeledData& eval);

// Baseline vs scenario with common random numbers; pooled-histogram KL plus
// metric deltas when an eval set is provided.
StressReport run_stress(const Dag& dag, const Scenario& s,
                        const TrainingData* train_data,
                        const LabeledData* eval, int threads = 1);

StressReport feature_shift_test(const Dag& dag,
                                const std::map<std::string, DistSpec>& overrides,
                                const Scenario& config,
                                const LabeledData* eval = nullptr);

StressReport model_swap_test(const Dag& dag, const std::string& node,
                             std::shared_ptr<const TrainedModel> replacement,
                             const LabeledData& eval, const Scenario& config);

StressReport ablation_test(const Dag& dag, const std::string& node,
                           const TrainingData& train_data,
                           const LabeledData& eval, const Scenario& config);

}  // namespace bnet
