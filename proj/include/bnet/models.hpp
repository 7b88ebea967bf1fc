#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace bnet {

enum class Encoding { Numeric, OneHot };

// One model input slot; order follows the owning node's parents list.
struct InputField {
  std::string parent;
  Encoding encoding = Encoding::Numeric;
  int cardinality = 0;  // categories, required for one-hot
};

struct LinearSoftmax {};

struct Mlp {
  std::vector<int> hidden;  // ReLU layers
};

struct BoostedStumps {
  int rounds = 100;
  double learning_rate = 0.3;
};

struct ModelSpec {
  std::variant<LinearSoftmax, Mlp, BoostedStumps> arch;
  int n_classes = 2;
  std::vector<InputField> inputs;

  int input_dim() const;
  std::size_t parameter_count() const;
};

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 0.0;  // 0 picks the architecture default
  std::uint64_t seed = 0;
  int batch_size = 0;  // 0: full batch below 10k rows, else 256
};

struct TrainingMeta {
  int epochs = 0;
  double final_loss = 0.0;
  std::uint64_t seed = 0;
};

struct TrainedModel {
  ModelSpec spec;
  std::vector<double> parameters;
  TrainingMeta meta;

  // Per-class probabilities for one encoded input row. Always a simplex.
  std::vector<double> predict_proba(std::span<const double> x) const;
  int predict_class(std::span<const double> x) const;
};

// Encodes raw parent values (class indices or reals, in parents order) into
// the model's flat input row.
std::vector<double> encode_inputs(const ModelSpec& spec,
                                  std::span<const double> raw);

// Mini-batch gradient-descent fit of the cross-entropy loss (stumps use
// stagewise boosting instead). Deterministic for a given seed.
TrainedModel train(const ModelSpec& spec,
                   const std::vector<std::vector<double>>& rows,
                   const std::vector<int>& labels, const TrainConfig& config);

// Permutes the labels uniformly with `seed` and retrains the same
// architecture; class marginals are preserved exactly.
TrainedModel retrain_random_labels(const TrainedModel& model,
                                   const std::vector<std::vector<double>>& rows,
                                   const std::vector<int>& labels,
                                   std::uint64_t seed);

// Mean cross-entropy and its parameter gradient for gradient-descent
// architectures. Exposed so finite-difference checks can probe it.
double loss_and_grad(const ModelSpec& spec, std::span<const double> params,
                     const std::vector<std::vector<double>>& rows,
                     const std::vector<int>& labels, std::span<double> grad);

nlohmann::json model_spec_to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);

// Bundle serialization; parameters round-trip exactly (binary64 hex floats).
nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

}  // namespace bnet
