#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bnet/graph.hpp"
#include "bnet/stress.hpp"

namespace bnet {

// Column-per-node table read from a training/eval CSV. Discrete values are
// class indices stored as doubles; model columns hold gold labels.
struct DataTable {
  std::size_t n_rows = 0;
  std::map<std::string, std::vector<double>> columns;

  const std::vector<double>& column(const std::string& id) const;
};

DataTable read_data_csv(const std::string& path);
void write_data_csv(const DataTable& table, const std::string& path);

struct TrainBundleOptions {
  std::uint64_t seed = 1;
  // Downsample the output model's majority class to the minority count.
  bool balance_output = false;
  // Feed gold lower-model labels upward instead of predicted classes.
  bool gold_inputs = false;
  TrainConfig config;
};

struct TrainSummary {
  // Training-set accuracy per model node.
  std::map<std::string, double> accuracy;
};

// Refits every feature distribution from its data column (family taken from
// the declared DistSpec) and trains the models bottom-up: lower models are
// trained first on gold labels, and their predicted classes feed the rows of
// the models above them.
TrainSummary train_bundle(Dag& dag, const DataTable& data,
                          const TrainBundleOptions& opts);

// TrainingData / LabeledData views over a table for the stress module.
TrainingData to_training_data(const Dag& dag, const DataTable& data);
LabeledData to_labeled_data(const Dag& dag, const DataTable& data);

// On-disk layout: network.json, models/<id>.json, manifest.json (version,
// seed, content fingerprint) and a copy of the training table for ablation
// retraining.
void save_bundle(const std::string& dir, const Dag& dag,
                 const DataTable& training_data, std::uint64_t seed);

struct Bundle {
  Dag dag;
  DataTable training_data;
  std::uint64_t seed = 0;
  std::string fingerprint;
};

Bundle load_bundle(const std::string& dir);

}  // namespace bnet
