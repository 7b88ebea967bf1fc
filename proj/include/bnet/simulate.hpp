#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bnet/graph.hpp"

namespace bnet {

// Columnar table of node values, one column per node. Discrete values are
// class indices stored as doubles. Model columns additionally keep the
// per-row output simplex the class was drawn from.
struct SampleBatch {
  std::size_t n_rows = 0;
  std::map<std::string, std::vector<double>> columns;
  std::map<std::string, std::vector<std::vector<double>>> model_probs;

  const std::vector<double>& column(const std::string& id) const;
};

struct SimulationResult {
  std::uint64_t seed = 0;
  std::size_t reps = 0;
  std::size_t samples_per_rep = 0;
  int bins = 0;
  std::vector<Histogram> rep_histograms;
  std::vector<std::vector<double>> rep_class_freqs;

  // All reps merged into one histogram (identical bin edges by construction).
  Histogram pooled() const;
  std::vector<double> mean_class_freqs() const;
};

// Uniform bins on [0,1], half-open [lo,hi) with the last bin closed.
Histogram histogram(std::span<const double> values, int bins);

// Forward sampling in topological order. Each node owns a child stream
// derived from (seed, topo position), so overriding one node's distribution
// leaves every other column's randomness untouched (common random numbers).
SampleBatch ancestral_sample(const Dag& dag, std::size_t n, std::uint64_t seed);

// Replicated simulation; rep r runs ancestral_sample with child_seed(seed, r)
// and histograms the output node's positive-class probability (max-class
// probability for multi-class outputs). Deterministic for any thread count.
SimulationResult run_simulation(const Dag& dag, std::size_t reps,
                                std::size_t n, int bins, std::uint64_t seed,
                                int threads = 1);

// The histogrammed statistic for one batch: output positive-class (or
// max-class) probability per row.
std::vector<double> output_statistic(const Dag& dag, const SampleBatch& batch);

}  // namespace bnet
