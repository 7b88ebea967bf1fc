#include "bnet/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace bnet {

const std::vector<double>& SampleBatch::column(const std::string& id) const {
  auto it = columns.find(id);
  if (it == columns.end()) {
    throw std::invalid_argument("sample batch: missing column " + id);
  }
  return it->second;
}

Histogram SimulationResult::pooled() const {
  Histogram h;
  if (rep_histograms.empty()) return h;
  h = rep_histograms.front();
  for (std::size_t r = 1; r < rep_histograms.size(); ++r) {
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      h.counts[b] += rep_histograms[r].counts[b];
    }
  }
  return h;
}

std::vector<double> SimulationResult::mean_class_freqs() const {
  if (rep_class_freqs.empty()) return {};
  std::vector<double> mean(rep_class_freqs.front().size(), 0.0);
  for (const auto& f : rep_class_freqs) {
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += f[k];
  }
  for (double& m : mean) m /= static_cast<double>(rep_class_freqs.size());
  return mean;
}

Histogram histogram(std::span<const double> values, int bins) {
  if (bins < 1) throw std::invalid_argument("histogram: bins must be >= 1");
  Histogram h;
  h.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) {
    h.bin_edges[static_cast<std::size_t>(b)] = static_cast<double>(b) / bins;
  }
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("histogram: value outside [0,1]");
    }
    int b = std::min(static_cast<int>(v * bins), bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

SampleBatch ancestral_sample(const Dag& dag, std::size_t n,
                             std::uint64_t seed) {
  auto order = topological_order(dag);
  SampleBatch batch;
  batch.n_rows = n;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const Node* node = dag.find(order[pos]);
    Rng rng(child_seed(seed, pos));
    if (node->kind == NodeKind::Feature) {
      if (std::holds_alternative<ConditionalCategorical>(*node->dist)) {
        std::vector<const std::vector<double>*> pcols;
        for (const auto& p : node->parents) pcols.push_back(&batch.column(p));
        std::vector<double> col(n);
        std::vector<int> config(node->parents.size());
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t k = 0; k < pcols.size(); ++k) {
            config[k] = static_cast<int>((*pcols[k])[i]);
          }
          col[i] = sample_conditional(*node->dist, config, rng);
        }
        batch.columns[node->id] = std::move(col);
      } else {
        batch.columns[node->id] = sample(*node->dist, rng, n);
      }
    } else {
      if (!node->trained) {
        throw std::invalid_argument("ancestral_sample: untrained model node " + node->id);
      }
      std::vector<const std::vector<double>*> pcols;
      for (const auto& p : node->parents) pcols.push_back(&batch.column(p));
      std::vector<double> col(n);
      std::vector<std::vector<double>> probs(n);
      std::vector<double> raw(node->parents.size());
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < pcols.size(); ++k) raw[k] = (*pcols[k])[i];
        auto x = encode_inputs(*node->model, raw);
        probs[i] = node->trained->predict_proba(x);
        col[i] = static_cast<double>(rng.categorical(probs[i]));
      }
      batch.columns[node->id] = std::move(col);
      batch.model_probs[node->id] = std::move(probs);
    }
  }
  return batch;
}

std::vector<double> output_statistic(const Dag& dag, const SampleBatch& batch) {
  auto it = batch.model_probs.find(dag.output_node);
  if (it == batch.model_probs.end()) {
    throw std::invalid_argument("output_statistic: no model probabilities for " +
                                dag.output_node);
  }
  const Node* out = dag.find(dag.output_node);
  const bool binary = out->n_categories() == 2;
  std::vector<double> stat;
  stat.reserve(batch.n_rows);
  for (const auto& p : it->second) {
    stat.push_back(binary ? p[1] : *std::max_element(p.begin(), p.end()));
  }
  return stat;
}

SimulationResult run_simulation(const Dag& dag, std::size_t reps,
                                std::size_t n, int bins, std::uint64_t seed,
                                int threads) {
  if (reps < 1) throw std::invalid_argument("run_simulation: reps must be >= 1");
  SimulationResult result;
  result.seed = seed;
  result.reps = reps;
  result.samples_per_rep = n;
  result.bins = bins;
  result.rep_histograms.resize(reps);
  result.rep_class_freqs.resize(reps);

  const Node* out = dag.find(dag.output_node);
  const int n_classes = out ? out->n_categories() : 0;

  auto run_rep = [&](std::size_t r) {
    SampleBatch batch = ancestral_sample(dag, n, child_seed(seed, r));
    auto stat = output_statistic(dag, batch);
    result.rep_histograms[r] = histogram(stat, bins);
    std::vector<double> freq(static_cast<std::size_t>(n_classes), 0.0);
    for (double v : batch.column(dag.output_node)) {
      freq[static_cast<std::size_t>(v)] += 1.0;
    }
    for (double& f : freq) f /= static_cast<double>(n);
    result.rep_class_freqs[r] = std::move(freq);
  };

  if (threads <= 1 || reps == 1) {
    for (std::size_t r = 0; r < reps; ++r) run_rep(r);
  } else {
    std::vector<std::thread> pool;
    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), reps);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t r = w; r < reps; r += workers) run_rep(r);
      });
    }
    for (auto& t : pool) t.join();
  }
  return result;
}

}  // namespace bnet
