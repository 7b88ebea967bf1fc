#include "bnet/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "bnet/rng.hpp"

namespace bnet {

namespace {

void softmax_inplace(std::vector<double>& logits) {
  double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : logits) v /= sum;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// MLP layer dims including input and output.
std::vector<int> layer_dims(const ModelSpec& spec) {
  std::vector<int> dims{spec.input_dim()};
  if (const auto* mlp = std::get_if<Mlp>(&spec.arch)) {
    for (int h : mlp->hidden) dims.push_back(h);
  }
  dims.push_back(spec.n_classes);
  return dims;
}

std::size_t dense_param_count(const std::vector<int>& dims) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    n += static_cast<std::size_t>(dims[l + 1]) * (dims[l] + 1);
  }
  return n;
}

// Stump ensembles: one for binary, one-vs-rest otherwise.
int ensemble_count(const ModelSpec& spec) {
  return spec.n_classes == 2 ? 1 : spec.n_classes;
}

constexpr int kStumpFields = 4;  // feature, threshold, left, right

void check_row(const ModelSpec& spec, std::span<const double> x) {
  if (static_cast<int>(x.size()) != spec.input_dim()) {
    throw std::invalid_argument("predict: input arity mismatch");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("predict: non-finite input");
  }
}

double stump_score(std::span<const double> params, int rounds, int ensemble,
                   std::span<const double> x) {
  std::size_t base = static_cast<std::size_t>(ensemble) * (1 + rounds * kStumpFields);
  double f = params[base];
  for (int r = 0; r < rounds; ++r) {
    std::size_t o = base + 1 + static_cast<std::size_t>(r) * kStumpFields;
    int feat = static_cast<int>(params[o]);
    double thresh = params[o + 1];
    f += x[static_cast<std::size_t>(feat)] <= thresh ? params[o + 2] : params[o + 3];
  }
  return f;
}

// Forward pass storing activations per layer; returns class probabilities.
std::vector<double> dense_forward(const std::vector<int>& dims,
                                  std::span<const double> params,
                                  std::span<const double> x,
                                  std::vector<std::vector<double>>* acts) {
  std::vector<double> cur(x.begin(), x.end());
  if (acts) acts->push_back(cur);
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    int in = dims[l], out = dims[l + 1];
    std::vector<double> next(static_cast<std::size_t>(out));
    for (int o = 0; o < out; ++o) {
      double z = params[off + static_cast<std::size_t>(out) * in + o];  // bias
      const double* w = params.data() + off + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) z += w[i] * cur[static_cast<std::size_t>(i)];
      next[static_cast<std::size_t>(o)] = z;
    }
    off += static_cast<std::size_t>(out) * (in + 1);
    bool last = (l + 2 == dims.size());
    if (!last) {
      for (double& v : next) v = std::max(v, 0.0);  // ReLU
    }
    cur = std::move(next);
    if (acts && !last) acts->push_back(cur);
  }
  softmax_inplace(cur);
  return cur;
}

std::vector<double> init_params(const ModelSpec& spec, std::uint64_t seed) {
  std::vector<double> params(spec.parameter_count(), 0.0);
  if (std::holds_alternative<Mlp>(spec.arch)) {
    Rng rng(mix64(seed ^ 0x5eedu));
    auto dims = layer_dims(spec);
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      int in = dims[l], out = dims[l + 1];
      double scale = std::sqrt(2.0 / in);
      for (int i = 0; i < out * in; ++i) params[off + static_cast<std::size_t>(i)] = scale * rng.normal();
      off += static_cast<std::size_t>(out) * (in + 1);  // biases stay zero
    }
  }
  return params;
}

TrainedModel train_stumps(const ModelSpec& spec, const BoostedStumps& cfg,
                          const std::vector<std::vector<double>>& rows,
                          const std::vector<int>& labels,
                          const TrainConfig& config) {
  const std::size_t n = rows.size();
  const int dim = spec.input_dim();
  const int ensembles = ensemble_count(spec);

  // Candidate thresholds per feature: up to 32 quantile midpoints.
  std::vector<std::vector<double>> thresholds(static_cast<std::size_t>(dim));
  for (int j = 0; j < dim; ++j) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = rows[i][static_cast<std::size_t>(j)];
    std::sort(col.begin(), col.end());
    col.erase(std::unique(col.begin(), col.end()), col.end());
    auto& th = thresholds[static_cast<std::size_t>(j)];
    if (col.size() < 2) continue;
    std::size_t max_cuts = std::min<std::size_t>(col.size() - 1, 32);
    for (std::size_t c = 1; c <= max_cuts; ++c) {
      std::size_t k = c * (col.size() - 1) / max_cuts;
      if (k == 0) k = 1;
      th.push_back(0.5 * (col[k - 1] + col[k]));
    }
    std::sort(th.begin(), th.end());
    th.erase(std::unique(th.begin(), th.end()), th.end());
  }

  std::vector<double> params(spec.parameter_count(), 0.0);
  double final_loss = 0.0;
  for (int e = 0; e < ensembles; ++e) {
    std::vector<int> y(n);
    std::size_t pos = 0;
    int target = ensembles == 1 ? 1 : e;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = labels[i] == target ? 1 : 0;
      pos += static_cast<std::size_t>(y[i]);
    }
    double p0 = std::clamp(static_cast<double>(pos) / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
    std::size_t base = static_cast<std::size_t>(e) * (1 + cfg.rounds * kStumpFields);
    params[base] = std::log(p0 / (1.0 - p0));

    std::vector<double> f(n, params[base]);
    for (int r = 0; r < cfg.rounds; ++r) {
      std::vector<double> g(n), h(n);
      for (std::size_t i = 0; i < n; ++i) {
        double p = sigmoid(f[i]);
        g[i] = y[i] - p;
        h[i] = std::max(p * (1.0 - p), 1e-12);
      }
      double g_all = std::accumulate(g.begin(), g.end(), 0.0);
      double h_all = std::accumulate(h.begin(), h.end(), 0.0);
      const double lambda = 1.0;
      int best_feat = -1;
      double best_thresh = 0.0, best_gain = 1e-12, best_left = 0.0, best_right = 0.0;
      for (int j = 0; j < dim; ++j) {
        for (double t : thresholds[static_cast<std::size_t>(j)]) {
          double gl = 0.0, hl = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            if (rows[i][static_cast<std::size_t>(j)] <= t) {
              gl += g[i];
              hl += h[i];
            }
          }
          double gr = g_all - gl, hr = h_all - hl;
          double gain = gl * gl / (hl + lambda) + gr * gr / (hr + lambda) -
                        g_all * g_all / (h_all + lambda);
          if (gain > best_gain) {
            best_gain = gain;
            best_feat = j;
            best_thresh = t;
            best_left = gl / (hl + lambda);
            best_right = gr / (hr + lambda);
          }
        }
      }
      std::size_t o = base + 1 + static_cast<std::size_t>(r) * kStumpFields;
      if (best_feat < 0) {
        // No split improves; remaining rounds are no-ops.
        params[o] = 0.0;
        params[o + 1] = -std::numeric_limits<double>::infinity();
        params[o + 2] = 0.0;
        params[o + 3] = 0.0;
        continue;
      }
      params[o] = static_cast<double>(best_feat);
      params[o + 1] = best_thresh;
      params[o + 2] = cfg.learning_rate * best_left;
      params[o + 3] = cfg.learning_rate * best_right;
      for (std::size_t i = 0; i < n; ++i) {
        f[i] += rows[i][static_cast<std::size_t>(best_feat)] <= best_thresh
                    ? params[o + 2]
                    : params[o + 3];
      }
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double p = std::clamp(sigmoid(f[i]), 1e-12, 1.0 - 1e-12);
      loss -= y[i] ? std::log(p) : std::log(1.0 - p);
    }
    final_loss += loss / static_cast<double>(n);
  }
  return TrainedModel{spec, std::move(params),
                      TrainingMeta{cfg.rounds, final_loss, config.seed}};
}

}  // namespace

int ModelSpec::input_dim() const {
  int d = 0;
  for (const auto& in : inputs) {
    if (in.encoding == Encoding::OneHot) {
      if (in.cardinality < 2) {
        throw std::invalid_argument("one-hot input needs cardinality >= 2");
      }
      d += in.cardinality;
    } else {
      d += 1;
    }
  }
  return d;
}

std::size_t ModelSpec::parameter_count() const {
  if (const auto* bs = std::get_if<BoostedStumps>(&arch)) {
    return static_cast<std::size_t>(ensemble_count(*this)) *
           (1 + static_cast<std::size_t>(bs->rounds) * kStumpFields);
  }
  return dense_param_count(layer_dims(*this));
}

std::vector<double> encode_inputs(const ModelSpec& spec,
                                  std::span<const double> raw) {
  if (raw.size() != spec.inputs.size()) {
    throw std::invalid_argument("encode_inputs: arity mismatch");
  }
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(spec.input_dim()));
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& in = spec.inputs[i];
    if (in.encoding == Encoding::OneHot) {
      int k = static_cast<int>(raw[i]);
      if (static_cast<double>(k) != raw[i] || k < 0 || k >= in.cardinality) {
        throw std::invalid_argument("encode_inputs: class index out of range for " + in.parent);
      }
      for (int c = 0; c < in.cardinality; ++c) x.push_back(c == k ? 1.0 : 0.0);
    } else {
      x.push_back(raw[i]);
    }
  }
  return x;
}

std::vector<double> TrainedModel::predict_proba(std::span<const double> x) const {
  check_row(spec, x);
  if (const auto* bs = std::get_if<BoostedStumps>(&spec.arch)) {
    if (spec.n_classes == 2) {
      double p1 = sigmoid(stump_score(parameters, bs->rounds, 0, x));
      return {1.0 - p1, p1};
    }
    std::vector<double> p(static_cast<std::size_t>(spec.n_classes));
    double sum = 0.0;
    for (int c = 0; c < spec.n_classes; ++c) {
      p[static_cast<std::size_t>(c)] = sigmoid(stump_score(parameters, bs->rounds, c, x));
      sum += p[static_cast<std::size_t>(c)];
    }
    for (double& v : p) v /= sum;
    return p;
  }
  return dense_forward(layer_dims(spec), parameters, x, nullptr);
}

int TrainedModel::predict_class(std::span<const double> x) const {
  auto p = predict_proba(x);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

double loss_and_grad(const ModelSpec& spec, std::span<const double> params,
                     const std::vector<std::vector<double>>& rows,
                     const std::vector<int>& labels, std::span<double> grad) {
  if (std::holds_alternative<BoostedStumps>(spec.arch)) {
    throw std::invalid_argument("loss_and_grad: stumps are not gradient-trained");
  }
  const auto dims = layer_dims(spec);
  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<std::vector<double>> acts;
    auto probs = dense_forward(dims, params, rows[i], &acts);
    double p = std::clamp(probs[static_cast<std::size_t>(labels[i])], 1e-12, 1.0);
    loss -= std::log(p) * inv_n;

    // delta at output = (p - onehot(y)); walk layers backwards.
    std::vector<double> delta = probs;
    delta[static_cast<std::size_t>(labels[i])] -= 1.0;

    std::vector<std::size_t> offsets(dims.size() - 1);
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      offsets[l] = off;
      off += static_cast<std::size_t>(dims[l + 1]) * (dims[l] + 1);
    }
    for (std::size_t l = dims.size() - 2;; --l) {
      int in = dims[l], out = dims[l + 1];
      const auto& a = acts[l];
      for (int o = 0; o < out; ++o) {
        double d = delta[static_cast<std::size_t>(o)] * inv_n;
        double* gw = grad.data() + offsets[l] + static_cast<std::size_t>(o) * in;
        for (int k = 0; k < in; ++k) gw[k] += d * a[static_cast<std::size_t>(k)];
        grad[offsets[l] + static_cast<std::size_t>(out) * in + static_cast<std::size_t>(o)] +=
            d;
      }
      if (l == 0) break;
      std::vector<double> prev(static_cast<std::size_t>(in), 0.0);
      for (int k = 0; k < in; ++k) {
        if (a[static_cast<std::size_t>(k)] <= 0.0) continue;  // ReLU gate
        double s = 0.0;
        for (int o = 0; o < out; ++o) {
          s += params[offsets[l] + static_cast<std::size_t>(o) * in + static_cast<std::size_t>(k)] *
               delta[static_cast<std::size_t>(o)];
        }
        prev[static_cast<std::size_t>(k)] = s;
      }
      delta = std::move(prev);
    }
  }
  return loss;
}

TrainedModel train(const ModelSpec& spec,
                   const std::vector<std::vector<double>>& rows,
                   const std::vector<int>& labels, const TrainConfig& config) {
  if (rows.empty()) throw std::invalid_argument("train: empty data");
  if (rows.size() != labels.size()) {
    throw std::invalid_argument("train: row/label count mismatch");
  }
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != spec.input_dim()) {
      throw std::invalid_argument("train: input arity mismatch");
    }
    for (double v : r) {
      if (!std::isfinite(v)) throw std::invalid_argument("train: non-finite feature");
    }
  }
  for (int y : labels) {
    if (y < 0 || y >= spec.n_classes) {
      throw std::invalid_argument("train: label out of range");
    }
  }

  if (const auto* bs = std::get_if<BoostedStumps>(&spec.arch)) {
    return train_stumps(spec, *bs, rows, labels, config);
  }

  double lr = config.learning_rate;
  if (lr <= 0.0) lr = std::holds_alternative<Mlp>(spec.arch) ? 0.01 : 0.1;
  int batch = config.batch_size;
  if (batch <= 0) batch = rows.size() < 10000 ? static_cast<int>(rows.size()) : 256;

  auto params = init_params(spec, config.seed);
  std::vector<double> grad(params.size());
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle_rng(mix64(config.seed ^ 0x0badf00du));

  double final_loss = 0.0;
  const bool full_batch = batch >= static_cast<int>(rows.size());
  std::vector<std::vector<double>> brows;
  std::vector<int> blabels;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (full_batch) {
      final_loss = loss_and_grad(spec, params, rows, labels, grad);
      for (std::size_t k = 0; k < params.size(); ++k) params[k] -= lr * grad[k];
      continue;
    }
    // Fisher-Yates with the owned stream keeps epochs reproducible.
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(shuffle_rng.uniform() * static_cast<double>(i + 1));
      std::swap(order[i], order[std::min(j, i)]);
    }
    double epoch_loss = 0.0;
    std::size_t nb = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch)) {
      std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch));
      brows.clear();
      blabels.clear();
      for (std::size_t i = start; i < end; ++i) {
        brows.push_back(rows[order[i]]);
        blabels.push_back(labels[order[i]]);
      }
      epoch_loss += loss_and_grad(spec, params, brows, blabels, grad);
      ++nb;
      for (std::size_t k = 0; k < params.size(); ++k) params[k] -= lr * grad[k];
    }
    final_loss = epoch_loss / static_cast<double>(nb);
  }
  if (!std::isfinite(final_loss)) {
    throw std::runtime_error("train: loss diverged (non-finite)");
  }
  return TrainedModel{spec, std::move(params),
                      TrainingMeta{config.epochs, final_loss, config.seed}};
}

TrainedModel retrain_random_labels(const TrainedModel& model,
                                   const std::vector<std::vector<double>>& rows,
                                   const std::vector<int>& labels,
                                   std::uint64_t seed) {
  std::vector<int> permuted = labels;
  Rng rng(mix64(seed ^ 0xab1a7e5u));
  for (std::size_t i = permuted.size() - 1; i > 0; --i) {
    std::size_t j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1));
    std::swap(permuted[i], permuted[std::min(j, i)]);
  }
  TrainConfig config;
  config.seed = seed;
  if (const auto* bs = std::get_if<BoostedStumps>(&model.spec.arch)) {
    config.epochs = bs->rounds;
  } else {
    config.epochs = model.meta.epochs > 0 ? model.meta.epochs : 200;
  }
  return train(model.spec, rows, permuted, config);
}

nlohmann::json model_spec_to_json(const ModelSpec& spec) {
  nlohmann::json j;
  if (std::holds_alternative<LinearSoftmax>(spec.arch)) {
    j["arch"] = "linear";
  } else if (const auto* mlp = std::get_if<Mlp>(&spec.arch)) {
    j["arch"] = "mlp";
    j["hidden"] = mlp->hidden;
  } else {
    const auto& bs = std::get<BoostedStumps>(spec.arch);
    j["arch"] = "boosted_stumps";
    j["rounds"] = bs.rounds;
    j["learning_rate"] = bs.learning_rate;
  }
  j["n_classes"] = spec.n_classes;
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& in : spec.inputs) {
    nlohmann::json ji{{"parent", in.parent}};
    ji["encoding"] = in.encoding == Encoding::OneHot ? "onehot" : "numeric";
    if (in.encoding == Encoding::OneHot) ji["cardinality"] = in.cardinality;
    inputs.push_back(ji);
  }
  j["inputs"] = inputs;
  return j;
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
  ModelSpec spec;
  const std::string arch = j.at("arch").get<std::string>();
  if (arch == "linear") {
    spec.arch = LinearSoftmax{};
  } else if (arch == "mlp") {
    Mlp mlp;
    if (j.contains("hidden")) mlp.hidden = j.at("hidden").get<std::vector<int>>();
    if (mlp.hidden.empty()) mlp.hidden = {8};
    spec.arch = mlp;
  } else if (arch == "boosted_stumps") {
    BoostedStumps bs;
    if (j.contains("rounds")) bs.rounds = j.at("rounds").get<int>();
    if (j.contains("learning_rate")) bs.learning_rate = j.at("learning_rate").get<double>();
    spec.arch = bs;
  } else {
    throw std::invalid_argument("unknown model architecture: " + arch);
  }
  spec.n_classes = j.at("n_classes").get<int>();
  if (spec.n_classes < 2) throw std::invalid_argument("model needs n_classes >= 2");
  for (const auto& ji : j.at("inputs")) {
    InputField in;
    in.parent = ji.at("parent").get<std::string>();
    const std::string enc = ji.value("encoding", "numeric");
    if (enc == "onehot") {
      in.encoding = Encoding::OneHot;
      in.cardinality = ji.at("cardinality").get<int>();
    } else if (enc == "numeric") {
      in.encoding = Encoding::Numeric;
    } else {
      throw std::invalid_argument("unknown input encoding: " + enc);
    }
    spec.inputs.push_back(std::move(in));
  }
  return spec;
}

nlohmann::json model_to_json(const TrainedModel& model) {
  nlohmann::json j;
  j["spec"] = model_spec_to_json(model.spec);
  nlohmann::json params = nlohmann::json::array();
  char buf[40];
  for (double p : model.parameters) {
    std::snprintf(buf, sizeof(buf), "%a", p);
    params.push_back(std::string(buf));
  }
  j["parameters"] = params;
  j["training_meta"] = {{"epochs", model.meta.epochs},
                        {"final_loss", model.meta.final_loss},
                        {"seed", model.meta.seed}};
  return j;
}

TrainedModel model_from_json(const nlohmann::json& j) {
  TrainedModel model;
  model.spec = model_spec_from_json(j.at("spec"));
  for (const auto& p : j.at("parameters")) {
    model.parameters.push_back(std::strtod(p.get<std::string>().c_str(), nullptr));
  }
  if (model.parameters.size() != model.spec.parameter_count()) {
    throw std::invalid_argument("trained model: parameter count mismatch");
  }
  const auto& m = j.at("training_meta");
  model.meta.epochs = m.value("epochs", 0);
  model.meta.final_loss = m.value("final_loss", 0.0);
  model.meta.seed = m.value("seed", std::uint64_t{0});
  return model;
}

}  // namespace bnet
