#include "bnet/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace bnet {

namespace {

constexpr double kSimplexTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_simplex(std::span<const double> probs, const char* what) {
  if (probs.empty()) throw std::invalid_argument(std::string(what) + ": empty simplex");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument(std::string(what) + ": negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSimplexTol) {
    throw std::invalid_argument(std::string(what) + ": probabilities do not sum to 1");
  }
}

double normal_log_pdf(double x, double mu, double sigma) {
  double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * M_PI);
}

int table_row_index(const ConditionalCategorical& cc,
                    std::span<const int> config) {
  if (config.size() != cc.parent_cards.size()) {
    throw std::invalid_argument("conditional categorical: config arity mismatch");
  }
  int idx = 0;
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (config[i] < 0 || config[i] >= cc.parent_cards[i]) {
      throw std::invalid_argument("conditional categorical: config out of range");
    }
    idx = idx * cc.parent_cards[i] + config[i];
  }
  return idx;
}

}  // namespace

std::uint64_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::vector<double> Histogram::frequencies() const {
  std::vector<double> f(counts.size(), 0.0);
  std::uint64_t n = total();
  if (n == 0) return f;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    f[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
  }
  return f;
}

void validate_dist(const DistSpec& dist) {
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Categorical>) {
          check_simplex(d.probs, "categorical");
          if (!d.labels.empty() && d.labels.size() != d.probs.size()) {
            throw std::invalid_argument("categorical: label/prob count mismatch");
          }
        } else if constexpr (std::is_same_v<T, TruncatedNormal>) {
          if (!(d.sigma > 0.0)) throw std::invalid_argument("truncnorm: sigma must be > 0");
          if (!(d.lo < d.hi)) throw std::invalid_argument("truncnorm: requires lo < hi");
        } else if constexpr (std::is_same_v<T, Gamma>) {
          if (!(d.shape > 0.0) || !(d.rate > 0.0)) {
            throw std::invalid_argument("gamma: shape and rate must be > 0");
          }
        } else {
          if (d.parent_cards.empty()) {
            throw std::invalid_argument("conditional categorical: no parents");
          }
          std::size_t rows = 1;
          for (int c : d.parent_cards) {
            if (c < 1) throw std::invalid_argument("conditional categorical: bad cardinality");
            rows *= static_cast<std::size_t>(c);
          }
          if (d.table.size() != rows) {
            throw std::invalid_argument("conditional categorical: table row count mismatch");
          }
          for (const auto& row : d.table) {
            check_simplex(row, "conditional categorical");
            if (row.size() != d.table.front().size()) {
              throw std::invalid_argument("conditional categorical: ragged table");
            }
          }
        }
      },
      dist);
}

int n_categories(const DistSpec& dist) {
  if (const auto* c = std::get_if<Categorical>(&dist)) {
    return static_cast<int>(c->probs.size());
  }
  if (const auto* cc = std::get_if<ConditionalCategorical>(&dist)) {
    return cc->table.empty() ? 0 : static_cast<int>(cc->table.front().size());
  }
  return 0;
}

bool is_discrete(const DistSpec& dist) { return n_categories(dist) > 0; }

std::vector<double> sample(const DistSpec& dist, Rng& rng, std::size_t n) {
  validate_dist(dist);
  std::vector<double> out;
  out.reserve(n);
  if (const auto* c = std::get_if<Categorical>(&dist)) {
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(static_cast<double>(rng.categorical(c->probs)));
    }
  } else if (const auto* t = std::get_if<TruncatedNormal>(&dist)) {
    // Inverse-CDF restricted to the in-bounds quantile range.
    double a = norm_cdf((t->lo - t->mu) / t->sigma);
    double b = norm_cdf((t->hi - t->mu) / t->sigma);
    for (std::size_t i = 0; i < n; ++i) {
      double u = a + (b - a) * rng.uniform();
      u = std::clamp(u, 1e-300, 1.0 - 1e-16);
      double x = t->mu + t->sigma * norm_inv_cdf(u);
      out.push_back(std::clamp(x, t->lo, t->hi));
    }
  } else if (const auto* g = std::get_if<Gamma>(&dist)) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(rng.gamma(g->shape, g->rate));
  } else {
    throw std::invalid_argument("conditional categorical requires a parent configuration");
  }
  return out;
}

double sample_conditional(const DistSpec& dist, std::span<const int> config,
                          Rng& rng) {
  if (const auto* cc = std::get_if<ConditionalCategorical>(&dist)) {
    const auto& row = cc->table[static_cast<std::size_t>(table_row_index(*cc, config))];
    return static_cast<double>(rng.categorical(row));
  }
  return sample(dist, rng, 1).front();
}

double log_prob(const DistSpec& dist, double value) {
  if (const auto* c = std::get_if<Categorical>(&dist)) {
    double r = std::round(value);
    if (r != value || r < 0 || r >= static_cast<double>(c->probs.size())) {
      throw std::invalid_argument("categorical log_prob: value is not a class index");
    }
    double p = c->probs[static_cast<std::size_t>(r)];
    return p > 0.0 ? std::log(p) : -kInf;
  }
  if (const auto* t = std::get_if<TruncatedNormal>(&dist)) {
    if (value < t->lo || value > t->hi) return -kInf;
    double z = norm_cdf((t->hi - t->mu) / t->sigma) -
               norm_cdf((t->lo - t->mu) / t->sigma);
    return normal_log_pdf(value, t->mu, t->sigma) - std::log(z);
  }
  if (const auto* g = std::get_if<Gamma>(&dist)) {
    if (!(value > 0.0)) return -kInf;
    return g->shape * std::log(g->rate) - std::lgamma(g->shape) +
           (g->shape - 1.0) * std::log(value) - g->rate * value;
  }
  throw std::invalid_argument("conditional categorical requires a parent configuration");
}

double log_prob_conditional(const DistSpec& dist, std::span<const int> config,
                            double value) {
  if (const auto* cc = std::get_if<ConditionalCategorical>(&dist)) {
    const auto& row = cc->table[static_cast<std::size_t>(table_row_index(*cc, config))];
    double r = std::round(value);
    if (r != value || r < 0 || r >= static_cast<double>(row.size())) {
      throw std::invalid_argument("conditional categorical log_prob: bad class index");
    }
    double p = row[static_cast<std::size_t>(r)];
    return p > 0.0 ? std::log(p) : -kInf;
  }
  return log_prob(dist, value);
}

Categorical fit_categorical(std::span<const std::uint64_t> counts,
                            const std::optional<PriorSpec>& prior) {
  if (counts.empty()) throw std::invalid_argument("fit_categorical: empty counts");
  std::vector<double> probs(counts.size());
  double total = 0.0;
  if (prior) {
    if (prior->concentration.size() != counts.size()) {
      throw std::invalid_argument("fit_categorical: prior dimension mismatch");
    }
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (!(prior->concentration[k] > 0.0)) {
        throw std::invalid_argument("fit_categorical: non-positive concentration");
      }
      probs[k] = static_cast<double>(counts[k]) + prior->concentration[k];
      total += probs[k];
    }
  } else {
    for (std::size_t k = 0; k < counts.size(); ++k) {
      probs[k] = static_cast<double>(counts[k]);
      total += probs[k];
    }
    if (total == 0.0) {
      throw std::invalid_argument("fit_categorical: all-zero counts with no prior");
    }
  }
  for (double& p : probs) p /= total;
  return Categorical{std::move(probs), {}, false};
}

TruncatedNormal fit_truncated_normal(std::span<const double> data, double lo,
                                     double hi) {
  if (data.size() < 2) throw std::invalid_argument("fit_truncated_normal: need >= 2 points");
  if (!(lo < hi)) throw std::invalid_argument("fit_truncated_normal: requires lo < hi");
  double mean = 0.0;
  for (double x : data) {
    if (x < lo || x > hi) {
      throw std::invalid_argument("fit_truncated_normal: datum outside [lo, hi]");
    }
    mean += x;
  }
  mean /= static_cast<double>(data.size());
  double var = 0.0;
  for (double x : data) var += (x - mean) * (x - mean);
  var /= static_cast<double>(data.size());
  if (!(var > 0.0)) {
    throw std::invalid_argument("fit_truncated_normal: constant feature (zero variance)");
  }
  return TruncatedNormal{mean, std::sqrt(var), lo, hi};
}

Gamma fit_gamma(std::span<const double> data) {
  if (data.size() < 2) throw std::invalid_argument("fit_gamma: need >= 2 points");
  double mean = 0.0;
  for (double x : data) {
    if (!(x > 0.0)) throw std::invalid_argument("fit_gamma: data must be positive");
    mean += x;
  }
  mean /= static_cast<double>(data.size());
  double var = 0.0;
  for (double x : data) var += (x - mean) * (x - mean);
  var /= static_cast<double>(data.size());
  if (!(var > 0.0)) {
    throw std::invalid_argument("fit_gamma: constant feature (zero variance)");
  }
  return Gamma{mean * mean / var, mean / var};
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("kl_divergence: support size mismatch");
  }
  double kl = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] == 0.0) continue;
    if (q[k] == 0.0) return kInf;
    kl += p[k] * std::log(p[k] / q[k]);
  }
  return std::max(kl, 0.0);
}

double kl_divergence(const Histogram& p, const Histogram& q) {
  if (p.bin_edges != q.bin_edges) {
    throw std::invalid_argument("kl_divergence: histograms have different binning");
  }
  auto fp = p.frequencies();
  auto fq = q.frequencies();
  return kl_divergence(fp, fq);
}

double dirichlet_log_pdf(std::span<const double> concentration,
                         std::span<const double> probs) {
  if (concentration.size() != probs.size()) {
    throw std::invalid_argument("dirichlet_log_pdf: dimension mismatch");
  }
  double lp = 0.0;
  double asum = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    double a = concentration[k];
    if (!(a > 0.0)) throw std::invalid_argument("dirichlet_log_pdf: non-positive concentration");
    if (!(probs[k] > 0.0)) return -kInf;
    lp += (a - 1.0) * std::log(probs[k]) - std::lgamma(a);
    asum += a;
  }
  return lp + std::lgamma(asum);
}

std::vector<double> dirichlet_mean(std::span<const double> concentration) {
  double asum = std::accumulate(concentration.begin(), concentration.end(), 0.0);
  std::vector<double> mean(concentration.size());
  for (std::size_t k = 0; k < concentration.size(); ++k) {
    mean[k] = concentration[k] / asum;
  }
  return mean;
}

nlohmann::json dist_to_json(const DistSpec& dist) {
  nlohmann::json j;
  if (const auto* c = std::get_if<Categorical>(&dist)) {
    j["type"] = c->one_hot ? "onehot_categorical" : "categorical";
    j["probs"] = c->probs;
    if (!c->labels.empty()) j["labels"] = c->labels;
  } else if (const auto* t = std::get_if<TruncatedNormal>(&dist)) {
    j["type"] = "truncnorm";
    j["mu"] = t->mu;
    j["sigma"] = t->sigma;
    j["lo"] = t->lo;
    j["hi"] = t->hi;
  } else if (const auto* g = std::get_if<Gamma>(&dist)) {
    j["type"] = "gamma";
    j["shape"] = g->shape;
    j["rate"] = g->rate;
  } else {
    const auto& cc = std::get<ConditionalCategorical>(dist);
    j["type"] = "conditional_categorical";
    j["parent_cards"] = cc.parent_cards;
    j["table"] = cc.table;
    if (!cc.labels.empty()) j["labels"] = cc.labels;
  }
  return j;
}

DistSpec dist_from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  DistSpec dist;
  if (type == "categorical" || type == "onehot_categorical") {
    Categorical c;
    c.probs = j.at("probs").get<std::vector<double>>();
    if (j.contains("labels")) c.labels = j.at("labels").get<std::vector<std::string>>();
    c.one_hot = (type == "onehot_categorical");
    dist = std::move(c);
  } else if (type == "truncnorm") {
    dist = TruncatedNormal{j.at("mu").get<double>(), j.at("sigma").get<double>(),
                           j.at("lo").get<double>(), j.at("hi").get<double>()};
  } else if (type == "gamma") {
    dist = Gamma{j.at("shape").get<double>(), j.at("rate").get<double>()};
  } else if (type == "conditional_categorical") {
    ConditionalCategorical cc;
    cc.parent_cards = j.at("parent_cards").get<std::vector<int>>();
    cc.table = j.at("table").get<std::vector<std::vector<double>>>();
    if (j.contains("labels")) cc.labels = j.at("labels").get<std::vector<std::string>>();
    dist = std::move(cc);
  } else {
    throw std::invalid_argument("unknown distribution type: " + type);
  }
  validate_dist(dist);
  return dist;
}

nlohmann::json prior_to_json(const PriorSpec& prior) {
  return nlohmann::json{{"type", "dirichlet"}, {"concentration", prior.concentration}};
}

PriorSpec prior_from_json(const nlohmann::json& j) {
  if (j.at("type").get<std::string>() != "dirichlet") {
    throw std::invalid_argument("unknown prior type");
  }
  PriorSpec p{j.at("concentration").get<std::vector<double>>()};
  for (double a : p.concentration) {
    if (!(a > 0.0)) throw std::invalid_argument("dirichlet prior: non-positive concentration");
  }
  return p;
}

}  // namespace bnet
