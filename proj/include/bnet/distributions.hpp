#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bnet/rng.hpp"

#include "json.hpp"

namespace bnet {

// Discrete distribution over labelled categories. `one_hot` only changes the
// declared wire encoding; values are always stored as class indices.
struct Categorical {
  std::vector<double> probs;
  std::vector<std::string> labels;  // optional; empty means "0","1",...
  bool one_hot = false;
};

// Normal restricted to [lo, hi], density renormalized by the in-bounds mass.
struct TruncatedNormal {
  double mu = 0.0;
  double sigma = 1.0;
  double lo = 0.0;
  double hi = 1.0;
};

struct Gamma {
  double shape = 1.0;
  double rate = 1.0;
};

// Categorical whose simplex depends on a configuration of categorical
// parents. Rows are indexed mixed-radix with the first parent varying
// slowest.
struct ConditionalCategorical {
  std::vector<int> parent_cards;
  std::vector<std::vector<double>> table;
  std::vector<std::string> labels;
};

using DistSpec =
    std::variant<Categorical, TruncatedNormal, Gamma, ConditionalCategorical>;

// Dirichlet prior over the category probabilities of a discrete node.
struct PriorSpec {
  std::vector<double> concentration;
};

struct Histogram {
  std::vector<double> bin_edges;
  std::vector<std::uint64_t> counts;

  std::uint64_t total() const;
  // Normalized frequencies; all zero when total() == 0.
  std::vector<double> frequencies() const;
};

// Throws std::invalid_argument describing the first violated invariant.
void validate_dist(const DistSpec& dist);

// Category count for discrete specs, 0 for continuous ones.
int n_categories(const DistSpec& dist);

bool is_discrete(const DistSpec& dist);

// n i.i.d. draws. Discrete draws are class indices stored as doubles.
// ConditionalCategorical cannot be sampled unconditionally and throws.
std::vector<double> sample(const DistSpec& dist, Rng& rng, std::size_t n);

// One draw given a parent configuration (only meaningful for
// ConditionalCategorical; other variants ignore the configuration).
double sample_conditional(const DistSpec& dist, std::span<const int> config,
                          Rng& rng);

// Natural-log density/mass; -infinity outside the support.
double log_prob(const DistSpec& dist, double value);
double log_prob_conditional(const DistSpec& dist, std::span<const int> config,
                            double value);

// Posterior-mean estimate under a Dirichlet prior; plain ML frequencies when
// prior is absent.
Categorical fit_categorical(std::span<const std::uint64_t> counts,
                            const std::optional<PriorSpec>& prior);

// Method-of-moments fit (population std). Throws on degenerate data.
TruncatedNormal fit_truncated_normal(std::span<const double> data, double lo,
                                     double hi);
Gamma fit_gamma(std::span<const double> data);

// KL(p || q) in nats. Returns +infinity when p puts mass where q has none.
double kl_divergence(std::span<const double> p, std::span<const double> q);
double kl_divergence(const Histogram& p, const Histogram& q);

double dirichlet_log_pdf(std::span<const double> concentration,
                         std::span<const double> probs);
std::vector<double> dirichlet_mean(std::span<const double> concentration);

nlohmann::json dist_to_json(const DistSpec& dist);
DistSpec dist_from_json(const nlohmann::json& j);
nlohmann::json prior_to_json(const PriorSpec& prior);
PriorSpec prior_from_json(const nlohmann::json& j);

}  // namespace bnet
