#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bnet/graph.hpp"
#include "bnet/simulate.hpp"

namespace bnet {

// Complete realization of the network: class index (as double) per discrete
// node, real value per continuous node.
using Assignment = std::map<std::string, double>;

// Sum over nodes of log P(v_i | parents, theta_i), plus the Dirichlet
// log-density of each prior-carrying node's current simplex. Model terms are
// log predict_proba at the assigned parent values, clamped to avoid -inf from
// saturated predictions.
double joint_log_prob(const Dag& dag, const Assignment& a);

// As joint_log_prob but without prior-density terms: the normalized joint
// mass over node values only. Exponentials of this sum to 1 over the full
// discrete space.
double conditional_log_prob(const Dag& dag, const Assignment& a);

// Marginal of the output node by full enumeration; all nodes must be
// discrete and the joint space must not exceed `state_cap`.
Categorical exact_output_distribution(const Dag& dag,
                                      std::uint64_t state_cap = 10'000'000);

// Unconstrained parameterization of every prior-carrying categorical feature
// node, concatenated in topological order. Simplexes use the log-ratio
// transform against the last category.
struct ThetaBlock {
  std::string node;
  int categories = 0;  // contributes categories-1 unconstrained values
};

struct ThetaLayout {
  std::vector<ThetaBlock> blocks;
  std::size_t dim() const;
};

ThetaLayout theta_layout(const Dag& dag);

// Current node simplexes -> unconstrained vector and back.
std::vector<double> unconstrain_theta(const ThetaLayout& layout, const Dag& dag);
// Returns per-block simplexes; also reports the log-Jacobian of the
// unconstrained -> constrained map.
std::vector<std::vector<double>> constrain_theta(const ThetaLayout& layout,
                                                 std::span<const double> theta,
                                                 double* log_jacobian);

// Installs the constrained simplexes into a copy of the dag.
Dag with_theta(const Dag& dag, const ThetaLayout& layout,
               std::span<const double> theta);

// Log posterior over theta given observed rows: data log-likelihood under
// theta-parameterized features (fixed model conditionals), plus Dirichlet
// log-priors, plus the transform's log-Jacobian.
double posterior_log_density(const Dag& dag, const SampleBatch& data,
                             std::span<const double> theta);

struct McmcConfig {
  std::size_t n_samples = 0;
  std::size_t burn_in = 0;
  std::size_t thinning = 1;
  double proposal_scale = 0.1;
  std::uint64_t seed = 0;
};

struct McmcResult {
  std::vector<std::vector<double>> draws;
  double acceptance_rate = 0.0;  // post-burn-in
  double final_scale = 0.0;
};

// Random Walk Metropolis with isotropic Gaussian proposals. The scale adapts
// during burn-in (x1.1 above 50% running acceptance, x0.9 below 20%) and is
// frozen afterwards so the retained chain has a fixed kernel.
McmcResult rwm_sample(
    const std::function<double(std::span<const double>)>& target,
    std::vector<double> init, const McmcConfig& config);

}  // namespace bnet
