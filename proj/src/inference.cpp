#include "bnet/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kProbClamp = 1e-12;

double node_conditional_log_prob(const Dag& /*dag*/, const Node& node,
                                 const Assignment& a) {
  auto value_of = [&](const std::string& id) {
    auto it = a.find(id);
    if (it == a.end()) {
      throw std::invalid_argument("assignment missing node " + id);
    }
    return it->second;
  };
  double v = value_of(node.id);
  if (node.kind == NodeKind::Feature) {
    if (std::holds_alternative<ConditionalCategorical>(*node.dist)) {
      std::vector<int> config;
      config.reserve(node.parents.size());
      for (const auto& p : node.parents) {
        config.push_back(static_cast<int>(value_of(p)));
      }
      return log_prob_conditional(*node.dist, config, v);
    }
    return log_prob(*node.dist, v);
  }
  if (!node.trained) {
    throw std::invalid_argument("joint_log_prob: untrained model node " + node.id);
  }
  std::vector<double> raw;
  raw.reserve(node.parents.size());
  for (const auto& p : node.parents) raw.push_back(value_of(p));
  auto probs = node.trained->predict_proba(encode_inputs(*node.model, raw));
  int cls = static_cast<int>(v);
  if (static_cast<double>(cls) != v || cls < 0 ||
      cls >= static_cast<int>(probs.size())) {
    throw std::invalid_argument("joint_log_prob: bad class value for " + node.id);
  }
  double p = std::clamp(probs[static_cast<std::size_t>(cls)], kProbClamp,
                        1.0 - kProbClamp);
  return std::log(p);
}

double prior_terms(const Dag& dag) {
  double lp = 0.0;
  for (const auto& node : dag.nodes) {
    if (!node.prior) continue;
    if (node.kind == NodeKind::Feature && node.dist) {
      if (const auto* c = std::get_if<Categorical>(&*node.dist)) {
        lp += dirichlet_log_pdf(node.prior->concentration, c->probs);
      }
    }
    // Model-node priors carry no free density terms: trained conditionals
    // are fixed (smoothing mixture defaults to lambda = 0).
  }
  return lp;
}

}  // namespace

double conditional_log_prob(const Dag& dag, const Assignment& a) {
  if (a.size() != dag.nodes.size()) {
    throw std::invalid_argument("assignment must cover every node exactly once");
  }
  double lp = 0.0;
  for (const auto& node : dag.nodes) {
    lp += node_conditional_log_prob(dag, node, a);
    if (lp == -kInf) return -kInf;
  }
  return lp;
}

double joint_log_prob(const Dag& dag, const Assignment& a) {
  double lp = conditional_log_prob(dag, a);
  if (lp == -kInf) return -kInf;
  return lp + prior_terms(dag);
}

Categorical exact_output_distribution(const Dag& dag,
                                      std::uint64_t state_cap) {
  auto order = topological_order(dag);
  std::vector<const Node*> nodes;
  std::uint64_t states = 1;
  for (const auto& id : order) {
    const Node* n = dag.find(id);
    int cats = n->n_categories();
    if (cats <= 0) {
      throw std::invalid_argument("exact_output_distribution: continuous node " + id);
    }
    if (states > state_cap / static_cast<std::uint64_t>(cats)) {
      throw std::invalid_argument("exact_output_distribution: joint state space exceeds cap");
    }
    states *= static_cast<std::uint64_t>(cats);
    nodes.push_back(n);
  }

  const Node* out = dag.find(dag.output_node);
  std::vector<double> marginal(static_cast<std::size_t>(out->n_categories()), 0.0);
  Assignment a;

  // DFS over the topological order shares prefix conditionals across the
  // enumeration.
  std::function<void(std::size_t, double)> recurse = [&](std::size_t depth,
                                                         double logp) {
    if (depth == nodes.size()) {
      marginal[static_cast<std::size_t>(a.at(dag.output_node))] += std::exp(logp);
      return;
    }
    const Node* n = nodes[depth];
    int cats = n->n_categories();
    for (int k = 0; k < cats; ++k) {
      a[n->id] = static_cast<double>(k);
      double term = node_conditional_log_prob(dag, *n, a);
      if (term != -kInf) recurse(depth + 1, logp + term);
    }
    a.erase(n->id);
  };
  recurse(0, 0.0);

  double total = 0.0;
  for (double m : marginal) total += m;
  if (!(total > 0.0)) {
    throw std::runtime_error("exact_output_distribution: zero total mass");
  }
  for (double& m : marginal) m /= total;
  return Categorical{std::move(marginal), out->class_labels, false};
}

std::size_t ThetaLayout::dim() const {
  std::size_t d = 0;
  for (const auto& b : blocks) d += static_cast<std::size_t>(b.categories) - 1;
  return d;
}

ThetaLayout theta_layout(const Dag& dag) {
  ThetaLayout layout;
  for (const auto& id : topological_order(dag)) {
    const Node* n = dag.find(id);
    if (n->kind != NodeKind::Feature || !n->prior || !n->dist) continue;
    if (const auto* c = std::get_if<Categorical>(&*n->dist)) {
      layout.blocks.push_back({n->id, static_cast<int>(c->probs.size())});
    }
  }
  return layout;
}

std::vector<double> unconstrain_theta(const ThetaLayout& layout,
                                      const Dag& dag) {
  std::vector<double> theta;
  theta.reserve(layout.dim());
  for (const auto& b : layout.blocks) {
    const Node* n = dag.find(b.node);
    const auto& probs = std::get<Categorical>(*n->dist).probs;
    double ref = probs.back();
    if (!(ref > 0.0)) {
      throw std::invalid_argument("unconstrain_theta: boundary simplex at " + b.node);
    }
    for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
      if (!(probs[k] > 0.0)) {
        throw std::invalid_argument("unconstrain_theta: boundary simplex at " + b.node);
      }
      theta.push_back(std::log(probs[k] / ref));
    }
  }
  return theta;
}

std::vector<std::vector<double>> constrain_theta(const ThetaLayout& layout,
                                                 std::span<const double> theta,
                                                 double* log_jacobian) {
  if (theta.size() != layout.dim()) {
    throw std::invalid_argument("constrain_theta: layout dimension mismatch");
  }
  std::vector<std::vector<double>> simplexes;
  double lj = 0.0;
  std::size_t off = 0;
  for (const auto& b : layout.blocks) {
    std::size_t km1 = static_cast<std::size_t>(b.categories) - 1;
    std::vector<double> p(static_cast<std::size_t>(b.categories));
    double mx = 0.0;  // implicit last logit is 0
    for (std::size_t k = 0; k < km1; ++k) mx = std::max(mx, theta[off + k]);
    double sum = std::exp(-mx);
    for (std::size_t k = 0; k < km1; ++k) {
      p[k] = std::exp(theta[off + k] - mx);
      sum += p[k];
    }
    p[km1] = std::exp(-mx) / sum;
    for (std::size_t k = 0; k < km1; ++k) p[k] /= sum;
    // log|det| of the softmax map equals the sum of all K log-probabilities.
    for (double v : p) lj += std::log(v);
    simplexes.push_back(std::move(p));
    off += km1;
  }
  if (log_jacobian) *log_jacobian = lj;
  return simplexes;
}

Dag with_theta(const Dag& dag, const ThetaLayout& layout,
               std::span<const double> theta) {
  Dag out = dag;
  auto simplexes = constrain_theta(layout, theta, nullptr);
  for (std::size_t b = 0; b < layout.blocks.size(); ++b) {
    Node* n = out.find(layout.blocks[b].node);
    std::get<Categorical>(*n->dist).probs = simplexes[b];
  }
  return out;
}

double posterior_log_density(const Dag& dag, const SampleBatch& data,
                             std::span<const double> theta) {
  auto layout = theta_layout(dag);
  for (double t : theta) {
    if (!std::isfinite(t)) {
      throw std::invalid_argument("posterior_log_density: non-finite theta");
    }
  }
  double log_jacobian = 0.0;
  auto simplexes = constrain_theta(layout, theta, &log_jacobian);
  Dag current = with_theta(dag, layout, theta);

  double lp = 0.0;
  // Data likelihood: every observed node contributes its conditional terms.
  for (const auto& node : current.nodes) {
    auto it = data.columns.find(node.id);
    if (it == data.columns.end()) continue;
    const auto& col = it->second;
    Assignment row;
    for (std::size_t i = 0; i < col.size(); ++i) {
      row[node.id] = col[i];
      for (const auto& p : node.parents) row[p] = data.column(p)[i];
      lp += node_conditional_log_prob(current, node, row);
      if (lp == -kInf) return -kInf;
    }
  }
  // Priors on the theta-parameterized nodes.
  for (std::size_t b = 0; b < layout.blocks.size(); ++b) {
    const Node* n = current.find(layout.blocks[b].node);
    lp += dirichlet_log_pdf(n->prior->concentration, simplexes[b]);
  }
  return lp + log_jacobian;
}

McmcResult rwm_sample(
    const std::function<double(std::span<const double>)>& target,
    std::vector<double> init, const McmcConfig& config) {
  if (config.n_samples == 0) throw std::invalid_argument("rwm: n_samples must be > 0");
  if (config.thinning < 1) throw std::invalid_argument("rwm: thinning must be >= 1");
  if (!(config.proposal_scale > 0.0)) {
    throw std::invalid_argument("rwm: proposal scale must be positive");
  }
  double current_lp = target(init);
  if (!std::isfinite(current_lp)) {
    throw std::invalid_argument("rwm: target not finite at init");
  }

  Rng rng(mix64(config.seed ^ 0x77a1cull));
  double scale = config.proposal_scale;
  std::vector<double> current = std::move(init);
  std::vector<double> proposal(current.size());

  McmcResult result;
  result.draws.reserve(config.n_samples);

  const std::size_t window = 50;
  std::size_t window_accepts = 0, window_steps = 0;
  std::size_t accepts = 0, steps = 0;
  std::size_t total = config.burn_in + config.n_samples * config.thinning;
  for (std::size_t it = 0; it < total; ++it) {
    for (std::size_t k = 0; k < current.size(); ++k) {
      proposal[k] = current[k] + scale * rng.normal();
    }
    double proposal_lp = target(proposal);
    bool accept = false;
    if (proposal_lp >= current_lp) {
      accept = true;
    } else {
      accept = std::log(rng.uniform() + 1e-300) < proposal_lp - current_lp;
    }
    if (accept) {
      current = proposal;
      current_lp = proposal_lp;
    }
    if (it < config.burn_in) {
      window_accepts += accept ? 1 : 0;
      if (++window_steps == window) {
        double rate = static_cast<double>(window_accepts) / window;
        if (rate > 0.5) scale *= 1.1;
        if (rate < 0.2) scale *= 0.9;
        window_accepts = window_steps = 0;
      }
    } else {
      accepts += accept ? 1 : 0;
      ++steps;
      std::size_t since = it - config.burn_in;
      if ((since + 1) % config.thinning == 0) result.draws.push_back(current);
    }
  }
  result.acceptance_rate = steps ? static_cast<double>(accepts) / static_cast<double>(steps) : 0.0;
  result.final_scale = scale;
  return result;
}

}  // namespace bnet
