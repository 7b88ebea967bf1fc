#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bnet/distributions.hpp"
#include "bnet/models.hpp"

namespace bnet {

enum class NodeKind { Feature, Model };

// One vertex of the network. Feature nodes carry a distribution, model nodes
// carry an architecture spec and, once trained, the fitted model. `parents`
// order is positional: it is the model's input order.
struct Node {
  std::string id;
  NodeKind kind = NodeKind::Feature;
  std::optional<DistSpec> dist;
  std::optional<ModelSpec> model;
  std::shared_ptr<const TrainedModel> trained;
  std::vector<std::string> parents;
  std::optional<PriorSpec> prior;
  std::vector<std::string> class_labels;

  // Category count for discrete nodes; 0 for continuous features.
  int n_categories() const;
  bool is_discrete() const;
};

struct Dag {
  std::vector<Node> nodes;
  std::string output_node;

  const Node* find(const std::string& id) const;
  Node* find(const std::string& id);
};

struct Violation {
  std::string rule;
  std::string detail;
};

struct ValidationResult {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Total: never throws; every broken invariant becomes a violation entry.
ValidationResult validate(const Dag& dag);

// Kahn's algorithm with lexical tie-breaking; rejects invalid dags.
std::vector<std::string> topological_order(const Dag& dag);

// A_i in positional input order; throws on unknown id.
std::vector<std::string> parents(const Dag& dag, const std::string& id);

nlohmann::json dag_to_json(const Dag& dag);
Dag dag_from_json(const nlohmann::json& j);

}  // namespace bnet
