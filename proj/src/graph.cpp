#include "bnet/graph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace bnet {

int Node::n_categories() const {
  if (kind == NodeKind::Model) {
    return model ? model->n_classes : static_cast<int>(class_labels.size());
  }
  return dist ? bnet::n_categories(*dist) : 0;
}

bool Node::is_discrete() const { return n_categories() > 0; }

const Node* Dag::find(const std::string& id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

Node* Dag::find(const std::string& id) {
  for (auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

ValidationResult validate(const Dag& dag) {
  ValidationResult result;
  auto add = [&](std::string rule, std::string detail) {
    result.violations.push_back({std::move(rule), std::move(detail)});
  };

  std::set<std::string> ids;
  for (const auto& n : dag.nodes) {
    if (n.id.empty()) add("empty id", "node with empty name");
    if (!ids.insert(n.id).second) add("duplicate id", n.id);
  }

  for (const auto& n : dag.nodes) {
    for (const auto& p : n.parents) {
      if (!ids.count(p)) add("unresolved parent", n.id + " -> " + p);
    }
    if (n.kind == NodeKind::Model) {
      if (n.parents.empty()) add("model without parents", n.id);
      if (!n.model) add("model without architecture", n.id);
      if (n.model && n.model->inputs.size() != n.parents.size()) {
        add("input schema arity mismatch", n.id);
      }
      if (n.model) {
        for (std::size_t i = 0; i < n.model->inputs.size() && i < n.parents.size(); ++i) {
          if (n.model->inputs[i].parent != n.parents[i]) {
            add("input schema order mismatch",
                n.id + " slot " + std::to_string(i));
          }
        }
      }
    } else {
      if (!n.dist) {
        add("feature without distribution", n.id);
        continue;
      }
      try {
        validate_dist(*n.dist);
      } catch (const std::exception& e) {
        add("invalid distribution", n.id + ": " + e.what());
      }
      bool conditional = std::holds_alternative<ConditionalCategorical>(*n.dist);
      if (!conditional && !n.parents.empty()) {
        add("unconditional feature with parents", n.id);
      }
      if (conditional) {
        const auto& cc = std::get<ConditionalCategorical>(*n.dist);
        if (cc.parent_cards.size() != n.parents.size()) {
          add("conditional table arity mismatch", n.id);
        }
        for (std::size_t i = 0; i < n.parents.size(); ++i) {
          const Node* p = dag.find(n.parents[i]);
          if (!p) continue;
          if (p->kind != NodeKind::Feature || !p->is_discrete()) {
            add("conditional feature parent must be a categorical feature",
                n.id + " -> " + n.parents[i]);
          } else if (i < cc.parent_cards.size() &&
                     p->n_categories() != cc.parent_cards[i]) {
            add("conditional table cardinality mismatch",
                n.id + " -> " + n.parents[i]);
          }
        }
      }
    }
    if (n.prior && n.is_discrete() &&
        static_cast<int>(n.prior->concentration.size()) != n.n_categories()) {
      add("prior dimension mismatch", n.id);
    }
  }

  const Node* out = dag.find(dag.output_node);
  if (!out) {
    add("missing output node", dag.output_node);
  } else if (out->kind != NodeKind::Model) {
    add("output node is not a model", dag.output_node);
  }

  // Cycle detection via iterative removal of parent-satisfied nodes.
  std::map<std::string, std::size_t> remaining;
  for (const auto& n : dag.nodes) {
    std::size_t count = 0;
    for (const auto& p : n.parents) {
      if (ids.count(p)) ++count;
    }
    remaining[n.id] = count;
  }
  bool progress = true;
  std::size_t placed = 0;
  std::set<std::string> done;
  while (progress) {
    progress = false;
    for (const auto& n : dag.nodes) {
      if (done.count(n.id) || remaining[n.id] != 0) continue;
      done.insert(n.id);
      ++placed;
      progress = true;
      for (const auto& m : dag.nodes) {
        if (done.count(m.id)) continue;
        for (const auto& p : m.parents) {
          if (p == n.id) --remaining[m.id];
        }
      }
    }
  }
  if (placed != dag.nodes.size()) {
    std::string cycle;
    for (const auto& n : dag.nodes) {
      if (!done.count(n.id)) {
        if (!cycle.empty()) cycle += ",";
        cycle += n.id;
      }
    }
    add("cycle", cycle);
  }
  return result;
}

std::vector<std::string> topological_order(const Dag& dag) {
  auto v = validate(dag);
  if (!v.ok()) {
    throw std::invalid_argument("topological_order: invalid dag (" +
                                v.violations.front().rule + ": " +
                                v.violations.front().detail + ")");
  }
  std::map<std::string, std::size_t> indegree;
  std::map<std::string, std::vector<std::string>> children;
  for (const auto& n : dag.nodes) {
    indegree[n.id] = n.parents.size();
    for (const auto& p : n.parents) children[p].push_back(n.id);
  }
  // std::set gives the lexically-smallest ready node each step.
  std::set<std::string> ready;
  for (const auto& [id, deg] : indegree) {
    if (deg == 0) ready.insert(id);
  }
  std::vector<std::string> order;
  order.reserve(dag.nodes.size());
  while (!ready.empty()) {
    std::string id = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(id);
    for (const auto& c : children[id]) {
      if (--indegree[c] == 0) ready.insert(c);
    }
  }
  return order;
}

std::vector<std::string> parents(const Dag& dag, const std::string& id) {
  const Node* n = dag.find(id);
  if (!n) throw std::invalid_argument("parents: unknown node " + id);
  return n->parents;
}

nlohmann::json dag_to_json(const Dag& dag) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : dag.nodes) {
    nlohmann::json jn;
    jn["id"] = n.id;
    jn["kind"] = n.kind == NodeKind::Model ? "model" : "feature";
    if (n.dist) jn["dist"] = dist_to_json(*n.dist);
    if (n.model) jn["model"] = model_spec_to_json(*n.model);
    jn["parents"] = n.parents;
    if (n.prior) jn["prior"] = prior_to_json(*n.prior);
    if (!n.class_labels.empty()) jn["classes"] = n.class_labels;
    nodes.push_back(jn);
  }
  return nlohmann::json{{"nodes", nodes}, {"output", dag.output_node}};
}

Dag dag_from_json(const nlohmann::json& j) {
  Dag dag;
  for (const auto& jn : j.at("nodes")) {
    Node n;
    n.id = jn.at("id").get<std::string>();
    const std::string kind = jn.at("kind").get<std::string>();
    if (kind == "feature") {
      n.kind = NodeKind::Feature;
      if (jn.contains("dist")) n.dist = dist_from_json(jn.at("dist"));
    } else if (kind == "model") {
      n.kind = NodeKind::Model;
      if (jn.contains("model")) n.model = model_spec_from_json(jn.at("model"));
    } else {
      throw std::invalid_argument("unknown node kind: " + kind);
    }
    if (jn.contains("parents")) n.parents = jn.at("parents").get<std::vector<std::string>>();
    if (jn.contains("prior")) n.prior = prior_from_json(jn.at("prior"));
    if (jn.contains("classes")) n.class_labels = jn.at("classes").get<std::vector<std::string>>();
    dag.nodes.push_back(std::move(n));
  }
  dag.output_node = j.at("output").get<std::string>();
  return dag;
}

}  // namespace bnet
