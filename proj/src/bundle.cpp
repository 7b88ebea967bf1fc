#include "bnet/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bnet/rng.hpp"

namespace bnet {

namespace fs = std::filesystem;

const std::vector<double>& DataTable::column(const std::string& id) const {
  auto it = columns.find(id);
  if (it == columns.end()) {
    throw std::invalid_argument("data table: missing column " + id);
  }
  return it->second;
}

DataTable read_data_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> names;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) names.push_back(cell);
  }
  DataTable table;
  for (const auto& n : names) table.columns[n] = {};

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t k = 0;
    while (std::getline(ss, cell, ',')) {
      if (k >= names.size()) break;
      try {
        table.columns[names[k]].push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error(path + ": unparseable value at line " +
                                 std::to_string(line_no));
      }
      ++k;
    }
    if (k != names.size()) {
      throw std::runtime_error(path + ": wrong field count at line " +
                               std::to_string(line_no));
    }
    ++table.n_rows;
  }
  return table;
}

void write_data_csv(const DataTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  bool first = true;
  for (const auto& [name, col] : table.columns) {
    if (col.size() != table.n_rows) {
      throw std::invalid_argument("data table: ragged column " + name);
    }
    out << (first ? "" : ",") << name;
    first = false;
  }
  out << "\n";
  char buf[48];
  for (std::size_t i = 0; i < table.n_rows; ++i) {
    first = true;
    for (const auto& [name, col] : table.columns) {
      std::snprintf(buf, sizeof(buf), "%.17g", col[i]);
      out << (first ? "" : ",") << buf;
      first = false;
    }
    out << "\n";
  }
}

namespace {

DistSpec refit_dist(const Dag& dag, const Node& node, const DataTable& data) {
  const auto& col = data.column(node.id);
  if (col.empty()) throw std::invalid_argument("no data for node " + node.id);
  const DistSpec& declared = *node.dist;

  if (std::holds_alternative<Categorical>(declared)) {
    const auto& c = std::get<Categorical>(declared);
    std::vector<std::uint64_t> counts(c.probs.size(), 0);
    for (double v : col) {
      auto k = static_cast<std::size_t>(v);
      if (k >= counts.size()) {
        throw std::invalid_argument("out-of-range category in column " + node.id);
      }
      ++counts[k];
    }
    Categorical fitted = fit_categorical(counts, node.prior);
    fitted.labels = c.labels;
    fitted.one_hot = c.one_hot;
    return fitted;
  }
  if (std::holds_alternative<TruncatedNormal>(declared)) {
    const auto& t = std::get<TruncatedNormal>(declared);
    return fit_truncated_normal(col, t.lo, t.hi);
  }
  if (std::holds_alternative<Gamma>(declared)) {
    // Degenerate zeros (e.g. single-visit gap stds) get floored so the
    // positive-support fit goes through.
    std::vector<double> v = col;
    for (double& x : v) x = std::max(x, 1e-3);
    return fit_gamma(v);
  }

  const auto& cc = std::get<ConditionalCategorical>(declared);
  std::vector<const std::vector<double>*> pcols;
  for (const auto& p : node.parents) pcols.push_back(&data.column(p));
  std::size_t n_rows_table = cc.table.size();
  std::size_t n_cats = cc.table.empty() ? 0 : cc.table[0].size();
  std::vector<std::vector<std::uint64_t>> counts(
      n_rows_table, std::vector<std::uint64_t>(n_cats, 0));
  for (std::size_t i = 0; i < col.size(); ++i) {
    std::size_t row = 0;
    for (std::size_t k = 0; k < pcols.size(); ++k) {
      row = row * static_cast<std::size_t>(cc.parent_cards[k]) +
            static_cast<std::size_t>((*pcols[k])[i]);
    }
    if (row >= n_rows_table || static_cast<std::size_t>(col[i]) >= n_cats) {
      throw std::invalid_argument("out-of-range value in column " + node.id);
    }
    ++counts[row][static_cast<std::size_t>(col[i])];
  }
  ConditionalCategorical fitted = cc;
  for (std::size_t r = 0; r < n_rows_table; ++r) {
    try {
      fitted.table[r] = fit_categorical(counts[r], node.prior).probs;
    } catch (const std::exception&) {
      throw std::invalid_argument("node " + node.id + ": parent configuration " +
                                  std::to_string(r) +
                                  " has no data and no prior");
    }
  }
  (void)dag;
  return fitted;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::vector<int> int_labels(const std::vector<double>& col,
                            const std::string& id, int n_classes) {
  std::vector<int> out;
  out.reserve(col.size());
  for (double v : col) {
    int k = static_cast<int>(v);
    if (k < 0 || k >= n_classes) {
      throw std::invalid_argument("label out of range in column " + id);
    }
    out.push_back(k);
  }
  return out;
}

}  // namespace

TrainSummary train_bundle(Dag& dag, const DataTable& data,
                          const TrainBundleOptions& opts) {
  auto res = validate(dag);
  if (!res.ok()) {
    throw std::invalid_argument("train_bundle: invalid network: " +
                                res.violations.front().rule);
  }
  if (data.n_rows == 0) throw std::invalid_argument("train_bundle: empty table");

  TrainSummary summary;
  // Predicted-class columns accumulate here: feature columns come straight
  // from the data, model columns from each freshly trained model.
  std::map<std::string, std::vector<double>> cols;
  for (const auto& id : topological_order(dag)) {
    Node* node = dag.find(id);
    if (node->kind == NodeKind::Feature) {
      node->dist = refit_dist(dag, *node, data);
      cols[id] = data.column(id);
      continue;
    }

    std::vector<const std::vector<double>*> pcols;
    for (const auto& p : node->parents) pcols.push_back(&cols.at(p));
    std::vector<std::vector<double>> rows;
    rows.reserve(data.n_rows);
    std::vector<double> raw(node->parents.size());
    for (std::size_t i = 0; i < data.n_rows; ++i) {
      for (std::size_t k = 0; k < pcols.size(); ++k) raw[k] = (*pcols[k])[i];
      rows.push_back(encode_inputs(*node->model, raw));
    }
    auto labels = int_labels(data.column(id), id, node->model->n_classes);

    std::vector<std::vector<double>> train_rows;
    std::vector<int> train_labels;
    if (opts.balance_output && id == dag.output_node) {
      std::vector<std::size_t> pos, neg;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        (labels[i] > 0 ? pos : neg).push_back(i);
      }
      if (pos.empty() || neg.empty()) {
        throw std::invalid_argument("balance_output: output labels are single-class");
      }
      auto& minority = pos.size() <= neg.size() ? pos : neg;
      auto& majority = pos.size() <= neg.size() ? neg : pos;
      Rng rng(mix64(opts.seed ^ 0xba1a9ceull));
      for (std::size_t i = 0; i < minority.size(); ++i) {
        std::size_t j = i + static_cast<std::size_t>(
                                rng.uniform() * static_cast<double>(majority.size() - i));
        std::swap(majority[i], majority[std::min(j, majority.size() - 1)]);
      }
      std::vector<std::size_t> keep(minority.begin(), minority.end());
      keep.insert(keep.end(), majority.begin(),
                  majority.begin() + static_cast<std::ptrdiff_t>(minority.size()));
      std::sort(keep.begin(), keep.end());
      for (std::size_t i : keep) {
        train_rows.push_back(rows[i]);
        train_labels.push_back(labels[i]);
      }
    } else {
      train_rows = rows;
      train_labels = labels;
    }

    TrainConfig config = opts.config;
    config.seed = child_seed(opts.seed, fnv1a(id));
    auto trained = std::make_shared<TrainedModel>(
        train(*node->model, train_rows, train_labels, config));

    std::vector<double> pred(data.n_rows);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.n_rows; ++i) {
      int cls = trained->predict_class(rows[i]);
      pred[i] = static_cast<double>(cls);
      correct += cls == labels[i] ? 1 : 0;
    }
    summary.accuracy[id] =
        static_cast<double>(correct) / static_cast<double>(data.n_rows);
    node->trained = std::move(trained);
    if (opts.gold_inputs && data.columns.count(id)) {
      cols[id] = data.column(id);
    } else {
      cols[id] = std::move(pred);
    }
  }
  return summary;
}

TrainingData to_training_data(const Dag& dag, const DataTable& data) {
  TrainingData out;
  out.columns.n_rows = data.n_rows;
  for (const auto& node : dag.nodes) {
    auto it = data.columns.find(node.id);
    if (node.kind == NodeKind::Feature) {
      if (it == data.columns.end()) {
        throw std::invalid_argument("training data: missing feature column " + node.id);
      }
      out.columns.columns[node.id] = it->second;
    } else if (it != data.columns.end()) {
      out.columns.columns[node.id] = it->second;
      out.model_labels[node.id] =
          int_labels(it->second, node.id, node.model ? node.model->n_classes : 2);
    }
  }
  return out;
}

LabeledData to_labeled_data(const Dag& dag, const DataTable& data) {
  LabeledData out;
  out.features.n_rows = data.n_rows;
  for (const auto& node : dag.nodes) {
    if (node.kind != NodeKind::Feature) continue;
    out.features.columns[node.id] = data.column(node.id);
  }
  const Node* output = dag.find(dag.output_node);
  if (!output) throw std::invalid_argument("labeled data: no output node");
  out.labels = int_labels(data.column(dag.output_node), dag.output_node,
                          output->model ? output->model->n_classes : 2);
  return out;
}

namespace {

std::string fnv1a_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(bytes)));
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void save_bundle(const std::string& dir, const Dag& dag,
                 const DataTable& training_data, std::uint64_t seed) {
  fs::create_directories(fs::path(dir) / "models");
  std::string network = dag_to_json(dag).dump(2);
  write_text(fs::path(dir) / "network.json", network);

  std::string digest_input = network;
  for (const auto& node : dag.nodes) {
    if (node.kind != NodeKind::Model) continue;
    if (!node.trained) {
      throw std::invalid_argument("save_bundle: untrained model " + node.id);
    }
    std::string text = model_to_json(*node.trained).dump(2);
    digest_input += text;
    write_text(fs::path(dir) / "models" / (node.id + ".json"), text);
  }
  write_data_csv(training_data, (fs::path(dir) / "training_data.csv").string());

  nlohmann::json manifest;
  manifest["version"] = 1;
  manifest["seed"] = seed;
  manifest["fingerprint"] = fnv1a_hex(digest_input);
  write_text(fs::path(dir) / "manifest.json", manifest.dump(2));
}

Bundle load_bundle(const std::string& dir) {
  Bundle bundle;
  bundle.dag = dag_from_json(
      nlohmann::json::parse(read_text(fs::path(dir) / "network.json")));
  for (auto& node : bundle.dag.nodes) {
    if (node.kind != NodeKind::Model) continue;
    auto path = fs::path(dir) / "models" / (node.id + ".json");
    node.trained = std::make_shared<TrainedModel>(
        model_from_json(nlohmann::json::parse(read_text(path))));
  }
  bundle.training_data =
      read_data_csv((fs::path(dir) / "training_data.csv").string());
  auto manifest = nlohmann::json::parse(read_text(fs::path(dir) / "manifest.json"));
  bundle.seed = manifest.at("seed").get<std::uint64_t>();
  bundle.fingerprint = manifest.at("fingerprint").get<std::string>();
  return bundle;
}

}  // namespace bnet
