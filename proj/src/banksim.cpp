#include "bnet/banksim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bnet {
namespace banksim {

namespace {

// One CSV line into fields; handles single- or double-quoted cells.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  char quote = 0;
  for (char c : line) {
    if (in_quotes) {
      if (c == quote) {
        in_quotes = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '\'' || c == '"') {
      in_quotes = true;
      quote = c;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double pop_std(std::span<const double> v, double mean) {
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(v.size()));
}

double pop_mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

template <typename T>
int vocab_index(std::vector<T>& vocab, const T& value) {
  auto it = std::find(vocab.begin(), vocab.end(), value);
  if (it != vocab.end()) return static_cast<int>(it - vocab.begin());
  vocab.push_back(value);
  return static_cast<int>(vocab.size()) - 1;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

std::vector<TxnRecord> load_csv(const std::string& path, LoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);

  auto header = split_csv_line(line);
  std::map<std::string, int> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = static_cast<int>(i);
  for (const char* name :
       {"step", "customer", "age", "gender", "merchant", "category", "amount", "fraud"}) {
    if (!col.count(name)) {
      throw std::runtime_error(std::string("missing required column: ") + name);
    }
  }

  std::vector<TxnRecord> records;
  std::size_t fraud_rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() < header.size()) {
      throw std::runtime_error("short row at line " + std::to_string(line_no));
    }
    TxnRecord r;
    r.step = std::stoi(f[static_cast<std::size_t>(col["step"])]);
    r.customer = f[static_cast<std::size_t>(col["customer"])];
    const std::string& age = f[static_cast<std::size_t>(col["age"])];
    r.age = (age.empty() || age == "U") ? -1 : std::stoi(age);
    r.gender = f[static_cast<std::size_t>(col["gender"])];
    r.merchant = f[static_cast<std::size_t>(col["merchant"])];
    r.category = f[static_cast<std::size_t>(col["category"])];
    try {
      r.amount = std::stod(f[static_cast<std::size_t>(col["amount"])]);
    } catch (const std::exception&) {
      throw std::runtime_error("unparseable amount at line " + std::to_string(line_no));
    }
    r.fraud = std::stoi(f[static_cast<std::size_t>(col["fraud"])]);
    if (r.amount < 0) throw std::runtime_error("negative amount at line " + std::to_string(line_no));
    fraud_rows += r.fraud ? 1 : 0;
    records.push_back(std::move(r));
  }
  if (stats) {
    stats->rows = records.size();
    stats->fraud_rows = fraud_rows;
  }
  return records;
}

FeatureTable engineer_features(std::vector<TxnRecord> records) {
  if (records.empty()) throw std::invalid_argument("engineer_features: no records");
  // Canonical order makes the output independent of input shuffling.
  std::sort(records.begin(), records.end(), [](const TxnRecord& a, const TxnRecord& b) {
    return std::tie(a.customer, a.step, a.merchant, a.amount) <
           std::tie(b.customer, b.step, b.merchant, b.amount);
  });

  FeatureTable table;
  auto& meta = table.meta;
  meta.amount_min = records.front().amount;
  meta.amount_max = records.front().amount;
  for (const auto& r : records) {
    meta.amount_min = std::min(meta.amount_min, r.amount);
    meta.amount_max = std::max(meta.amount_max, r.amount);
  }
  double amount_span = meta.amount_max - meta.amount_min;
  if (amount_span <= 0.0) amount_span = 1.0;

  struct PairStats {
    std::vector<int> steps;
    std::vector<double> amounts;
    double x5 = 0.0, x6 = 0.0, x7 = 0.0, x8 = 0.0, x9 = 0.0;
    bool imputed = false;
  };
  std::map<std::string, std::map<std::string, PairStats>> by_customer;
  std::map<std::string, std::size_t> customer_total;
  for (const auto& r : records) {
    auto& p = by_customer[r.customer][r.merchant];
    p.steps.push_back(r.step);
    p.amounts.push_back(r.amount);
    ++customer_total[r.customer];
  }

  // Global gap statistics feed the single-transaction imputation.
  std::vector<double> all_gap_means, all_gap_stds;
  for (auto& [customer, merchants] : by_customer) {
    for (auto& [merchant, p] : merchants) {
      if (p.steps.size() < 2) continue;
      std::vector<double> gaps;
      for (std::size_t i = 1; i < p.steps.size(); ++i) {
        gaps.push_back(static_cast<double>(p.steps[i] - p.steps[i - 1]));
      }
      double m = pop_mean(gaps);
      all_gap_means.push_back(m);
      all_gap_stds.push_back(pop_std(gaps, m));
    }
  }
  meta.global_mean_gap = all_gap_means.empty() ? 0.0 : pop_mean(all_gap_means);
  meta.global_std_gap = all_gap_stds.empty() ? 0.0 : pop_mean(all_gap_stds);

  for (auto& [customer, merchants] : by_customer) {
    for (auto& [merchant, p] : merchants) {
      if (p.steps.size() >= 2) {
        std::vector<double> gaps;
        for (std::size_t i = 1; i < p.steps.size(); ++i) {
          gaps.push_back(static_cast<double>(p.steps[i] - p.steps[i - 1]));
        }
        p.x5 = pop_mean(gaps);
        p.x6 = pop_std(gaps, p.x5);
      } else {
        p.x5 = meta.global_mean_gap;
        p.x6 = meta.global_std_gap;
        p.imputed = true;
      }
      double am = pop_mean(p.amounts);
      p.x7 = am;
      p.x8 = pop_std(p.amounts, am);
      p.x9 = static_cast<double>(p.amounts.size()) /
             static_cast<double>(customer_total[customer]);
    }
  }

  table.rows.reserve(records.size());
  for (const auto& r : records) {
    const auto& p = by_customer[r.customer][r.merchant];
    FeatureRow row;
    row.x1 = (r.amount - meta.amount_min) / amount_span;
    row.x2 = vocab_index(meta.age_codes, r.age);
    row.x3 = vocab_index(meta.genders, r.gender);
    row.x4 = vocab_index(meta.categories, r.category);
    row.x5 = p.x5;
    row.x6 = p.x6;
    row.x7 = p.x7;
    row.x8 = p.x8;
    row.x9 = p.x9;
    row.gap_imputed = p.imputed;
    row.fraud = r.fraud;
    table.rows.push_back(row);
  }
  return table;
}

void derive_labels(FeatureTable& table, const LabelConfig& config) {
  // Risk: terciles of per-category empirical fraud rate; ties collapse
  // downward so an all-zero-fraud dataset labels everything low.
  std::size_t n_cats = table.meta.categories.size();
  std::vector<double> frauds(n_cats, 0.0), totals(n_cats, 0.0);
  for (const auto& r : table.rows) {
    frauds[static_cast<std::size_t>(r.x4)] += r.fraud;
    totals[static_cast<std::size_t>(r.x4)] += 1.0;
  }
  std::vector<double> rates(n_cats, 0.0);
  for (std::size_t c = 0; c < n_cats; ++c) {
    rates[c] = totals[c] > 0 ? frauds[c] / totals[c] : 0.0;
  }
  std::vector<double> sorted = rates;
  std::sort(sorted.begin(), sorted.end());
  double q1 = sorted[(n_cats - 1) / 3];
  double q2 = sorted[2 * (n_cats - 1) / 3];
  std::vector<int> risk(n_cats, 0);
  for (std::size_t c = 0; c < n_cats; ++c) {
    if (rates[c] <= q1) {
      risk[c] = 0;
    } else if (rates[c] <= q2) {
      risk[c] = 1;
    } else {
      risk[c] = 2;
    }
  }
  for (auto& r : table.rows) {
    r.risk = risk[static_cast<std::size_t>(r.x4)];
    if (r.x9 <= config.rare_threshold) {
      r.freq = 0;
    } else if (r.x9 <= config.infrequent_threshold) {
      r.freq = 1;
    } else {
      r.freq = 2;
    }
  }
}

std::vector<FeatureRow> downsample_majority(const std::vector<FeatureRow>& rows,
                                            std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    (rows[i].fraud ? pos : neg).push_back(i);
  }
  if (pos.empty() || neg.empty()) {
    throw std::invalid_argument("downsample_majority: both classes must be present");
  }
  auto& minority = pos.size() <= neg.size() ? pos : neg;
  auto& majority = pos.size() <= neg.size() ? neg : pos;
  // Partial Fisher-Yates draw without replacement.
  Rng rng(mix64(seed ^ 0xd0f5a17eull));
  for (std::size_t i = 0; i < minority.size(); ++i) {
    std::size_t j = i + static_cast<std::size_t>(
                            rng.uniform() * static_cast<double>(majority.size() - i));
    std::swap(majority[i], majority[std::min(j, majority.size() - 1)]);
  }
  std::vector<std::size_t> keep(minority.begin(), minority.end());
  keep.insert(keep.end(), majority.begin(),
              majority.begin() + static_cast<std::ptrdiff_t>(minority.size()));
  std::sort(keep.begin(), keep.end());
  std::vector<FeatureRow> out;
  out.reserve(keep.size());
  for (std::size_t i : keep) out.push_back(rows[i]);
  return out;
}

std::map<std::string, DistSpec> fit_feature_distributions(
    const FeatureTable& table) {
  if (table.rows.empty()) {
    throw std::invalid_argument("fit_feature_distributions: no rows");
  }
  auto column = [&](auto getter) {
    std::vector<double> v;
    v.reserve(table.rows.size());
    for (const auto& r : table.rows) v.push_back(getter(r));
    return v;
  };
  auto gamma_fit = [&](const char* name, std::vector<double> v) {
    // Zero gaps/stds happen for tight or single-visit pairs; floor them so
    // the positive-support fit goes through.
    for (double& x : v) x = std::max(x, 1e-3);
    try {
      return fit_gamma(v);
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string(name) + ": " + e.what());
    }
  };
  auto categorical_counts = [&](std::size_t cards, auto getter) {
    std::vector<std::uint64_t> counts(cards, 0);
    for (const auto& r : table.rows) ++counts[static_cast<std::size_t>(getter(r))];
    return counts;
  };

  std::map<std::string, DistSpec> out;
  out["x1"] = fit_truncated_normal(column([](const FeatureRow& r) { return r.x1; }), 0.0, 1.0);
  out["x2"] = fit_categorical(
      categorical_counts(table.meta.age_codes.size(), [](const FeatureRow& r) { return r.x2; }),
      std::nullopt);
  out["x3"] = fit_categorical(
      categorical_counts(table.meta.genders.size(), [](const FeatureRow& r) { return r.x3; }),
      std::nullopt);
  Categorical x4 = fit_categorical(
      categorical_counts(table.meta.categories.size(), [](const FeatureRow& r) { return r.x4; }),
      std::nullopt);
  x4.labels = table.meta.categories;
  x4.one_hot = true;
  out["x4"] = x4;
  out["x5"] = gamma_fit("x5", column([](const FeatureRow& r) { return r.x5; }));
  out["x6"] = gamma_fit("x6", column([](const FeatureRow& r) { return r.x6; }));
  out["x7"] = gamma_fit("x7", column([](const FeatureRow& r) { return r.x7; }));
  out["x8"] = gamma_fit("x8", column([](const FeatureRow& r) { return r.x8; }));
  out["x9"] = fit_truncated_normal(column([](const FeatureRow& r) { return r.x9; }), 0.0, 1.0);
  return out;
}

Dag build_network(const FeatureTable& table) {
  auto dists = fit_feature_distributions(table);
  Dag dag;
  for (const auto& name : {"x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "x9"}) {
    Node n;
    n.id = name;
    n.kind = NodeKind::Feature;
    n.dist = dists.at(name);
    dag.nodes.push_back(std::move(n));
  }

  const int n_age = static_cast<int>(table.meta.age_codes.size());
  const int n_gender = static_cast<int>(table.meta.genders.size());
  const int n_cat = static_cast<int>(table.meta.categories.size());

  Node m1;
  m1.id = "m1";
  m1.kind = NodeKind::Model;
  m1.parents = {"x1", "x4"};
  m1.class_labels = {"low", "medium", "high"};
  m1.model = ModelSpec{LinearSoftmax{},
                       3,
                       {{"x1", Encoding::Numeric, 0}, {"x4", Encoding::OneHot, n_cat}}};
  dag.nodes.push_back(std::move(m1));

  Node m2;
  m2.id = "m2";
  m2.kind = NodeKind::Model;
  m2.parents = {"x5", "x6", "x7", "x8", "x9"};
  m2.class_labels = {"rare", "infrequent", "regular"};
  m2.model = ModelSpec{LinearSoftmax{},
                       3,
                       {{"x5", Encoding::Numeric, 0},
                        {"x6", Encoding::Numeric, 0},
                        {"x7", Encoding::Numeric, 0},
                        {"x8", Encoding::Numeric, 0},
                        {"x9", Encoding::Numeric, 0}}};
  dag.nodes.push_back(std::move(m2));

  Node y;
  y.id = "y";
  y.kind = NodeKind::Model;
  y.parents = {"m1", "x1", "x2", "x3", "m2"};
  y.class_labels = {"normal", "fraud"};
  y.model = ModelSpec{LinearSoftmax{},
                      2,
                      {{"m1", Encoding::OneHot, 3},
                       {"x1", Encoding::Numeric, 0},
                       {"x2", Encoding::OneHot, n_age},
                       {"x3", Encoding::OneHot, n_gender},
                       {"m2", Encoding::OneHot, 3}}};
  dag.nodes.push_back(std::move(y));

  dag.output_node = "y";
  return dag;
}

std::vector<TxnRecord> generate_synthetic(std::size_t n_rows,
                                          std::uint64_t seed) {
  // Three category groups: H carries the planted fraud signal, M hosts the
  // regular "home" merchants, L only appears as occasional side spending.
  static const std::vector<std::string> kHigh = {
      "es_travel", "es_leisure", "es_sportsandtoys", "es_hotelservices", "es_tech"};
  static const std::vector<std::string> kHome = {
      "es_transportation", "es_food", "es_health", "es_wellnessandbeauty", "es_hyper"};
  static const std::vector<std::string> kSide = {
      "es_fashion", "es_barsandrestaurants", "es_home", "es_otherservices", "es_contents"};
  std::vector<std::string> all = kHigh;
  all.insert(all.end(), kHome.begin(), kHome.end());
  all.insert(all.end(), kSide.begin(), kSide.end());

  std::map<std::string, double> base_amount;
  for (std::size_t i = 0; i < all.size(); ++i) {
    base_amount[all[i]] = 18.0 + 9.0 * static_cast<double>(i);
  }

  Rng rng(mix64(seed ^ 0xba5e11ull));
  std::vector<TxnRecord> records;
  records.reserve(n_rows + 64);
  std::size_t customer_idx = 0;
  const std::vector<double> age_probs = {0.02, 0.1, 0.25, 0.25, 0.18, 0.1, 0.06, 0.03, 0.01};
  const std::vector<double> gender_probs = {0.46, 0.46, 0.04, 0.04};
  static const char* genders[] = {"M", "F", "E", "U"};

  while (records.size() < n_rows) {
    ++customer_idx;
    std::string customer = "C" + std::to_string(100000 + customer_idx);
    int age_draw = rng.categorical(age_probs);
    int age = age_draw == 8 ? -1 : age_draw;
    std::string gender = genders[rng.categorical(gender_probs)];

    int total = 25 + static_cast<int>(rng.uniform() * 21.0);  // 25..45
    const std::string& home_cat = kHome[static_cast<std::size_t>(rng.uniform() * kHome.size())];
    std::string home_merchant =
        "M_" + home_cat + "_" + std::to_string(static_cast<int>(rng.uniform() * 20.0));
    int home_count = static_cast<int>(std::round(total * (0.45 + 0.25 * rng.uniform())));

    bool has_burst = rng.uniform() < 0.5;
    std::string burst_cat, burst_merchant;
    int burst_count = 0;
    if (has_burst) {
      burst_cat = rng.uniform() < 0.5
                      ? kHigh[static_cast<std::size_t>(rng.uniform() * kHigh.size())]
                      : all[static_cast<std::size_t>(rng.uniform() * all.size())];
      burst_merchant =
          "M_" + burst_cat + "_" + std::to_string(40 + static_cast<int>(rng.uniform() * 20.0));
      burst_count = 3 + static_cast<int>(rng.uniform() * 5.0);  // 3..7
    }

    struct Planned {
      std::string merchant, category;
      int step;
      bool burst;
    };
    std::vector<Planned> plan;
    double cadence = 180.0 / std::max(home_count, 1);
    double t = 2.0 * rng.uniform() * cadence;
    for (int i = 0; i < home_count && t < 180.0; ++i) {
      plan.push_back({home_merchant, home_cat, static_cast<int>(t), false});
      t += cadence * (0.6 + 0.8 * rng.uniform());
    }
    if (has_burst) {
      int start = static_cast<int>(rng.uniform() * 160.0);
      int s = start;
      for (int i = 0; i < burst_count; ++i) {
        plan.push_back({burst_merchant, burst_cat, s, true});
        s += 1 + static_cast<int>(rng.uniform() * 3.0);
      }
    }
    while (static_cast<int>(plan.size()) < total) {
      const std::string& cat = all[static_cast<std::size_t>(rng.uniform() * all.size())];
      std::string merchant =
          "M_" + cat + "_" + std::to_string(70 + static_cast<int>(rng.uniform() * 30.0));
      int visits = rng.uniform() < 0.8 ? 1 : 2;
      int s = static_cast<int>(rng.uniform() * 178.0);
      for (int i = 0; i < visits && static_cast<int>(plan.size()) < total; ++i) {
        plan.push_back({merchant, cat, s + i * (2 + static_cast<int>(rng.uniform() * 8.0)), false});
      }
    }

    for (const auto& p : plan) {
      bool high_cat = std::find(kHigh.begin(), kHigh.end(), p.category) != kHigh.end();
      double logit = -6.3 + (high_cat ? 2.7 : 0.0) + (p.burst ? 3.8 : 0.0);
      bool fraud = rng.uniform() < sigmoid(logit);
      double amount = base_amount[p.category] * std::exp(0.55 * rng.normal());
      if (fraud) amount *= 1.5 + 0.8 * rng.uniform();
      TxnRecord r;
      r.step = std::min(p.step, 179);
      r.customer = customer;
      r.age = age;
      r.gender = gender;
      r.merchant = p.merchant;
      r.category = p.category;
      r.amount = std::round(amount * 100.0) / 100.0;
      r.fraud = fraud ? 1 : 0;
      records.push_back(std::move(r));
    }
  }
  records.resize(n_rows);
  return records;
}

void write_features_csv(const FeatureTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "x1,x2,x3,x4,x5,x6,x7,x8,x9,gap_imputed,m1,m2,y\n";
  char buf[256];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof(buf), "%.9g,%d,%d,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%d,%d,%d,%d\n",
                  r.x1, r.x2, r.x3, r.x4, r.x5, r.x6, r.x7, r.x8, r.x9,
                  r.gap_imputed ? 1 : 0, r.risk, r.freq, r.fraud);
    out << buf;
  }
}

FeatureTable read_features_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
  FeatureTable table;
  int max_x2 = -1, max_x3 = -1, max_x4 = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 13) throw std::runtime_error("bad features row in " + path);
    FeatureRow r;
    r.x1 = std::stod(f[0]);
    r.x2 = std::stoi(f[1]);
    r.x3 = std::stoi(f[2]);
    r.x4 = std::stoi(f[3]);
    r.x5 = std::stod(f[4]);
    r.x6 = std::stod(f[5]);
    r.x7 = std::stod(f[6]);
    r.x8 = std::stod(f[7]);
    r.x9 = std::stod(f[8]);
    r.gap_imputed = std::stoi(f[9]) != 0;
    r.risk = std::stoi(f[10]);
    r.freq = std::stoi(f[11]);
    r.fraud = std::stoi(f[12]);
    max_x2 = std::max(max_x2, r.x2);
    max_x3 = std::max(max_x3, r.x3);
    max_x4 = std::max(max_x4, r.x4);
    table.rows.push_back(r);
  }
  for (int i = 0; i <= max_x2; ++i) table.meta.age_codes.push_back(i);
  for (int i = 0; i <= max_x3; ++i) table.meta.genders.push_back("g" + std::to_string(i));
  for (int i = 0; i <= max_x4; ++i) table.meta.categories.push_back("c" + std::to_string(i));
  return table;
}

}  // namespace banksim
}  // namespace bnet
