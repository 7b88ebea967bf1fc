#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bnet/distributions.hpp"
#include "bnet/graph.hpp"

namespace bnet {
namespace banksim {

struct TxnRecord {
  int step = 0;
  std::string customer;
  int age = 0;  // category code; unknowns map to their own code
  std::string gender;
  std::string merchant;
  std::string category;
  double amount = 0.0;
  int fraud = 0;
};

struct LoadStats {
  std::size_t rows = 0;
  std::size_t fraud_rows = 0;
};

// Parses the BankSim CSV by header name; quoted fields are stripped, extra
// columns ignored. Throws on a missing required column or a bad amount.
std::vector<TxnRecord> load_csv(const std::string& path,
                                LoadStats* stats = nullptr);

struct FeatureRow {
  double x1 = 0.0;  // min-max normalized amount
  int x2 = 0;       // age code
  int x3 = 0;       // gender code
  int x4 = 0;       // merchant category code
  double x5 = 0.0;  // mean gap between txns with the merchant
  double x6 = 0.0;  // population std of the gap
  double x7 = 0.0;  // mean amount with the merchant
  double x8 = 0.0;  // population std of the amount
  double x9 = 0.0;  // merchant share of the customer's txns
  bool gap_imputed = false;
  int risk = 0;  // 0 low / 1 medium / 2 high
  int freq = 0;  // 0 rare / 1 infrequent / 2 regular
  int fraud = 0;
};

struct FeatureMeta {
  double amount_min = 0.0;
  double amount_max = 0.0;
  std::vector<int> age_codes;
  std::vector<std::string> genders;
  std::vector<std::string> categories;
  double global_mean_gap = 0.0;
  double global_std_gap = 0.0;
};

struct FeatureTable {
  std::vector<FeatureRow> rows;
  FeatureMeta meta;
};

// Per-(customer, merchant) aggregation of Table-style engineered features.
// Input order does not matter; rows come back in canonical (customer, step)
// order. Single-transaction pairs get x5/x6 imputed with the global means
// and flagged.
FeatureTable engineer_features(std::vector<TxnRecord> records);

struct LabelConfig {
  double rare_threshold = 0.08;
  double infrequent_threshold = 0.25;
};

// Deterministic stand-in labels: risk by terciles of per-category fraud rate
// (ties collapse downward), frequency by thresholds on x9.
void derive_labels(FeatureTable& table, const LabelConfig& config = {});

// Uniform subset of the majority class sized to the minority count.
std::vector<FeatureRow> downsample_majority(const std::vector<FeatureRow>& rows,
                                            std::uint64_t seed);

// DistSpec per feature name ("x1".."x9"), ready to install into the network.
std::map<std::string, DistSpec> fit_feature_distributions(
    const FeatureTable& table);

// The three-classifier hierarchy over x1..x9 (risk, frequency, decision).
Dag build_network(const FeatureTable& table);

// Synthetic stand-in with the BankSim schema and a planted category/frequency
// fraud signal; for tests and desk-scale runs without the real file.
std::vector<TxnRecord> generate_synthetic(std::size_t n_rows,
                                          std::uint64_t seed);

// Engineered-features CSV (documented column order, header row).
void write_features_csv(const FeatureTable& table, const std::string& path);
FeatureTable read_features_csv(const std::string& path);

}  // namespace banksim
}  // namespace bnet
