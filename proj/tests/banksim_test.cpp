#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "bnet/banksim.hpp"
#include "bnet/rng.hpp"

using namespace bnet;
using namespace bnet::banksim;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << body;
  return path.string();
}

const char* kThreeRows =
    "step,customer,age,gender,zipcodeOri,merchant,zipMerchant,category,amount,fraud\n"
    "\"1\",\"C1\",\"3\",\"F\",\"28007\",\"M1\",\"28007\",\"es_transportation\",\"35.10\",\"0\"\n"
    "\"2\",\"C2\",\"U\",\"M\",\"28007\",\"M2\",\"28007\",\"es_travel\",\"120.50\",\"1\"\n"
    "\"5\",\"C1\",\"3\",\"F\",\"28007\",\"M1\",\"28007\",\"es_transportation\",\"12.00\",\"0\"\n";

}  // namespace

TEST_CASE("csv fixture round trips with quotes and extra columns") {
  auto path = write_temp("bnet_banksim_three.csv", kThreeRows);
  LoadStats stats;
  auto records = load_csv(path, &stats);
  REQUIRE(records.size() == 3);
  CHECK(stats.rows == 3);
  CHECK(stats.fraud_rows == 1);
  CHECK(records[0].step == 1);
  CHECK(records[0].customer == "C1");
  CHECK(records[0].age == 3);
  CHECK(records[0].gender == "F");
  CHECK(records[0].merchant == "M1");
  CHECK(records[0].category == "es_transportation");
  CHECK(records[0].amount == doctest::Approx(35.10));
  CHECK(records[0].fraud == 0);
  CHECK(records[1].age == -1);  // unknown keeps its own code
  CHECK(records[1].fraud == 1);
}

TEST_CASE("missing required column is named") {
  auto path = write_temp("bnet_banksim_noamount.csv",
                         "step,customer,age,gender,merchant,category,fraud\n"
                         "1,C1,3,F,M1,es_travel,0\n");
  try {
    load_csv(path);
    FAIL("expected a schema error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("amount") != std::string::npos);
  }
  CHECK_THROWS(load_csv("/nonexistent/banksim.csv"));
}

TEST_CASE("gap and share features follow the hand arithmetic") {
  std::vector<TxnRecord> records;
  // Customer C1: merchant M1 at steps 1, 3, 7 and seven other one-merchant
  // visits, total 10 transactions.
  for (int step : {1, 3, 7}) {
    records.push_back({step, "C1", 2, "F", "M1", "es_food", 10.0, 0});
  }
  for (int i = 0; i < 7; ++i) {
    records.push_back({10 + i, "C1", 2, "F", "Mx" + std::to_string(i),
                       "es_food", 20.0, 0});
  }
  records.push_back({1, "C2", 4, "M", "M9", "es_travel", 100.0, 0});

  auto table = engineer_features(records);
  REQUIRE(table.rows.size() == 11);
  const FeatureRow* m1_row = nullptr;
  for (const auto& r : table.rows) {
    if (std::abs(r.x9 - 0.3) < 1e-12 && !r.gap_imputed) m1_row = &r;
  }
  REQUIRE(m1_row != nullptr);
  // Gaps (2, 4): mean 3, population std 1.
  CHECK(m1_row->x5 == doctest::Approx(3.0));
  CHECK(m1_row->x6 == doctest::Approx(1.0));
  CHECK(m1_row->x7 == doctest::Approx(10.0));
  CHECK(m1_row->x8 == doctest::Approx(0.0));
  // Min-max normalized amount: min 10, max 100.
  CHECK(m1_row->x1 == doctest::Approx(0.0));

  // Single-visit merchants get imputed gaps and the flag.
  int imputed = 0;
  for (const auto& r : table.rows) imputed += r.gap_imputed ? 1 : 0;
  CHECK(imputed == 8);
}

TEST_CASE("feature engineering is permutation invariant") {
  auto synth = generate_synthetic(2000, 3);
  auto table_a = engineer_features(synth);
  std::shuffle(synth.begin(), synth.end(), std::mt19937(9));
  auto table_b = engineer_features(synth);
  REQUIRE(table_a.rows.size() == table_b.rows.size());
  for (std::size_t i = 0; i < table_a.rows.size(); ++i) {
    CHECK(table_a.rows[i].x5 == table_b.rows[i].x5);
    CHECK(table_a.rows[i].x9 == table_b.rows[i].x9);
    CHECK(table_a.rows[i].x1 == table_b.rows[i].x1);
  }
}

TEST_CASE("engineered features stay in their documented ranges") {
  auto table = engineer_features(generate_synthetic(3000, 5));
  for (const auto& r : table.rows) {
    CHECK(r.x9 > 0.0);
    CHECK(r.x9 <= 1.0);
    CHECK(r.x5 >= 0.0);
    CHECK(r.x6 >= 0.0);
    CHECK(r.x8 >= 0.0);
    CHECK(r.x1 >= 0.0);
    CHECK(r.x1 <= 1.0);
  }
}

TEST_CASE("label thresholds and tercile degeneracy") {
  auto table = engineer_features(generate_synthetic(5000, 11));
  derive_labels(table);
  for (const auto& r : table.rows) {
    if (r.x9 <= 0.08) CHECK(r.freq == 0);
    else if (r.x9 <= 0.25) CHECK(r.freq == 1);
    else CHECK(r.freq == 2);
    CHECK(r.risk >= 0);
    CHECK(r.risk <= 2);
  }

  // All-zero fraud collapses every risk tercile downward to low.
  auto clean = table;
  for (auto& r : clean.rows) r.fraud = 0;
  derive_labels(clean);
  for (const auto& r : clean.rows) CHECK(r.risk == 0);
}

TEST_CASE("downsampling balances classes and keeps the minority") {
  auto table = engineer_features(generate_synthetic(20000, 13));
  std::size_t fraud = 0;
  for (const auto& r : table.rows) fraud += r.fraud;
  REQUIRE(fraud > 0);
  REQUIRE(fraud < table.rows.size() / 2);

  auto balanced = downsample_majority(table.rows, 17);
  std::size_t bal_fraud = 0;
  for (const auto& r : balanced) bal_fraud += r.fraud;
  CHECK(balanced.size() == 2 * fraud);
  CHECK(bal_fraud == fraud);

  auto balanced2 = downsample_majority(table.rows, 18);
  CHECK(balanced2.size() == balanced.size());

  std::vector<FeatureRow> single(5, table.rows[0]);
  for (auto& r : single) r.fraud = 0;
  CHECK_THROWS(downsample_majority(single, 1));
}

TEST_CASE("fitted distributions recover a known gamma column") {
  auto table = engineer_features(generate_synthetic(5000, 19));
  derive_labels(table);
  Rng rng(23);
  for (auto& r : table.rows) r.x5 = rng.gamma(2.0, 1.0);
  auto dists = fit_feature_distributions(table);
  const auto& g = std::get<Gamma>(dists.at("x5"));
  CHECK(std::abs(g.shape - 2.0) / 2.0 <= 0.05);
  CHECK(std::abs(g.rate - 1.0) <= 0.05);
  CHECK(std::holds_alternative<TruncatedNormal>(dists.at("x1")));
  CHECK(std::holds_alternative<TruncatedNormal>(dists.at("x9")));
  CHECK(std::get<Categorical>(dists.at("x4")).one_hot);

  // Constant column errors carry the feature name.
  for (auto& r : table.rows) r.x8 = 1.0;
  try {
    fit_feature_distributions(table);
    FAIL("expected a zero-variance error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("x8") != std::string::npos);
  }
}

TEST_CASE("network wiring matches the three-classifier hierarchy") {
  auto table = engineer_features(generate_synthetic(5000, 29));
  derive_labels(table);
  auto dag = build_network(table);
  CHECK(validate(dag).ok());
  CHECK(dag.output_node == "y");
  CHECK(dag.find("m1")->parents == std::vector<std::string>{"x1", "x4"});
  CHECK(dag.find("m2")->parents ==
        std::vector<std::string>{"x5", "x6", "x7", "x8", "x9"});
  CHECK(dag.find("y")->parents ==
        std::vector<std::string>{"m1", "x1", "x2", "x3", "m2"});
}

TEST_CASE("synthetic generator has the documented shape") {
  auto a = generate_synthetic(50000, 7);
  auto b = generate_synthetic(50000, 7);
  CHECK(a.size() >= 50000);
  CHECK(a.size() == b.size());
  CHECK(a[0].customer == b[0].customer);

  std::size_t fraud = 0;
  for (const auto& r : a) {
    CHECK(r.amount >= 0.0);
    CHECK(r.step >= 0);
    fraud += r.fraud;
  }
  double rate = static_cast<double>(fraud) / static_cast<double>(a.size());
  CHECK(rate > 0.002);
  CHECK(rate < 0.08);
}

TEST_CASE("features csv round trips") {
  auto table = engineer_features(generate_synthetic(2000, 31));
  derive_labels(table);
  auto path = (std::filesystem::temp_directory_path() / "bnet_features.csv").string();
  write_features_csv(table, path);
  auto back = read_features_csv(path);
  REQUIRE(back.rows.size() == table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    CHECK(back.rows[i].x2 == table.rows[i].x2);
    CHECK(back.rows[i].x4 == table.rows[i].x4);
    CHECK(back.rows[i].risk == table.rows[i].risk);
    CHECK(back.rows[i].freq == table.rows[i].freq);
    CHECK(std::abs(back.rows[i].x9 - table.rows[i].x9) <= 1e-7);
  }
}
