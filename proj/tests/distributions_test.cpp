#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "bnet/distributions.hpp"
#include "bnet/rng.hpp"

using namespace bnet;

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Simpson's rule over [lo, hi].
template <typename F>
double integrate(F f, double lo, double hi, int n = 20000) {
  double h = (hi - lo) / n;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("categorical point mass samples one class") {
  Rng rng(1);
  auto draws = sample(Categorical{{1.0, 0.0, 0.0}, {}, false}, rng, 100);
  for (double d : draws) CHECK(d == 0.0);
}

TEST_CASE("categorical empirical frequencies match spec") {
  Rng rng(42);
  Categorical c{{0.1, 0.2, 0.7}, {}, false};
  auto draws = sample(c, rng, 100000);
  std::vector<double> freq(3, 0.0);
  for (double d : draws) freq[static_cast<std::size_t>(d)] += 1e-5;
  CHECK(freq[0] == doctest::Approx(0.1).epsilon(0.1));
  CHECK(std::abs(freq[0] - 0.1) < 0.01);
  CHECK(std::abs(freq[1] - 0.2) < 0.01);
  CHECK(std::abs(freq[2] - 0.7) < 0.01);
}

TEST_CASE("truncated normal stays inside support") {
  Rng rng(3);
  TruncatedNormal t{0.0, 1.0, -1.0, 1.0};
  auto draws = sample(t, rng, 10000);
  for (double d : draws) {
    CHECK(d >= -1.0);
    CHECK(d <= 1.0);
  }
}

TEST_CASE("gamma samples are positive and mean-consistent") {
  Rng rng(4);
  Gamma g{2.0, 3.0};
  auto draws = sample(g, rng, 100000);
  for (double d : draws) CHECK(d > 0.0);
  // mean = shape/rate = 2/3, var = shape/rate^2; 3 standard errors.
  double se = std::sqrt(2.0 / 9.0 / 100000.0);
  CHECK(std::abs(mean_of(draws) - 2.0 / 3.0) < 3.0 * se);
}

TEST_CASE("log_prob basics") {
  CHECK(log_prob(Categorical{{0.5, 0.5}, {}, false}, 0.0) ==
        doctest::Approx(std::log(0.5)));
  CHECK(log_prob(Gamma{1.0, 1.0}, 0.0) == -std::numeric_limits<double>::infinity());
  CHECK(log_prob(TruncatedNormal{0, 1, -1, 1}, 2.0) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("truncated normal density matches quadrature normalization") {
  TruncatedNormal t{0.0, 1.0, -1.0, 1.0};
  auto density = [&](double x) { return std::exp(log_prob(DistSpec{t}, x)); };
  // Density integrates to 1 over the support.
  CHECK(integrate(density, -1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
  // log density at 0 differs from the untruncated normal by -ln Z.
  double z = integrate(
      [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); },
      -1.0, 1.0);
  double untruncated = -0.5 * std::log(2.0 * M_PI);
  CHECK(log_prob(DistSpec{t}, 0.0) ==
        doctest::Approx(untruncated - std::log(z)).epsilon(1e-6));
}

TEST_CASE("categorical log_prob exponentials sum to one") {
  Categorical c{{0.1, 0.2, 0.7}, {}, false};
  double total = 0.0;
  for (int k = 0; k < 3; ++k) total += std::exp(log_prob(DistSpec{c}, k));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fit_categorical closed forms") {
  std::vector<std::uint64_t> counts = {3, 1};
  auto posterior = fit_categorical(counts, PriorSpec{{1.0, 1.0}});
  CHECK(posterior.probs[0] == doctest::Approx(4.0 / 6.0));
  CHECK(posterior.probs[1] == doctest::Approx(2.0 / 6.0));

  std::vector<std::uint64_t> mle_counts = {5, 0, 0};
  auto mle = fit_categorical(mle_counts, std::nullopt);
  CHECK(mle.probs == std::vector<double>{1.0, 0.0, 0.0});

  std::vector<std::uint64_t> zero = {0, 0};
  auto prior_mean = fit_categorical(zero, PriorSpec{{2.0, 2.0}});
  CHECK(prior_mean.probs[0] == doctest::Approx(0.5));

  CHECK_THROWS(fit_categorical(zero, std::nullopt));
}

TEST_CASE("fit_truncated_normal moments and errors") {
  std::vector<double> two = {0.2, 0.4};
  auto t = fit_truncated_normal(two, 0.0, 1.0);
  CHECK(t.mu == doctest::Approx(0.3));
  CHECK(t.sigma == doctest::Approx(0.1));

  std::vector<double> outside = {0.5, 1.5};
  CHECK_THROWS(fit_truncated_normal(outside, 0.0, 1.0));
  std::vector<double> constant = {0.5, 0.5, 0.5};
  CHECK_THROWS(fit_truncated_normal(constant, 0.0, 1.0));

  Rng rng(9);
  TruncatedNormal wide{0.5, 0.05, 0.0, 1.0};  // effectively untruncated
  auto draws = sample(wide, rng, 10000);
  auto fitted = fit_truncated_normal(draws, 0.0, 1.0);
  CHECK(std::abs(fitted.mu - 0.5) / 0.5 < 0.05);
  CHECK(std::abs(fitted.sigma - 0.05) / 0.05 < 0.05);
}

TEST_CASE("fit_gamma moments and self-consistency") {
  // mean 4, var 2 -> shape 8, rate 2; data picked to have those moments.
  std::vector<double> data = {4.0 - std::sqrt(2.0), 4.0 + std::sqrt(2.0)};
  auto g = fit_gamma(data);
  CHECK(g.shape == doctest::Approx(8.0));
  CHECK(g.rate == doctest::Approx(2.0));

  std::vector<double> constant = {5.0, 5.0, 5.0};
  CHECK_THROWS(fit_gamma(constant));

  Rng rng(11);
  auto draws = sample(Gamma{2.0, 3.0}, rng, 100000);
  auto fitted = fit_gamma(draws);
  CHECK(std::abs(fitted.shape - 2.0) / 2.0 < 0.05);
  CHECK(std::abs(fitted.rate - 3.0) / 3.0 < 0.05);
}

TEST_CASE("kl divergence values") {
  std::vector<double> p = {0.5, 0.5};
  CHECK(kl_divergence(p, p) == doctest::Approx(0.0));

  std::vector<double> q = {0.25, 0.75};
  double expected = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
  CHECK(kl_divergence(p, q) == doctest::Approx(expected).epsilon(1e-12));

  std::vector<double> degenerate = {1.0, 0.0};
  CHECK(std::isinf(kl_divergence(p, degenerate)));
}

TEST_CASE("kl non-negativity over random simplex pairs") {
  Rng rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    int k = 2 + static_cast<int>(rng.uniform() * 4.0);
    std::vector<double> p(k), q(k);
    double sp = 0, sq = 0;
    for (int i = 0; i < k; ++i) {
      p[i] = rng.gamma(1.0, 1.0) + 1e-12;
      q[i] = rng.gamma(1.0, 1.0) + 1e-12;
      sp += p[i];
      sq += q[i];
    }
    for (int i = 0; i < k; ++i) {
      p[i] /= sp;
      q[i] /= sq;
    }
    CHECK(kl_divergence(p, q) >= -1e-12);
  }
}

TEST_CASE("kl on histograms requires identical bin edges") {
  Histogram a{{0.0, 0.5, 1.0}, {5, 5}};
  Histogram b{{0.0, 0.5, 1.0}, {2, 8}};
  CHECK(kl_divergence(a, b) > 0.0);
  Histogram c{{0.0, 0.4, 1.0}, {2, 8}};
  CHECK_THROWS(kl_divergence(a, c));
}

TEST_CASE("histogram frequencies normalize") {
  Histogram h{{0.0, 0.5, 1.0}, {3, 1}};
  auto f = h.frequencies();
  CHECK(f[0] == doctest::Approx(0.75));
  CHECK(f[1] == doctest::Approx(0.25));
  CHECK(h.total() == 4);
}

TEST_CASE("conditional categorical samples per configuration") {
  ConditionalCategorical cc;
  cc.parent_cards = {2};
  cc.table = {{1.0, 0.0}, {0.0, 1.0}};
  Rng rng(5);
  std::vector<int> config = {0};
  CHECK(sample_conditional(DistSpec{cc}, config, rng) == 0.0);
  config[0] = 1;
  CHECK(sample_conditional(DistSpec{cc}, config, rng) == 1.0);
  CHECK_THROWS(sample(DistSpec{cc}, rng, 1));
}

TEST_CASE("dist validation catches broken simplexes") {
  CHECK_THROWS(validate_dist(Categorical{{0.5, 0.4}, {}, false}));
  CHECK_THROWS(validate_dist(TruncatedNormal{0.0, -1.0, 0.0, 1.0}));
  CHECK_THROWS(validate_dist(TruncatedNormal{0.0, 1.0, 1.0, 0.0}));
  CHECK_THROWS(validate_dist(Gamma{0.0, 1.0}));
  CHECK_NOTHROW(validate_dist(Categorical{{0.1, 0.2, 0.7}, {}, false}));
}

TEST_CASE("dist json round trip") {
  DistSpec specs[] = {
      Categorical{{0.1, 0.2, 0.7}, {"a", "b", "c"}, false},
      Categorical{{0.3, 0.7}, {}, true},
      TruncatedNormal{0.3, 0.1, 0.0, 1.0},
      Gamma{8.0, 2.0},
      ConditionalCategorical{{2}, {{0.2, 0.8}, {0.9, 0.1}}, {}},
  };
  for (const auto& d : specs) {
    auto j = dist_to_json(d);
    auto back = dist_from_json(j);
    CHECK(dist_to_json(back) == j);
  }
}

TEST_CASE("dirichlet helpers") {
  std::vector<double> conc = {2.0, 2.0};
  auto m = dirichlet_mean(conc);
  CHECK(m[0] == doctest::Approx(0.5));
  // Dirichlet(1,1) is uniform on the simplex: log pdf = 0.
  std::vector<double> flat = {1.0, 1.0};
  std::vector<double> probs = {0.3, 0.7};
  CHECK(dirichlet_log_pdf(flat, probs) == doctest::Approx(0.0));
}
