#include <doctest.h>

#include <random>

#include "odapsim/factorial.hpp"
#include "odapsim/sweep.hpp"

using namespace odapsim;

namespace {

double code(const DistributionPattern& p, const std::vector<int>& frags) {
  double v = 1.0;
  for (int f : frags) v *= p.on_product(f) ? 1.0 : -1.0;
  return v;
}

// Independent oracle: on a full +/-1 factorial the least-squares coefficient
// of a term is the signed average of the responses against that term's
// contrast column.
double contrast_coefficient(const std::vector<DistributionPattern>& patterns,
                            const std::vector<double>& means,
                            const std::vector<int>& frags) {
  double sum = 0.0;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    sum += code(patterns[i], frags) * means[i];
  }
  return sum / static_cast<double>(patterns.size());
}

std::vector<std::vector<int>> all_terms(int k, int max_level) {
  std::vector<std::vector<int>> terms;
  terms.push_back({});
  std::vector<int> combo;
  auto rec = [&](auto&& self, int start, int remaining) -> void {
    if (remaining == 0) {
      terms.push_back(combo);
      return;
    }
    for (int f = start; f <= k - remaining; ++f) {
      combo.push_back(f);
      self(self, f + 1, remaining - 1);
      combo.pop_back();
    }
  };
  for (int level = 1; level <= max_level; ++level) rec(rec, 0, level);
  return terms;
}

} // namespace

TEST_CASE("term count for k=8 and level 3 is 93") {
  const auto patterns = enumerate_patterns(8);
  std::vector<std::vector<double>> responses(patterns.size(), {1.0});
  const FactorModel model = fit_factorial_regression(patterns, responses, 3);
  CHECK(model.estimates.size() == 93); // 1 + 8 + 28 + 56
  CHECK(model.full_factorial);
  CHECK(model.warning.empty());
}

TEST_CASE("constant responses fit to a lone intercept") {
  const auto patterns = enumerate_patterns(4);
  std::vector<std::vector<double>> responses(patterns.size(), {42.5});
  const FactorModel model = fit_factorial_regression(patterns, responses, 3);
  CHECK(model.estimates[0].coefficient_s == doctest::Approx(42.5));
  for (std::size_t j = 1; j < model.estimates.size(); ++j) {
    CHECK(model.estimates[j].coefficient_s == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_FALSE(model.estimates[j].significant);
  }
  CHECK(select_significant(model, 0.05).empty());
}

TEST_CASE("noise-free synthetic surface is recovered exactly") {
  // y = 10 + 5*x1 - 3*x1*x2 over the full k=8 factorial.
  const auto patterns = enumerate_patterns(8);
  std::vector<std::vector<double>> responses;
  for (const auto& p : patterns) {
    responses.push_back({10.0 + 5.0 * code(p, {0}) - 3.0 * code(p, {0, 1})});
  }
  const FactorModel model = fit_factorial_regression(patterns, responses, 3);

  const FactorEstimate* intercept = model.find(FactorTerm{{}});
  const FactorEstimate* x1 = model.find(FactorTerm{{0}});
  const FactorEstimate* x1x2 = model.find(FactorTerm{{0, 1}});
  REQUIRE(intercept);
  REQUIRE(x1);
  REQUIRE(x1x2);
  CHECK(intercept->coefficient_s == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(x1->coefficient_s == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(x1x2->coefficient_s == doctest::Approx(-3.0).epsilon(1e-12));

  const auto significant = select_significant(model, 0.05);
  REQUIRE(significant.size() == 2);
  CHECK(significant[0].term == FactorTerm{{0}});
  CHECK(significant[1].term == FactorTerm{{0, 1}});
  CHECK(significant[0].term.name() == "f1");
  CHECK(significant[1].term.name() == "f1*f2");

  CHECK(select_significant(model, 0.0).empty());
}

TEST_CASE("least squares equals the contrast oracle on full factorials") {
  // Random but deterministic responses, k=6, every coefficient checked.
  const int k = 6;
  const auto patterns = enumerate_patterns(k);
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> dist(50.0, 250.0);
  std::vector<std::vector<double>> responses;
  std::vector<double> means;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    const double y = dist(rng);
    responses.push_back({y});
    means.push_back(y);
  }
  const FactorModel model = fit_factorial_regression(patterns, responses, 3);
  for (const auto& frags : all_terms(k, 3)) {
    const double expected = contrast_coefficient(patterns, means, frags);
    const FactorEstimate* est = model.find(FactorTerm{frags});
    REQUIRE(est);
    const double scale = std::max(1.0, std::abs(expected));
    CHECK(std::abs(est->coefficient_s - expected) <= 1e-9 * scale);
  }
}

TEST_CASE("saturated model reproduces every cell mean") {
  const int k = 4;
  const auto patterns = enumerate_patterns(k);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> dist(0.0, 10.0);
  std::vector<std::vector<double>> responses;
  for (std::size_t i = 0; i < patterns.size(); ++i) responses.push_back({dist(rng)});
  const FactorModel model = fit_factorial_regression(patterns, responses, k);
  double residual_sum = 0.0;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    const double r = model.predict(patterns[i]) - responses[i][0];
    CHECK(std::abs(r) < 1e-9);
    residual_sum += r;
  }
  CHECK(std::abs(residual_sum) < 1e-9);
}

TEST_CASE("replicated noisy responses give calibrated significance") {
  const int k = 5;
  const auto patterns = enumerate_patterns(k);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<std::vector<double>> responses;
  for (const auto& p : patterns) {
    const double base = 100.0 + 2.0 * code(p, {0});
    responses.push_back({base + noise(rng), base + noise(rng), base + noise(rng)});
  }
  const FactorModel model = fit_factorial_regression(patterns, responses, 3);
  CHECK(model.pooled_dof == static_cast<std::int64_t>(patterns.size()) * 2);
  CHECK(model.pooled_variance > 0);

  const FactorEstimate* x1 = model.find(FactorTerm{{0}});
  REQUIRE(x1);
  CHECK(x1->significant);
  CHECK(x1->coefficient_s == doctest::Approx(2.0).epsilon(0.01));
  CHECK(x1->p_value < 1e-9);
  CHECK(x1->std_err > 0);
}

TEST_CASE("non-full-factorial input fits with a warning") {
  const auto all = enumerate_patterns(2);
  const std::vector<DistributionPattern> subset = {all[0], all[1], all[2]};
  const std::vector<std::vector<double>> responses = {{1.0}, {2.0}, {3.0}};
  const FactorModel model = fit_factorial_regression(subset, responses, 1);
  CHECK_FALSE(model.full_factorial);
  CHECK(model.warning.find("full factorial") != std::string::npos);
}

TEST_CASE("rank-deficient designs name the collinear terms") {
  const auto all = enumerate_patterns(2);
  // Two identical rows cannot separate f2 from the intercept.
  const std::vector<DistributionPattern> dup = {all[0], all[0], all[1]};
  const std::vector<std::vector<double>> responses = {{1.0}, {1.0}, {2.0}};
  CHECK_THROWS_WITH_AS(fit_factorial_regression(dup, responses, 2),
                       doctest::Contains("collinear"), ValidationError);
}

TEST_CASE("input shape errors are rejected") {
  const auto patterns = enumerate_patterns(2);
  std::vector<std::vector<double>> responses(4, {1.0});
  CHECK_THROWS_AS(fit_factorial_regression({}, {}, 3), ValidationError);
  CHECK_THROWS_AS(fit_factorial_regression(patterns, {{1.0}}, 3), ValidationError);
  responses[2] = {};
  CHECK_THROWS_AS(fit_factorial_regression(patterns, responses, 3), ValidationError);
  responses[2] = {1.0, 2.0};
  CHECK_THROWS_AS(fit_factorial_regression(patterns, responses, 3), ValidationError);
}
