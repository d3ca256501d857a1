#include <random>

#include "doctest.h"
#include "hotspot/metrics.hpp"
#include "support/fixtures.hpp"

using namespace hotspot;
using namespace hotspot::testing;

namespace {

// F1 straight from the prediction and label lists.
double brute_force_f1(const std::vector<int>& predicted, const std::vector<int>& actual) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] && actual[i]) tp += 1;
    if (predicted[i] && !actual[i]) fp += 1;
    if (!predicted[i] && actual[i]) fn += 1;
  }
  if (tp == 0) return 0.0;
  const double precision = tp / (tp + fp), recall = tp / (tp + fn);
  return 2 * precision * recall / (precision + recall);
}

}  // namespace

TEST_CASE("confusion and f1 examples") {
  const std::vector<double> probs{0.9, 0.2, 0.5, 0.49, 0.7, 0.1};
  const std::vector<int> labels{1, 0, 0, 1, 1, 0};
  const auto c = confusion(probs, labels);
  CHECK(c == ConfusionCounts{2, 1, 1, 2});
  CHECK(c.total() == 6);
  CHECK(f1(c) == doctest::Approx(2.0 / 3.0));

  CHECK(f1({0, 0, 0, 5}) == 0.0);
  CHECK(f1({3, 0, 0, 0}) == 1.0);
  CHECK(f1({0, 2, 1, 0}) == 0.0);
  CHECK_THROWS_AS(confusion(probs, std::vector<int>{1}), std::invalid_argument);
}

TEST_CASE("f1 from counts equals brute-force f1") {
  Rng rng = make_rng(1, "f1");
  for (int trial = 0; trial < 300; ++trial) {
    const int n = std::uniform_int_distribution<int>(0, 40)(rng);
    std::vector<double> probs;
    std::vector<int> labels, predicted;
    for (int i = 0; i < n; ++i) {
      probs.push_back(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
      labels.push_back(std::uniform_int_distribution<int>(0, 1)(rng));
      predicted.push_back(probs.back() >= 0.5 ? 1 : 0);
    }
    CHECK(f1(confusion(probs, labels)) == doctest::Approx(brute_force_f1(predicted, labels)));
  }
}

TEST_CASE("render_table matches the golden table") {
  const std::string golden = slurp(test_data("table1_golden.txt"));
  REQUIRE_FALSE(golden.empty());
  CHECK(render_table(reference_table()) == golden);
  CHECK(render_table(reference_table()) == render_table(reference_table()));
}

TEST_CASE("render_table with a single row marks both cells") {
  ResultTable t{reference_table()[2]};
  const std::string text = render_table(t);
  CHECK(text.find("| Cosine    | 60.27 ± 2.22 * | 63.58 ± 0.71 * |") != std::string::npos);
  CHECK_THROWS_AS(render_table(ResultTable{}), std::invalid_argument);
}

TEST_CASE("render_table gives ties to the earlier row") {
  ResultTable t = reference_table();
  t[3].test.mean = t[2].test.mean;
  const std::string text = render_table(t);
  CHECK(text.find("63.58 ± 0.71 * |\n| Cosine Warmup") != std::string::npos);
  CHECK(text.find("| Cosine Warmup | 50.85 ± 0.88   | 63.58 ± 2.05   |") != std::string::npos);
}

TEST_CASE("csv rendering") {
  const std::string csv = render_table_csv(reference_table());
  CHECK(csv.rfind("scheduler,val_f1_mean,val_f1_std,test_f1_mean,test_f1_std\n", 0) == 0);
  CHECK(csv.find("cosine,60.2700,2.2200,63.5800,0.7100\n") != std::string::npos);
}
