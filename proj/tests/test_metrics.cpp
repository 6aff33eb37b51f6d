#include "doctest.h"

#include <cmath>

#include "evidx/metrics.hpp"
#include "evidx/rng.hpp"
#include "oracles.hpp"

using namespace evidx;

namespace {

Prediction make_pred(double p_ad) {
  Prediction p;
  p.p_ad = {1.0 - p_ad, p_ad};
  return p;
}

}  // namespace

TEST_CASE("accuracy counts argmax matches; exact ties score as NC") {
  std::vector<Prediction> preds = {make_pred(0.9), make_pred(0.2), make_pred(0.5)};
  std::vector<Diagnosis> truths = {Diagnosis::AD, Diagnosis::NC, Diagnosis::NC};
  CHECK(accuracy(preds, truths) == 1.0);
  truths[2] = Diagnosis::AD;  // the tied case now counts as wrong
  CHECK(accuracy(preds, truths) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(accuracy({}, {}), EmptyEvalError);
}

TEST_CASE("accuracy matches a manual tally on randomized cases") {
  Rng rng(8);
  std::vector<Prediction> preds;
  std::vector<Diagnosis> truths;
  long manual = 0;
  for (int i = 0; i < 10; ++i) {
    const double p = rng.uniform();
    preds.push_back(make_pred(p));
    const Diagnosis truth = rng.below(2) == 0 ? Diagnosis::NC : Diagnosis::AD;
    truths.push_back(truth);
    const Diagnosis called = p > 0.5 ? Diagnosis::AD : Diagnosis::NC;
    manual += called == truth;
  }
  CHECK(accuracy(preds, truths) == double(manual) / 10.0);
  // accuracy + error rate = 1
  CHECK(accuracy(preds, truths) + double(10 - manual) / 10.0 == 1.0);
}

TEST_CASE("auroc degenerate values") {
  std::vector<double> separated = {0.1, 0.2, 0.8, 0.9};
  std::vector<Diagnosis> truths = {Diagnosis::NC, Diagnosis::NC, Diagnosis::AD,
                                   Diagnosis::AD};
  CHECK(auroc(separated, truths) == 1.0);
  std::vector<double> flat = {0.5, 0.5, 0.5, 0.5};
  CHECK(auroc(flat, truths) == 0.5);
  std::vector<double> inverted = {0.9, 0.8, 0.2, 0.1};
  CHECK(auroc(inverted, truths) == 0.0);
  std::vector<Diagnosis> single(4, Diagnosis::AD);
  CHECK_THROWS_AS(auroc(flat, single), UndefinedMetricError);
  CHECK_THROWS_AS(auroc({}, {}), EmptyEvalError);
}

TEST_CASE("auroc equals the quadratic pair enumeration, ties included") {
  Rng rng(99);
  for (int round = 0; round < 30; ++round) {
    const int n = 2 + int(rng.below(199));
    std::vector<double> scores;
    std::vector<Diagnosis> truths;
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < n; ++i) {
      // coarse quantization forces plenty of ties
      scores.push_back(double(rng.below(10)) / 10.0);
      const bool pos = rng.below(2) == 0;
      truths.push_back(pos ? Diagnosis::AD : Diagnosis::NC);
      (pos ? has_pos : has_neg) = true;
    }
    if (!has_pos) truths[0] = Diagnosis::AD;
    if (!has_neg) truths[std::size_t(n - 1)] = Diagnosis::NC;
    const double fast = auroc(scores, truths);
    const double slow = oracles::pairwise_auroc(scores, truths);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-9));
  }
}

TEST_CASE("auroc is invariant under strictly monotone score transforms") {
  Rng rng(123);
  std::vector<double> scores;
  std::vector<Diagnosis> truths;
  for (int i = 0; i < 150; ++i) {
    scores.push_back(rng.uniform());
    truths.push_back(rng.below(2) == 0 ? Diagnosis::AD : Diagnosis::NC);
  }
  truths[0] = Diagnosis::AD;
  truths[1] = Diagnosis::NC;
  const double base = auroc(scores, truths);
  auto transformed = scores;
  for (auto& s : transformed) s = std::exp(3.0 * s) - 7.0;
  CHECK(auroc(transformed, truths) == doctest::Approx(base).epsilon(1e-12));
  for (auto& s : transformed) s = std::atan(s);
  CHECK(auroc(transformed, truths) == doctest::Approx(base).epsilon(1e-12));
}
