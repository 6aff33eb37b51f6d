#include "evidx/metrics.hpp"

#include <algorithm>
#include <numeric>

namespace evidx {

double accuracy(const std::vector<Prediction>& predictions,
                const std::vector<Diagnosis>& truths) {
  if (predictions.empty()) throw EmptyEvalError("no predictions to score");
  if (predictions.size() != truths.size())
    throw Error("prediction/truth length mismatch");
  long correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const Diagnosis predicted =
        predictions[i].p_ad[1] > predictions[i].p_ad[0] ? Diagnosis::AD : Diagnosis::NC;
    if (predicted == truths[i]) ++correct;
  }
  return double(correct) / double(predictions.size());
}

double auroc(const std::vector<double>& scores, const std::vector<Diagnosis>& truths) {
  if (scores.empty()) throw EmptyEvalError("no scores to rank");
  if (scores.size() != truths.size()) throw Error("score/truth length mismatch");
  long n_pos = 0, n_neg = 0;
  for (Diagnosis d : truths) (d == Diagnosis::AD ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0)
    throw UndefinedMetricError("need at least one positive and one negative");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return a < b;
  });

  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * (double(i + 1) + double(j));  // 1-based
    for (std::size_t t = i; t < j; ++t)
      if (truths[order[t]] == Diagnosis::AD) rank_sum_pos += midrank;
    i = j;
  }
  const double u = rank_sum_pos - 0.5 * double(n_pos) * double(n_pos + 1);
  return u / (double(n_pos) * double(n_neg));
}

}  // namespace evidx
