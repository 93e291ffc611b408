#include "strkern/eval.hpp"

#include <cmath>

#include "strkern/errors.hpp"

namespace strkern {

EvalReport accuracy(std::span<const int> predicted, std::span<const int> gold) {
  if (predicted.empty()) throw argument_error("accuracy of an empty prediction set");
  if (predicted.size() != gold.size()) throw argument_error("prediction and gold lengths differ");
  EvalReport r;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool pos_pred = predicted[i] > 0;
    const bool pos_gold = gold[i] > 0;
    if (pos_pred && pos_gold) ++r.confusion.tp;
    else if (pos_pred) ++r.confusion.fp;
    else if (!pos_gold) ++r.confusion.tn;
    else ++r.confusion.fn;
  }
  r.accuracy = static_cast<double>(r.confusion.tp + r.confusion.tn) /
               static_cast<double>(r.confusion.total());
  r.gold.assign(gold.begin(), gold.end());
  r.predicted.assign(predicted.begin(), predicted.end());
  return r;
}

McNemarResult mcnemar_counts(std::uint64_t n01, std::uint64_t n10, bool continuity_correction) {
  McNemarResult r;
  r.n01 = n01;
  r.n10 = n10;
  const std::uint64_t discordant = n01 + n10;
  if (discordant == 0) return r;
  double diff = std::abs(static_cast<double>(n01) - static_cast<double>(n10));
  if (continuity_correction) diff -= 1.0;
  r.statistic = diff * diff / static_cast<double>(discordant);
  r.significant = r.statistic > kMcNemarCritical;
  return r;
}

McNemarResult mcnemar(std::span<const int> pred_a, std::span<const int> pred_b,
                      std::span<const int> gold, bool continuity_correction) {
  if (pred_a.size() != gold.size() || pred_b.size() != gold.size()) {
    throw argument_error("McNemar inputs have different lengths");
  }
  std::uint64_t n01 = 0;
  std::uint64_t n10 = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool a_ok = pred_a[i] == gold[i];
    const bool b_ok = pred_b[i] == gold[i];
    if (!a_ok && b_ok) ++n01;
    if (a_ok && !b_ok) ++n10;
  }
  return mcnemar_counts(n01, n10, continuity_correction);
}

}  // namespace strkern
