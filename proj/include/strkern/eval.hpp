#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace strkern {

struct Confusion {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
};

/// Accuracy and confusion counts; "positive" is the +1 class.
struct EvalReport {
  double accuracy = 0;
  Confusion confusion;
  std::vector<int> gold;
  std::vector<int> predicted;
};

/// Throws argument_error for empty or mismatched inputs.
EvalReport accuracy(std::span<const int> predicted, std::span<const int> gold);

/// chi^2 (1 dof) critical value at the 0.05 level.
inline constexpr double kMcNemarCritical = 3.841459;

struct McNemarResult {
  std::uint64_t n01 = 0;  // A wrong, B right
  std::uint64_t n10 = 0;  // A right, B wrong
  double statistic = 0;
  bool significant = false;
};

/// Paired McNemar test. With continuity correction (default) the statistic
/// is (|n01 - n10| - 1)^2 / (n01 + n10); it is 0 when n01 + n10 = 0.
McNemarResult mcnemar(std::span<const int> pred_a, std::span<const int> pred_b,
                      std::span<const int> gold, bool continuity_correction = true);

/// McNemar from precomputed discordant counts.
McNemarResult mcnemar_counts(std::uint64_t n01, std::uint64_t n10,
                             bool continuity_correction = true);

}  // namespace strkern
