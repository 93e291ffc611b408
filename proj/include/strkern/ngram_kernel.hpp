#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "strkern/matrix.hpp"

namespace strkern {

enum class KernelKind : std::uint8_t { pbsk = 0, hisk = 1, linear = 2 };

std::string_view to_string(KernelKind kind) noexcept;
KernelKind parse_kernel_kind(std::string_view text);

/// When an n-gram counts as "present" for the presence-bits kernel.
/// at_least_one is the standard definition; more_than_one reproduces a
/// literal reading that ignores singleton n-grams and exists for study only.
enum class PresenceRule : std::uint8_t { at_least_one, more_than_one };

/// Character n-gram histogram of one document. N-grams are sequences of n
/// Unicode scalar values, stored as their UTF-8 encoding and sorted
/// bytewise (which is code point order).
class NgramProfile {
 public:
  using Entry = std::pair<std::string, std::uint32_t>;

  NgramProfile() = default;
  NgramProfile(unsigned n, std::vector<Entry> sorted_entries, std::string id = {});

  unsigned n() const noexcept { return n_; }
  const std::string& id() const noexcept { return id_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t distinct() const noexcept { return entries_.size(); }
  std::uint64_t total() const noexcept { return total_; }
  bool empty() const noexcept { return entries_.empty(); }

  /// #(x, g); 0 when absent.
  std::uint32_t count(std::string_view gram) const;

 private:
  unsigned n_ = 0;
  std::vector<Entry> entries_;
  std::uint64_t total_ = 0;
  std::string id_;
};

/// Counts every contiguous window of n scalar values. Throws argument_error
/// for n == 0.
NgramProfile extract_profile(std::string_view utf8_text, unsigned n, std::string id = {});

/// PBSK or HISK between two profiles of equal n.
double kernel_value(const NgramProfile& p, const NgramProfile& q, KernelKind kind,
                    PresenceRule rule = PresenceRule::at_least_one);

struct KernelMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  RowMatrix values;
  KernelKind kind = KernelKind::linear;
  unsigned n = 0;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

struct GramOptions {
  PresenceRule presence = PresenceRule::at_least_one;
  unsigned workers = 0;
};

/// values(i, j) = kernel_value(rows[i], cols[j]). When rows and cols are
/// the same span only the upper triangle is evaluated and then mirrored.
KernelMatrix gram_block(std::span<const NgramProfile> rows, std::span<const NgramProfile> cols,
                        KernelKind kind, const GramOptions& options = {});

/// Cosine normalization K(a,b) / sqrt(K(a,a) K(b,b)); entries whose self
/// kernel is zero become 0.
KernelMatrix normalize_gram(const KernelMatrix& block, std::span<const double> self_rows,
                            std::span<const double> self_cols);

/// Self kernels K(x, x) for a list of profiles.
std::vector<double> self_kernels(std::span<const NgramProfile> profiles, KernelKind kind,
                                 PresenceRule rule = PresenceRule::at_least_one);

}  // namespace strkern
