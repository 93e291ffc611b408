#include "strkern/ngram_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "strkern/errors.hpp"
#include "strkern/parallel.hpp"
#include "strkern/utf8.hpp"

namespace strkern {

std::string_view to_string(KernelKind kind) noexcept {
  switch (kind) {
    case KernelKind::pbsk: return "pbsk";
    case KernelKind::hisk: return "hisk";
    case KernelKind::linear: return "linear";
  }
  return "?";
}

KernelKind parse_kernel_kind(std::string_view text) {
  if (text == "pbsk") return KernelKind::pbsk;
  if (text == "hisk") return KernelKind::hisk;
  if (text == "linear") return KernelKind::linear;
  throw argument_error("unknown kernel kind '" + std::string(text) + "'");
}

NgramProfile::NgramProfile(unsigned n, std::vector<Entry> sorted_entries, std::string id)
    : n_(n), entries_(std::move(sorted_entries)), id_(std::move(id)) {
  for (const auto& [gram, c] : entries_) total_ += c;
}

std::uint32_t NgramProfile::count(std::string_view gram) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), gram,
                             [](const Entry& e, std::string_view g) { return e.first < g; });
  return (it != entries_.end() && it->first == gram) ? it->second : 0;
}

NgramProfile extract_profile(std::string_view utf8_text, unsigned n, std::string id) {
  if (n == 0) throw argument_error("n-gram length must be positive");
  const std::u32string chars = utf8::decode(utf8_text);
  if (chars.size() < n) return NgramProfile(n, {}, std::move(id));

  // Canonical re-encoding so that windows are contiguous byte ranges.
  std::string bytes;
  std::vector<std::size_t> offset;
  offset.reserve(chars.size() + 1);
  for (char32_t c : chars) {
    offset.push_back(bytes.size());
    utf8::append(bytes, c);
  }
  offset.push_back(bytes.size());

  std::unordered_map<std::string_view, std::uint32_t> counts;
  counts.reserve(chars.size());
  const std::string_view all(bytes);
  for (std::size_t i = 0; i + n <= chars.size(); ++i) {
    ++counts[all.substr(offset[i], offset[i + n] - offset[i])];
  }
  std::vector<NgramProfile::Entry> entries;
  entries.reserve(counts.size());
  for (const auto& [gram, c] : counts) entries.emplace_back(std::string(gram), c);
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return NgramProfile(n, std::move(entries), std::move(id));
}

namespace {

/// Walks the smaller sorted sequence and probes the larger one with an
/// exponential search from the last match, calling on_match(a, b) for each
/// shared key.
template <typename Seq, typename Less, typename Equal, typename OnMatch>
void intersect(const Seq& small, const Seq& large, Less less, Equal equal, OnMatch on_match) {
  std::size_t lo = 0;
  const std::size_t size = large.size();
  for (const auto& item : small) {
    if (lo >= size) return;
    std::size_t step = 1;
    std::size_t hi = lo;
    while (hi < size && less(large[hi], item)) {
      lo = hi + 1;
      hi += step;
      step *= 2;
    }
    hi = std::min(hi + 1, size);
    lo = static_cast<std::size_t>(
        std::lower_bound(large.begin() + static_cast<std::ptrdiff_t>(lo),
                         large.begin() + static_cast<std::ptrdiff_t>(hi), item, less) -
        large.begin());
    if (lo < size && equal(large[lo], item)) {
      on_match(item, large[lo]);
      ++lo;
    }
  }
}

inline std::uint32_t presence(std::uint32_t c, PresenceRule rule) noexcept {
  return rule == PresenceRule::at_least_one ? (c >= 1) : (c > 1);
}

template <typename Seq, typename Less, typename Equal>
double pair_kernel(const Seq& a, const Seq& b, KernelKind kind, PresenceRule rule, Less less,
                   Equal equal) {
  const Seq& small = a.size() <= b.size() ? a : b;
  const Seq& large = a.size() <= b.size() ? b : a;
  std::uint64_t sum = 0;
  if (kind == KernelKind::hisk) {
    intersect(small, large, less, equal,
              [&](const auto& x, const auto& y) { sum += std::min(x.second, y.second); });
  } else {
    intersect(small, large, less, equal, [&](const auto& x, const auto& y) {
      sum += std::min(presence(x.second, rule), presence(y.second, rule));
    });
  }
  return static_cast<double>(sum);
}

void require_string_kernel(KernelKind kind) {
  if (kind == KernelKind::linear) {
    throw argument_error("linear kernel applies to dense vectors, not n-gram profiles");
  }
}

using IdEntry = std::pair<std::uint32_t, std::uint32_t>;
using IdProfile = std::vector<IdEntry>;

double id_kernel(const IdProfile& a, const IdProfile& b, KernelKind kind, PresenceRule rule) {
  return pair_kernel(
      a, b, kind, rule, [](const IdEntry& x, const IdEntry& y) { return x.first < y.first; },
      [](const IdEntry& x, const IdEntry& y) { return x.first == y.first; });
}

}  // namespace

double kernel_value(const NgramProfile& p, const NgramProfile& q, KernelKind kind,
                    PresenceRule rule) {
  require_string_kernel(kind);
  if (p.n() != q.n()) throw argument_error("profiles have different n-gram lengths");
  using E = NgramProfile::Entry;
  return pair_kernel(
      p.entries(), q.entries(), kind, rule,
      [](const E& x, const E& y) { return x.first < y.first; },
      [](const E& x, const E& y) { return x.first == y.first; });
}

KernelMatrix gram_block(std::span<const NgramProfile> rows, std::span<const NgramProfile> cols,
                        KernelKind kind, const GramOptions& options) {
  require_string_kernel(kind);
  const bool symmetric = rows.data() == cols.data() && rows.size() == cols.size();

  unsigned n = 0;
  auto check_n = [&n](const NgramProfile& p) {
    if (n == 0) n = p.n();
    if (p.n() != n) throw argument_error("profiles in one block have different n-gram lengths");
  };
  for (const auto& p : rows) check_n(p);
  for (const auto& p : cols) check_n(p);

  KernelMatrix out;
  out.kind = kind;
  out.n = n;
  out.row_ids.reserve(rows.size());
  out.col_ids.reserve(cols.size());
  for (const auto& p : rows) out.row_ids.push_back(p.id());
  for (const auto& p : cols) out.col_ids.push_back(p.id());
  out.values = RowMatrix::Zero(static_cast<Eigen::Index>(rows.size()),
                               static_cast<Eigen::Index>(cols.size()));
  if (rows.empty() || cols.empty()) return out;

  // Intern n-grams once so pairwise work compares integers.
  std::unordered_map<std::string_view, std::uint32_t> vocabulary;
  auto to_ids = [&vocabulary](const NgramProfile& p) {
    IdProfile ids;
    ids.reserve(p.distinct());
    for (const auto& [gram, c] : p.entries()) {
      auto [it, inserted] =
          vocabulary.try_emplace(gram, static_cast<std::uint32_t>(vocabulary.size()));
      ids.emplace_back(it->second, c);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  };
  std::vector<IdProfile> row_ids;
  row_ids.reserve(rows.size());
  for (const auto& p : rows) row_ids.push_back(to_ids(p));
  std::vector<IdProfile> col_store;
  if (!symmetric) {
    col_store.reserve(cols.size());
    for (const auto& p : cols) col_store.push_back(to_ids(p));
  }
  const std::vector<IdProfile>& col_ids = symmetric ? row_ids : col_store;

  auto& values = out.values;
  const auto ncols = cols.size();
  parallel_for(rows.size(), options.workers, 8, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = symmetric ? i : 0; j < ncols; ++j) {
        values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            id_kernel(row_ids[i], col_ids[j], kind, options.presence);
      }
    }
  });
  if (symmetric) {
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      for (Eigen::Index j = 0; j < i; ++j) values(i, j) = values(j, i);
    }
  }
  return out;
}

KernelMatrix normalize_gram(const KernelMatrix& block, std::span<const double> self_rows,
                            std::span<const double> self_cols) {
  if (self_rows.size() != block.rows() || self_cols.size() != block.cols()) {
    throw argument_error("self-kernel vectors do not match the block dimensions");
  }
  KernelMatrix out = block;
  for (std::size_t i = 0; i < block.rows(); ++i) {
    for (std::size_t j = 0; j < block.cols(); ++j) {
      const double denom = self_rows[i] * self_cols[j];
      auto& v = out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      v = denom > 0 ? v / std::sqrt(denom) : 0.0;
    }
  }
  return out;
}

std::vector<double> self_kernels(std::span<const NgramProfile> profiles, KernelKind kind,
                                 PresenceRule rule) {
  std::vector<double> out;
  out.reserve(profiles.size());
  for (const auto& p : profiles) out.push_back(kernel_value(p, p, kind, rule));
  return out;
}

}  // namespace strkern
