#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "strkern/matrix.hpp"

namespace strkern {

/// Explicit feature vectors, one row per document.
struct DenseMatrix {
  std::vector<std::string> row_ids;
  RowMatrix values;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(values.cols()); }

  /// Rows picked by id, in the order given. Throws argument_error on a
  /// missing id.
  DenseMatrix select(const std::vector<std::string>& ids) const;
};

/// FSDM v1 text format: header "FSDM v1 <rows> <cols>", then one line per
/// row "<id>\t<v1> <v2> ... <vcols>". Values are written with 17
/// significant digits through the locale-independent std::to_chars.
void write_dense(std::ostream& out, const DenseMatrix& m);
DenseMatrix read_dense(std::istream& in);
void save_dense(const std::filesystem::path& path, const DenseMatrix& m);
DenseMatrix load_dense(const std::filesystem::path& path);

/// One contextual word vector at a position inside a document.
struct WordOccurrence {
  std::string doc_id;
  std::size_t position = 0;
  std::string word;
  Vector vector;
};

/// Word-occurrence stream: same framing as FSDM with two extra leading
/// columns, "<doc_id>\t<position>\t<word>\t<v1> ... <vcols>", under the
/// header "FSWO v1 <rows> <cols>". The reader also accepts an "FSDM v1"
/// header on this layout.
void write_word_occurrences(std::ostream& out, const std::vector<WordOccurrence>& occ,
                            std::size_t dim);
std::vector<WordOccurrence> read_word_occurrences(std::istream& in, std::size_t* dim = nullptr);
std::vector<WordOccurrence> load_word_occurrences(const std::filesystem::path& path,
                                                  std::size_t* dim = nullptr);

/// Per-document mean of occurrence vectors, documents in first-seen order.
DenseMatrix occurrence_means(const std::vector<WordOccurrence>& occ, std::size_t dim);

/// Shortest-round-trip-safe decimal rendering (17 significant digits).
std::string format_double(double value, int significant = 17);

}  // namespace strkern
