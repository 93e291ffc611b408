#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace strkern {

enum class Label : std::uint8_t { regular, satirical };
enum class Split : std::uint8_t { train, valid, test };

std::string_view to_string(Label label) noexcept;
std::string_view to_string(Split split) noexcept;
Label parse_label(std::string_view text);
Split parse_split(std::string_view text);

struct Article {
  std::string id;
  std::string title;
  std::string body;
  Label label = Label::regular;
  std::string source;
  Split split = Split::train;

  bool operator==(const Article&) const = default;
};

/// Articles in file order. Immutable once loaded; the sign convention is
/// held here so every downstream report can state it.
class LabeledCorpus {
 public:
  LabeledCorpus() = default;
  explicit LabeledCorpus(std::vector<Article> articles,
                         Label class_positive = Label::satirical);

  const std::vector<Article>& articles() const noexcept { return articles_; }
  std::size_t size() const noexcept { return articles_.size(); }
  bool empty() const noexcept { return articles_.empty(); }
  Label class_positive() const noexcept { return class_positive_; }
  void set_class_positive(Label label) noexcept { class_positive_ = label; }

  /// +1 for class_positive, -1 otherwise.
  int sign(Label label) const noexcept { return label == class_positive_ ? 1 : -1; }
  Label label_of(int sign) const noexcept;

  std::vector<const Article*> split(Split which) const;
  std::size_t count(Split which) const;

 private:
  std::vector<Article> articles_;
  Label class_positive_ = Label::satirical;
};

/// Checks id uniqueness and the cross-source rule. Throws validation_error
/// or cross_source_violation.
void validate_corpus(const std::vector<Article>& articles);

/// JSON-lines corpus: one object per line with id, title, body, label,
/// source, split. Blank lines are skipped, unknown fields ignored.
LabeledCorpus read_corpus(std::istream& in);
LabeledCorpus load_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, const LabeledCorpus& corpus);
void save_corpus(const std::filesystem::path& path, const LabeledCorpus& corpus);

enum class TextMode : std::uint8_t { full, headline };

std::string_view to_string(TextMode mode) noexcept;
TextMode parse_text_mode(std::string_view text);

struct TextOptions {
  bool case_fold = false;
  bool strip_accents = false;
};

/// Classification text. Line breaks become single spaces, surrounding
/// whitespace is trimmed, and title and body are joined by one space.
std::string document_text(const Article& article, TextMode mode,
                          const TextOptions& options = {});

struct ClassStats {
  std::uint64_t sample_count = 0;
  std::uint64_t token_count = 0;

  bool operator==(const ClassStats&) const = default;
};

/// Indexed [split][label].
struct CorpusStats {
  std::array<std::array<ClassStats, 2>, 3> cells{};

  const ClassStats& at(Split s, Label l) const {
    return cells[static_cast<int>(s)][static_cast<int>(l)];
  }
  ClassStats& at(Split s, Label l) { return cells[static_cast<int>(s)][static_cast<int>(l)]; }
  ClassStats split_total(Split s) const;
  ClassStats label_total(Label l) const;
  ClassStats total() const;

  bool operator==(const CorpusStats&) const = default;
};

CorpusStats corpus_stats(const LabeledCorpus& corpus);
std::uint64_t count_tokens(std::string_view text);

/// Stable hash over the articles' content, used to key kernel caches.
std::string corpus_fingerprint(const LabeledCorpus& corpus);
std::string articles_fingerprint(std::span<const Article> articles);

/// Reads an unlabeled target set: JSON-lines with at least id, title, body.
/// label/source/split are optional and ignored.
std::vector<Article> load_unlabeled(const std::filesystem::path& path);

/// Converts a raw dump into the corpus format. `root` holds one entry per
/// split (train, valid or validation, test). Each entry is either a
/// directory with regular/ and satirical/ subdirectories of text files
/// (first line title, remainder body) or a TSV file <split>.tsv with
/// columns label, title, body. Source ids are "<train|eval>-<label>", since
/// validation and test share publication sources.
LabeledCorpus prepare_corpus(const std::filesystem::path& root);

}  // namespace strkern
