#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "strkern/corpus.hpp"

namespace strkern {

/// Parameters of the toy cross-source corpus. Two training sources (one per
/// class) and two evaluation sources share the class vocabulary; every
/// source also has its own style vocabulary, drawn with probability
/// `confounder_strength` per token.
struct SyntheticSpec {
  std::size_t train_size = 200;
  std::size_t valid_size = 100;
  std::size_t test_size = 100;
  std::size_t doc_length = 40;
  std::size_t title_length = 6;
  std::size_t class_vocabulary = 30;
  std::size_t filler_vocabulary = 200;
  std::size_t style_vocabulary = 30;
  /// Probability that a non-style token is a class word.
  double class_rate = 0.3;
  /// Probability that a class word comes from the document's own class.
  double class_purity = 0.7;
  double confounder_strength = 0.5;
  /// When non-empty, inserted once into every positive-class document.
  std::string planted_token;
  Label class_positive = Label::satirical;
  std::uint64_t seed = 1;
};

/// Deterministic for a given spec: the same spec gives byte-identical
/// articles on every platform (splitmix64 stream, no std distributions).
std::vector<Article> generate_articles(const SyntheticSpec& spec);
LabeledCorpus generate_synthetic(const SyntheticSpec& spec);

/// Like generate_articles, but evaluation documents are drawn from the
/// training sources. The result breaks the cross-source rule on purpose
/// and is only meant for in-source reference measurements.
std::vector<Article> generate_in_source_articles(const SyntheticSpec& spec);

}  // namespace strkern
