#include "strkern/synthetic.hpp"

#include <cstdio>
#include <set>

#include "strkern/errors.hpp"

namespace strkern {

namespace {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }

 private:
  std::uint64_t state_;
};

constexpr std::string_view kConsonants = "bdfgklmnprstv";
constexpr std::string_view kVowels = "aeiou";
// Style words of each source use their own consonants, so every n-gram with
// n >= 2 of a style word is unique to its source.
constexpr std::string_view kStyleConsonants[4] = {"ch", "jw", "xy", "qz"};

/// Pseudo-words of 2-4 consonant-vowel syllables, unique across all groups.
std::vector<std::string> make_words(SplitMix64& rng, std::size_t count,
                                    std::set<std::string>& taken,
                                    std::string_view consonants = kConsonants) {
  std::vector<std::string> out;
  out.reserve(count);
  while (out.size() < count) {
    std::string w;
    const std::size_t syllables = 2 + rng.index(3);
    for (std::size_t s = 0; s < syllables; ++s) {
      w.push_back(consonants[rng.index(consonants.size())]);
      w.push_back(kVowels[rng.index(kVowels.size())]);
    }
    if (taken.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

struct Vocabulary {
  std::vector<std::string> filler;
  std::vector<std::string> regular;
  std::vector<std::string> satirical;
  // train-regular, train-satirical, eval-regular, eval-satirical
  std::vector<std::string> style[4];
};

const char* const kSources[4] = {"train-regular", "train-satirical", "eval-regular",
                                 "eval-satirical"};

std::string make_text(SplitMix64& rng, const Vocabulary& v, const SyntheticSpec& spec,
                      std::size_t length, Label label, int source) {
  const auto& own = label == Label::satirical ? v.satirical : v.regular;
  const auto& other = label == Label::satirical ? v.regular : v.satirical;
  std::string text;
  for (std::size_t t = 0; t < length; ++t) {
    const std::vector<std::string>* pool = &v.filler;
    if (rng.uniform() < spec.confounder_strength) {
      pool = &v.style[source];
    } else if (rng.uniform() < spec.class_rate) {
      pool = rng.uniform() < spec.class_purity ? &own : &other;
    }
    if (!text.empty()) text.push_back(' ');
    text += (*pool)[rng.index(pool->size())];
  }
  return text;
}

void check(const SyntheticSpec& spec) {
  if (spec.train_size == 0 || spec.valid_size == 0 || spec.test_size == 0) {
    throw argument_error("synthetic split sizes must be positive");
  }
  if (spec.doc_length == 0 || spec.class_vocabulary == 0 || spec.filler_vocabulary == 0 ||
      spec.style_vocabulary == 0) {
    throw argument_error("synthetic vocabulary sizes and document length must be positive");
  }
  for (double p : {spec.class_rate, spec.class_purity, spec.confounder_strength}) {
    if (!(p >= 0 && p <= 1)) throw argument_error("synthetic probabilities must lie in [0, 1]");
  }
}

std::vector<Article> generate(const SyntheticSpec& spec, bool eval_from_train_sources) {
  check(spec);
  SplitMix64 rng(spec.seed);
  std::set<std::string> taken;
  if (!spec.planted_token.empty()) taken.insert(spec.planted_token);
  Vocabulary v;
  v.filler = make_words(rng, spec.filler_vocabulary, taken);
  v.regular = make_words(rng, spec.class_vocabulary, taken);
  v.satirical = make_words(rng, spec.class_vocabulary, taken);
  for (int s = 0; s < 4; ++s) {
    v.style[s] = make_words(rng, spec.style_vocabulary, taken, kStyleConsonants[s]);
  }

  std::vector<Article> out;
  out.reserve(spec.train_size + spec.valid_size + spec.test_size);
  std::size_t serial = 0;
  auto emit = [&](Split split, std::size_t count) {
    for (std::size_t k = 0; k < count; ++k) {
      Article a;
      a.label = k % 2 == 0 ? Label::regular : Label::satirical;
      a.split = split;
      const bool train_like = split == Split::train || eval_from_train_sources;
      const int source = (train_like ? 0 : 2) + (a.label == Label::satirical ? 1 : 0);
      a.source = kSources[source];
      char id[32];
      std::snprintf(id, sizeof id, "syn-%06zu", serial++);
      a.id = id;
      a.title = make_text(rng, v, spec, spec.title_length, a.label, source);
      a.body = make_text(rng, v, spec, spec.doc_length, a.label, source);
      if (!spec.planted_token.empty() && a.label == spec.class_positive) {
        // insert at a word boundary
        std::vector<std::size_t> cuts{0};
        for (std::size_t i = 0; i < a.body.size(); ++i) {
          if (a.body[i] == ' ') cuts.push_back(i + 1);
        }
        const std::size_t at = cuts[rng.index(cuts.size())];
        a.body.insert(at, spec.planted_token + " ");
      }
      out.push_back(std::move(a));
    }
  };
  emit(Split::train, spec.train_size);
  emit(Split::valid, spec.valid_size);
  emit(Split::test, spec.test_size);
  return out;
}

}  // namespace

std::vector<Article> generate_articles(const SyntheticSpec& spec) { return generate(spec, false); }

std::vector<Article> generate_in_source_articles(const SyntheticSpec& spec) {
  return generate(spec, true);
}

LabeledCorpus generate_synthetic(const SyntheticSpec& spec) {
  return LabeledCorpus(generate_articles(spec), spec.class_positive);
}

}  // namespace strkern
