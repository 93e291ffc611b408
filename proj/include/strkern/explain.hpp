#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "strkern/corpus.hpp"
#include "strkern/dense.hpp"
#include "strkern/learner.hpp"
#include "strkern/ngram_kernel.hpp"

namespace strkern {

struct RankedFeature {
  std::string feature;
  double score = 0;
  /// +1 favours class_positive, -1 the other class, 0 carries no signal.
  int sign = 0;
  /// 1-based within its sign group; 0 for zero-score features.
  std::size_t rank = 0;
};

/// Sorts features into the positive group (descending score), then the
/// negative group (ascending score), then zeros, and assigns ranks. Ties
/// are broken by feature text.
std::vector<RankedFeature> rank_features(const std::map<std::string, double>& scores);

/// Explicit n-gram weights of a dual string-kernel model:
/// w_g = sum_i alpha_i phi_g(x_i) with phi the presence bit (PBSK) or
/// count (HISK). Profiles must follow model.train_ids.
std::map<std::string, double> ngram_weight_map(const DualModel& model,
                                               std::span<const NgramProfile> train_profiles,
                                               PresenceRule rule = PresenceRule::at_least_one);

std::vector<RankedFeature> primal_ngram_weights(const DualModel& model,
                                                std::span<const NgramProfile> train_profiles,
                                                PresenceRule rule = PresenceRule::at_least_one);

/// sum_g w_g phi_g(x). Equals the dual prediction for PBSK. HISK is not
/// linear in the counts, so for HISK this is only an approximation.
double primal_score(const std::map<std::string, double>& weights, const NgramProfile& profile,
                    KernelKind kind, PresenceRule rule = PresenceRule::at_least_one);

/// Sum over every occurrence of cos(embedding, w), per word string.
std::vector<RankedFeature> embedding_word_scores(std::span<const WordOccurrence> occurrences,
                                                 const PrimalModel& model);

/// Sum over consecutive word pairs inside a document of the product of
/// their cosines with w, per "w1 w2" string.
std::vector<RankedFeature> embedding_bigram_scores(std::span<const WordOccurrence> occurrences,
                                                   const PrimalModel& model);

/// TSV with header "class\trank\tfeature\tscore"; at most top_k rows per
/// class (0 = all). Zero-score features are not written.
void write_ranked_tsv(std::ostream& out, std::span<const RankedFeature> features,
                      Label class_positive, std::size_t top_k = 0);

}  // namespace strkern
