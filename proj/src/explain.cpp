#include "strkern/explain.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <unordered_map>

#include "strkern/errors.hpp"

namespace strkern {

std::vector<RankedFeature> rank_features(const std::map<std::string, double>& scores) {
  std::vector<RankedFeature> out;
  out.reserve(scores.size());
  for (const auto& [feature, score] : scores) {
    out.push_back({feature, score, score > 0 ? 1 : (score < 0 ? -1 : 0), 0});
  }
  auto group = [](int sign) { return sign > 0 ? 0 : (sign < 0 ? 1 : 2); };
  std::stable_sort(out.begin(), out.end(), [&](const RankedFeature& a, const RankedFeature& b) {
    if (group(a.sign) != group(b.sign)) return group(a.sign) < group(b.sign);
    return std::abs(a.score) > std::abs(b.score);
  });
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (auto& f : out) {
    if (f.sign > 0) f.rank = ++pos;
    else if (f.sign < 0) f.rank = ++neg;
  }
  return out;
}

namespace {

double feature_value(std::uint32_t count, KernelKind kind, PresenceRule rule) {
  if (kind == KernelKind::hisk) return count;
  return rule == PresenceRule::at_least_one ? (count >= 1) : (count > 1);
}

}  // namespace

std::map<std::string, double> ngram_weight_map(const DualModel& model,
                                               std::span<const NgramProfile> train_profiles,
                                               PresenceRule rule) {
  if (model.kind == KernelKind::linear) {
    throw argument_error("n-gram weights need a PBSK or HISK model");
  }
  if (train_profiles.size() != model.train_ids.size()) {
    throw argument_error("profile count does not match the model's training set");
  }
  std::map<std::string, double> weights;
  for (std::size_t i = 0; i < train_profiles.size(); ++i) {
    const auto& p = train_profiles[i];
    if (p.n() != model.n) throw argument_error("profile n-gram length differs from the model's");
    if (!p.id().empty() && p.id() != model.train_ids[i]) {
      throw argument_error("profile '" + p.id() + "' is out of order with the model's ids");
    }
    const double alpha = model.coefficients(static_cast<Eigen::Index>(i));
    for (const auto& [gram, count] : p.entries()) {
      const double phi = feature_value(count, model.kind, rule);
      if (phi != 0) weights[gram] += alpha * phi;
    }
  }
  return weights;
}

std::vector<RankedFeature> primal_ngram_weights(const DualModel& model,
                                                std::span<const NgramProfile> train_profiles,
                                                PresenceRule rule) {
  return rank_features(ngram_weight_map(model, train_profiles, rule));
}

double primal_score(const std::map<std::string, double>& weights, const NgramProfile& profile,
                    KernelKind kind, PresenceRule rule) {
  double score = 0;
  for (const auto& [gram, count] : profile.entries()) {
    auto it = weights.find(gram);
    if (it != weights.end()) score += it->second * feature_value(count, kind, rule);
  }
  return score;
}

namespace {

/// cos(e, w) for every occurrence; NaN marks a zero-norm embedding.
std::vector<double> cosines(std::span<const WordOccurrence> occ, const PrimalModel& model) {
  const double wnorm = model.weights.norm();
  if (!(wnorm > 0)) throw numerical_error("model weight vector has zero norm");
  std::vector<double> out;
  out.reserve(occ.size());
  for (const auto& o : occ) {
    if (o.vector.size() != model.weights.size()) {
      throw argument_error("word vector dimension does not match the model");
    }
    const double enorm = o.vector.norm();
    out.push_back(enorm > 0 ? o.vector.dot(model.weights) / (enorm * wnorm)
                            : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

/// Sums each feature's contributions in sorted order so the result does
/// not depend on corpus order.
std::map<std::string, double> reduce(std::map<std::string, std::vector<double>>& parts) {
  std::map<std::string, double> out;
  for (auto& [feature, values] : parts) {
    std::sort(values.begin(), values.end());
    double sum = 0;
    for (double v : values) sum += v;
    out.emplace(feature, sum);
  }
  return out;
}

}  // namespace

std::vector<RankedFeature> embedding_word_scores(std::span<const WordOccurrence> occurrences,
                                                 const PrimalModel& model) {
  const auto cos = cosines(occurrences, model);
  std::map<std::string, std::vector<double>> parts;
  for (std::size_t i = 0; i < occurrences.size(); ++i) {
    if (std::isnan(cos[i])) continue;
    parts[occurrences[i].word].push_back(cos[i]);
  }
  return rank_features(reduce(parts));
}

std::vector<RankedFeature> embedding_bigram_scores(std::span<const WordOccurrence> occurrences,
                                                   const PrimalModel& model) {
  const auto cos = cosines(occurrences, model);
  // occurrence indices per document, ordered by position
  std::unordered_map<std::string_view, std::vector<std::size_t>> docs;
  for (std::size_t i = 0; i < occurrences.size(); ++i) docs[occurrences[i].doc_id].push_back(i);

  std::map<std::string, std::vector<double>> parts;
  for (auto& [doc, idx] : docs) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return occurrences[a].position < occurrences[b].position;
    });
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
      const double c1 = cos[idx[k]];
      const double c2 = cos[idx[k + 1]];
      const std::string key = occurrences[idx[k]].word + " " + occurrences[idx[k + 1]].word;
      // a zero-norm word contributes nothing, but the bigram still exists
      const double v = (std::isnan(c1) || std::isnan(c2)) ? 0.0 : c1 * c2;
      parts[key].push_back(v);
    }
  }
  return rank_features(reduce(parts));
}

namespace {

std::string escape_tsv(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\\': out += "\\\\"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

void write_ranked_tsv(std::ostream& out, std::span<const RankedFeature> features,
                      Label class_positive, std::size_t top_k) {
  const Label negative = class_positive == Label::satirical ? Label::regular : Label::satirical;
  out << "class\trank\tfeature\tscore\n";
  for (const auto& f : features) {
    if (f.sign == 0) continue;
    if (top_k != 0 && f.rank > top_k) continue;
    out << to_string(f.sign > 0 ? class_positive : negative) << '\t' << f.rank << '\t'
        << escape_tsv(f.feature) << '\t' << format_double(f.score, 10) << '\n';
  }
}

}  // namespace strkern
