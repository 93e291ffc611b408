#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "strkern/corpus.hpp"
#include "strkern/dense.hpp"
#include "strkern/eval.hpp"
#include "strkern/learner.hpp"
#include "strkern/ngram_kernel.hpp"

namespace strkern {

enum class Representation : std::uint8_t { pbsk, hisk, dense };

std::string_view to_string(Representation r) noexcept;
Representation parse_representation(std::string_view text);

struct ExperimentConfig {
  std::filesystem::path corpus_path;
  TextMode task = TextMode::full;
  Representation representation = Representation::pbsk;
  /// Empty means {4..8} for full articles and {2..8} for headlines.
  std::vector<unsigned> ngram_grid;
  /// Empty means the standard 1e-1 .. 1e-7 grid.
  std::vector<double> lambda_grid;
  /// Regularization used while sweeping n, before lambda is tuned.
  double sweep_lambda = 1e-3;
  bool domain_adapt = false;
  /// "valid" or a path: JSON-lines articles for string kernels, an FSDM
  /// file for dense features.
  std::string target_set = "valid";
  double da_scale = 1.0;
  bool normalize = false;
  Label class_positive = Label::satirical;
  std::filesystem::path output_dir;
  unsigned workers = 0;
  std::uint64_t seed = 1;
  std::filesystem::path dense_features;
  TextOptions text;
  PresenceRule presence = PresenceRule::at_least_one;
  bool continuity_correction = true;

  std::vector<unsigned> effective_ngram_grid() const;
  LambdaGrid effective_lambda_grid() const;

  /// Throws config_error on an inconsistent configuration.
  void validate() const;

  /// Fields that influence results. Paths, output location and worker
  /// count are excluded.
  nlohmann::json to_json() const;
};

struct CurvePoint {
  double x = 0;
  double accuracy = 0;
  bool failed = false;
};

struct PredictionRecord {
  std::string id;
  int gold = 0;
  int predicted = 0;
  double score = 0;
};

struct BaselineSummary {
  double lambda = 0;
  double valid_accuracy = 0;
  double test_accuracy = 0;
  std::vector<CurvePoint> lambda_curve;
  std::vector<PredictionRecord> test_predictions;
};

struct RunReport {
  std::string status = "ok";
  std::string error;
  std::string config_hash;
  nlohmann::json config;
  std::string corpus_fingerprint;
  Label class_positive = Label::satirical;
  Representation representation = Representation::pbsk;
  TextMode task = TextMode::full;
  bool domain_adapt = false;
  unsigned chosen_n = 0;
  double chosen_lambda = 0;
  double valid_accuracy = 0;
  double test_accuracy = 0;
  Confusion test_confusion;
  std::vector<CurvePoint> ngram_curve;
  std::vector<CurvePoint> lambda_curve;
  std::vector<PredictionRecord> valid_predictions;
  std::vector<PredictionRecord> test_predictions;
  /// Present for domain-adapted runs: the same representation without
  /// adaptation, tuned on its own, and the paired test against it.
  std::optional<BaselineSummary> baseline;
  std::optional<McNemarResult> vs_baseline;
  nlohmann::json metadata;
  std::vector<std::string> notes;
  /// Wall time and cache activity, the only fields that differ between
  /// reruns of one configuration.
  nlohmann::json timing;

  nlohmann::json to_json() const;
  static RunReport from_json(const nlohmann::json& j);
};

RunReport load_report(const std::filesystem::path& path);
void save_report(const std::filesystem::path& path, const RunReport& report);

/// Optional inputs supplied in memory instead of through config paths.
struct ExperimentInputs {
  const LabeledCorpus* corpus = nullptr;
  const DenseMatrix* dense = nullptr;
  /// External unlabeled target documents (string kernels).
  const std::vector<Article>* target_articles = nullptr;
  /// External target vectors (dense representation).
  const DenseMatrix* target_dense = nullptr;
};

/// Full protocol: sweep n at sweep_lambda, tune lambda at the chosen n,
/// re-tune after domain adaptation when enabled, then report validation
/// and test accuracy. Test labels are read only after all choices are
/// made. With a non-empty output_dir the run holds a lock on the directory,
/// reuses kernel caches under cache/, and writes report, model,
/// predictions and curves to runs/<config hash>/. A failing run still
/// writes its partial report with status "failed" before rethrowing.
RunReport run_experiment(const ExperimentConfig& cfg, const ExperimentInputs& inputs = {});

/// Directory holding the artifacts of a configuration.
std::filesystem::path run_directory(const ExperimentConfig& cfg, const RunReport& report);

struct Comparison {
  McNemarResult mcnemar;
  std::string table;
};

/// Paired McNemar test of two runs over the same test ids (any order).
/// Throws argument_error when the id sets or gold labels differ.
Comparison compare_runs(const RunReport& a, const RunReport& b, bool continuity_correction = true,
                        const std::string& name_a = "A", const std::string& name_b = "B");

/// Writes ngram_curve.tsv, lambda_curve.tsv and, for adapted runs,
/// baseline_lambda_curve.tsv. Returns the files written.
std::vector<std::filesystem::path> emit_curves(const RunReport& report,
                                               const std::filesystem::path& dir);

/// Plain-text summary table (validation and test accuracy per row, dagger
/// for a significant improvement over the baseline).
std::string summary_table(const RunReport& report);

/// Test accuracy of a string-kernel model trained on `train`. No source
/// separation is checked, so this also measures in-source accuracy.
double holdout_accuracy(const std::vector<Article>& train, const std::vector<Article>& test,
                        KernelKind kind, unsigned n, double lambda, TextMode task,
                        Label class_positive = Label::satirical, unsigned workers = 0);

}  // namespace strkern
