#include "strkern/experiment.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "strkern/domain_adapt.hpp"
#include "strkern/errors.hpp"
#include "strkern/hash.hpp"
#include "strkern/kernel_cache.hpp"

namespace strkern {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view to_string(Representation r) noexcept {
  switch (r) {
    case Representation::pbsk: return "pbsk";
    case Representation::hisk: return "hisk";
    case Representation::dense: return "dense";
  }
  return "?";
}

Representation parse_representation(std::string_view text) {
  if (text == "pbsk") return Representation::pbsk;
  if (text == "hisk") return Representation::hisk;
  if (text == "dense") return Representation::dense;
  throw config_error("unknown representation '" + std::string(text) + "'");
}

std::vector<unsigned> ExperimentConfig::effective_ngram_grid() const {
  if (!ngram_grid.empty()) return ngram_grid;
  if (task == TextMode::full) return {4, 5, 6, 7, 8};
  return {2, 3, 4, 5, 6, 7, 8};
}

LambdaGrid ExperimentConfig::effective_lambda_grid() const {
  if (lambda_grid.empty()) return LambdaGrid::standard();
  try {
    return LambdaGrid(lambda_grid);
  } catch (const argument_error& e) {
    throw config_error(e.what());
  }
}

void ExperimentConfig::validate() const {
  effective_lambda_grid();
  if (representation != Representation::dense) {
    std::set<unsigned> seen;
    for (unsigned n : effective_ngram_grid()) {
      if (n == 0) throw config_error("n-gram lengths must be positive");
      if (!seen.insert(n).second) throw config_error("n-gram grid has duplicates");
    }
  }
  if (!(sweep_lambda > 0)) throw config_error("sweep lambda must be positive");
  if (!(da_scale > 0) || !std::isfinite(da_scale)) throw config_error("DA scale must be positive");
  if (target_set.empty()) throw config_error("target set must be 'valid' or a path");
}

json ExperimentConfig::to_json() const {
  json j;
  j["task"] = to_string(task);
  j["representation"] = to_string(representation);
  if (representation != Representation::dense) {
    j["ngram_grid"] = effective_ngram_grid();
    j["presence_rule"] = presence == PresenceRule::at_least_one ? "at_least_one" : "more_than_one";
    j["case_fold"] = text.case_fold;
    j["strip_accents"] = text.strip_accents;
  }
  j["lambda_grid"] = effective_lambda_grid().values();
  j["sweep_lambda"] = sweep_lambda;
  j["domain_adapt"] = domain_adapt;
  if (domain_adapt) {
    j["target_set"] = target_set == "valid" ? "valid" : "external";
    j["da_scale"] = da_scale;
  }
  j["normalize"] = normalize;
  j["class_positive"] = to_string(class_positive);
  j["continuity_correction"] = continuity_correction;
  j["seed"] = seed;
  return j;
}

// ---------------------------------------------------------------------------
// Report serialization

namespace {

json curve_json(const std::vector<CurvePoint>& curve) {
  json arr = json::array();
  for (const auto& p : curve) arr.push_back({{"x", p.x}, {"accuracy", p.accuracy}, {"failed", p.failed}});
  return arr;
}

std::vector<CurvePoint> curve_from(const json& arr) {
  std::vector<CurvePoint> out;
  for (const auto& p : arr) {
    out.push_back({p.at("x").get<double>(), p.at("accuracy").get<double>(),
                   p.value("failed", false)});
  }
  return out;
}

json predictions_json(const std::vector<PredictionRecord>& preds) {
  json arr = json::array();
  for (const auto& p : preds) {
    arr.push_back({{"id", p.id}, {"gold", p.gold}, {"predicted", p.predicted}, {"score", p.score}});
  }
  return arr;
}

std::vector<PredictionRecord> predictions_from(const json& arr) {
  std::vector<PredictionRecord> out;
  for (const auto& p : arr) {
    out.push_back({p.at("id").get<std::string>(), p.at("gold").get<int>(),
                   p.at("predicted").get<int>(), p.at("score").get<double>()});
  }
  return out;
}

json mcnemar_json(const McNemarResult& m) {
  return {{"n01", m.n01}, {"n10", m.n10}, {"statistic", m.statistic},
          {"significant", m.significant}, {"critical_value", kMcNemarCritical}};
}

}  // namespace

json RunReport::to_json() const {
  json j;
  j["status"] = status;
  if (!error.empty()) j["error"] = error;
  j["config_hash"] = config_hash;
  j["config"] = config;
  j["corpus_fingerprint"] = corpus_fingerprint;
  j["class_positive"] = strkern::to_string(class_positive);
  j["representation"] = strkern::to_string(representation);
  j["task"] = strkern::to_string(task);
  j["domain_adapt"] = domain_adapt;
  j["chosen_n"] = chosen_n;
  j["chosen_lambda"] = chosen_lambda;
  j["valid_accuracy"] = valid_accuracy;
  j["test_accuracy"] = test_accuracy;
  j["test_confusion"] = {{"tp", test_confusion.tp},
                         {"fp", test_confusion.fp},
                         {"tn", test_confusion.tn},
                         {"fn", test_confusion.fn}};
  j["ngram_curve"] = curve_json(ngram_curve);
  j["lambda_curve"] = curve_json(lambda_curve);
  j["valid_predictions"] = predictions_json(valid_predictions);
  j["test_predictions"] = predictions_json(test_predictions);
  if (baseline) {
    j["baseline"] = {{"lambda", baseline->lambda},
                     {"valid_accuracy", baseline->valid_accuracy},
                     {"test_accuracy", baseline->test_accuracy},
                     {"lambda_curve", curve_json(baseline->lambda_curve)},
                     {"test_predictions", predictions_json(baseline->test_predictions)}};
  }
  if (vs_baseline) j["mcnemar_vs_baseline"] = mcnemar_json(*vs_baseline);
  j["metadata"] = metadata.is_null() ? json::object() : metadata;
  j["notes"] = notes;
  j["timing"] = timing.is_null() ? json::object() : timing;
  return j;
}

RunReport RunReport::from_json(const json& j) {
  RunReport r;
  try {
    r.status = j.value("status", "ok");
    r.error = j.value("error", "");
    r.config_hash = j.value("config_hash", "");
    r.config = j.value("config", json::object());
    r.corpus_fingerprint = j.value("corpus_fingerprint", "");
    r.class_positive = parse_label(j.value("class_positive", "satirical"));
    r.representation = parse_representation(j.value("representation", "pbsk"));
    r.task = parse_text_mode(j.value("task", "full"));
    r.domain_adapt = j.value("domain_adapt", false);
    r.chosen_n = j.value("chosen_n", 0u);
    r.chosen_lambda = j.value("chosen_lambda", 0.0);
    r.valid_accuracy = j.value("valid_accuracy", 0.0);
    r.test_accuracy = j.value("test_accuracy", 0.0);
    if (j.contains("test_confusion")) {
      const auto& c = j["test_confusion"];
      r.test_confusion = {c.value("tp", 0ull), c.value("fp", 0ull), c.value("tn", 0ull),
                          c.value("fn", 0ull)};
    }
    r.ngram_curve = curve_from(j.value("ngram_curve", json::array()));
    r.lambda_curve = curve_from(j.value("lambda_curve", json::array()));
    r.valid_predictions = predictions_from(j.value("valid_predictions", json::array()));
    r.test_predictions = predictions_from(j.value("test_predictions", json::array()));
    if (j.contains("baseline")) {
      const auto& b = j["baseline"];
      BaselineSummary s;
      s.lambda = b.value("lambda", 0.0);
      s.valid_accuracy = b.value("valid_accuracy", 0.0);
      s.test_accuracy = b.value("test_accuracy", 0.0);
      s.lambda_curve = curve_from(b.value("lambda_curve", json::array()));
      s.test_predictions = predictions_from(b.value("test_predictions", json::array()));
      r.baseline = std::move(s);
    }
    if (j.contains("mcnemar_vs_baseline")) {
      const auto& m = j["mcnemar_vs_baseline"];
      r.vs_baseline = McNemarResult{m.value("n01", 0ull), m.value("n10", 0ull),
                                    m.value("statistic", 0.0), m.value("significant", false)};
    }
    r.metadata = j.value("metadata", json::object());
    r.notes = j.value("notes", std::vector<std::string>{});
    r.timing = j.value("timing", json::object());
  } catch (const json::exception& e) {
    throw parse_error(std::string("malformed run report: ") + e.what());
  } catch (const argument_error& e) {
    throw parse_error(std::string("malformed run report: ") + e.what());
  } catch (const config_error& e) {
    throw parse_error(std::string("malformed run report: ") + e.what());
  }
  return r;
}

RunReport load_report(const fs::path& path) {
  fs::path file = fs::is_directory(path) ? path / "report.json" : path;
  std::ifstream in(file);
  if (!in) throw parse_error("cannot open report " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw parse_error(file.string() + ": " + e.what());
  }
  return RunReport::from_json(j);
}

void save_report(const fs::path& path, const RunReport& report) {
  std::ofstream out(path);
  if (!out) throw error("cannot write " + path.string());
  out << report.to_json().dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Experiment machinery

namespace {

/// Exclusive lock on an output directory, released on destruction.
class DirectoryLock {
 public:
  explicit DirectoryLock(const fs::path& dir) : path_(dir / ".lock") {
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      throw config_error("output directory is locked by another experiment (" + path_.string() +
                         "); remove the file if no run is active");
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto w = ::write(fd_, pid.data(), pid.size());
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;
  ~DirectoryLock() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }

 private:
  fs::path path_;
  int fd_ = -1;
};

enum class DocSet { train, valid, test, target };

constexpr const char* set_name(DocSet s) {
  switch (s) {
    case DocSet::train: return "train";
    case DocSet::valid: return "valid";
    case DocSet::test: return "test";
    case DocSet::target: return "target";
  }
  return "?";
}

std::vector<int> signs_of(const LabeledCorpus& corpus, const std::vector<const Article*>& docs) {
  std::vector<int> y;
  y.reserve(docs.size());
  for (const auto* a : docs) y.push_back(corpus.sign(a->label));
  return y;
}

std::vector<std::string> ids_of(const std::vector<const Article*>& docs) {
  std::vector<std::string> ids;
  ids.reserve(docs.size());
  for (const auto* a : docs) ids.push_back(a->id);
  return ids;
}

std::vector<PredictionRecord> records(const std::vector<std::string>& ids, const std::vector<int>& gold,
                                      const Predictions& p) {
  std::vector<PredictionRecord> out;
  out.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.push_back({ids[i], gold[i], p.labels[i], p.scores[i]});
  }
  return out;
}

double accuracy_of(const Predictions& p, const std::vector<int>& gold) {
  return accuracy(p.labels, gold).accuracy;
}

std::vector<CurvePoint> to_curve(const TuneResult& t) {
  std::vector<CurvePoint> out;
  for (const auto& p : t.table) out.push_back({p.lambda, p.accuracy, p.failed});
  return out;
}

/// Documents, profiles and Gram blocks for one string-kernel experiment.
class KernelWorkspace {
 public:
  KernelWorkspace(const ExperimentConfig& cfg, const LabeledCorpus& corpus,
                  const std::vector<Article>* external, std::string fingerprint)
      : cfg_(cfg), fingerprint_(std::move(fingerprint)) {
    sets_[DocSet::train] = corpus.split(Split::train);
    sets_[DocSet::valid] = corpus.split(Split::valid);
    sets_[DocSet::test] = corpus.split(Split::test);
    if (external) {
      for (const auto& a : *external) sets_[DocSet::target].push_back(&a);
      target_key_ = "target-" + articles_fingerprint(*external);
    }
    kind_ = cfg.representation == Representation::hisk ? KernelKind::hisk : KernelKind::pbsk;
    if (!cfg.output_dir.empty()) {
      cache_dir_ = cfg.output_dir / "cache";
      fs::create_directories(cache_dir_);
    }
  }

  KernelKind kind() const { return kind_; }

  DocSet resolve(DocSet s) const {
    return (s == DocSet::target && target_key_.empty()) ? DocSet::valid : s;
  }

  const std::vector<const Article*>& docs(DocSet s) const { return sets_.at(resolve(s)); }

  const std::vector<NgramProfile>& profiles(DocSet s, unsigned n) {
    s = resolve(s);
    auto key = std::make_pair(s, n);
    auto it = profiles_.find(key);
    if (it != profiles_.end()) return it->second;
    std::vector<NgramProfile> out;
    out.reserve(docs(s).size());
    for (const auto* a : docs(s)) {
      out.push_back(extract_profile(document_text(*a, cfg_.task, cfg_.text), n, a->id));
    }
    return profiles_.emplace(key, std::move(out)).first->second;
  }

  /// Raw kernel block, from the disk cache when available.
  KernelMatrix block(DocSet rows, DocSet cols, unsigned n) {
    rows = resolve(rows);
    cols = resolve(cols);
    const fs::path direct = cache_path(rows, cols, n);
    const fs::path mirrored = cache_path(cols, rows, n);
    if (!cache_dir_.empty()) {
      if (fs::exists(direct)) {
        ++cache_hits_;
        return load_kernel_matrix(direct);
      }
      if (rows != cols && fs::exists(mirrored)) {
        ++cache_hits_;
        return transpose(load_kernel_matrix(mirrored));
      }
    }
    GramOptions opts{cfg_.presence, cfg_.workers};
    const auto& r = profiles(rows, n);
    KernelMatrix k = rows == cols ? gram_block(r, r, kind_, opts)
                                  : gram_block(r, profiles(cols, n), kind_, opts);
    ++blocks_computed_;
    if (!cache_dir_.empty()) save_kernel_matrix(direct, k);
    return k;
  }

  /// Kernel block with the optional cosine normalization applied.
  KernelMatrix prepared(DocSet rows, DocSet cols, unsigned n) {
    KernelMatrix k = block(rows, cols, n);
    if (!cfg_.normalize) return k;
    return normalize_gram(k, self(rows, n), self(cols, n));
  }

  std::size_t cache_hits() const { return cache_hits_; }
  std::size_t blocks_computed() const { return blocks_computed_; }

 private:
  static KernelMatrix transpose(KernelMatrix k) {
    KernelMatrix t;
    t.row_ids = std::move(k.col_ids);
    t.col_ids = std::move(k.row_ids);
    t.values = k.values.transpose();
    t.kind = k.kind;
    t.n = k.n;
    return t;
  }

  const std::vector<double>& self(DocSet s, unsigned n) {
    s = resolve(s);
    auto key = std::make_pair(s, n);
    auto it = self_.find(key);
    if (it != self_.end()) return it->second;
    return self_.emplace(key, self_kernels(profiles(s, n), kind_, cfg_.presence)).first->second;
  }

  std::string set_key(DocSet s) const {
    return s == DocSet::target ? target_key_ : std::string(set_name(s));
  }

  fs::path cache_path(DocSet rows, DocSet cols, unsigned n) const {
    if (cache_dir_.empty()) return {};
    std::string name = fingerprint_ + "-" + std::string(to_string(cfg_.task)) + "-" +
                       std::string(to_string(kind_)) + "-n" + std::to_string(n);
    if (cfg_.presence == PresenceRule::more_than_one) name += "-gt1";
    if (cfg_.text.case_fold) name += "-fold";
    if (cfg_.text.strip_accents) name += "-noacc";
    name += "-" + set_key(rows) + "x" + set_key(cols) + ".fskm";
    return cache_dir_ / name;
  }

  const ExperimentConfig& cfg_;
  std::string fingerprint_;
  std::string target_key_;
  KernelKind kind_ = KernelKind::pbsk;
  fs::path cache_dir_;
  std::map<DocSet, std::vector<const Article*>> sets_;
  std::map<std::pair<DocSet, unsigned>, std::vector<NgramProfile>> profiles_;
  std::map<std::pair<DocSet, unsigned>, std::vector<double>> self_;
  std::size_t cache_hits_ = 0;
  std::size_t blocks_computed_ = 0;
};

/// Train/eval kernels for one configuration, optionally augmented.
struct KernelBlocks {
  KernelMatrix train;
  KernelMatrix valid;
  KernelMatrix test;
};

KernelBlocks adapt(const KernelBlocks& base, KernelWorkspace& ws, unsigned n, double scale) {
  const auto s_train = similarity_from_kernel(ws.prepared(DocSet::train, DocSet::target, n));
  const auto s_valid = similarity_from_kernel(ws.prepared(DocSet::valid, DocSet::target, n));
  const auto s_test = similarity_from_kernel(ws.prepared(DocSet::test, DocSet::target, n));
  return {augment_gram(base.train, s_train, s_train, scale),
          augment_gram(base.valid, s_valid, s_train, scale),
          augment_gram(base.test, s_test, s_train, scale)};
}

DenseMatrix l2_normalized(DenseMatrix m) {
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    const double norm = m.values.row(i).norm();
    if (norm > 0) m.values.row(i) /= norm;
  }
  return m;
}

struct Outcome {
  double lambda = 0;
  TuneResult tuning;
  Predictions valid;
  Predictions test;
};

Outcome tune_and_fit_kernel(const KernelBlocks& k, const std::vector<int>& y_train,
                            const std::vector<int>& y_valid, const LambdaGrid& grid,
                            bool adapted, DualModel* model_out) {
  std::function<DualModel(double)> trainer = [&](double lambda) {
    return fit_krr(k.train, y_train, lambda);
  };
  std::function<double(const DualModel&)> scorer = [&](const DualModel& m) {
    return accuracy_of(predict_krr(m, k.valid), y_valid);
  };
  Outcome o;
  o.tuning = tune_lambda(trainer, scorer, grid);
  o.lambda = o.tuning.best_lambda;
  DualModel model = fit_krr(k.train, y_train, o.lambda);
  model.domain_adapted = adapted;
  o.valid = predict_krr(model, k.valid);
  o.test = predict_krr(model, k.test);
  if (model_out) *model_out = std::move(model);
  return o;
}

struct DenseBlocks {
  DenseMatrix train;
  DenseMatrix valid;
  DenseMatrix test;
};

Outcome tune_and_fit_dense(const DenseBlocks& x, const std::vector<int>& y_train,
                           const std::vector<int>& y_valid, const LambdaGrid& grid,
                           PrimalModel* model_out) {
  std::function<PrimalModel(double)> trainer = [&](double lambda) {
    return fit_rr(x.train, y_train, lambda);
  };
  std::function<double(const PrimalModel&)> scorer = [&](const PrimalModel& m) {
    return accuracy_of(predict_rr(m, x.valid), y_valid);
  };
  Outcome o;
  o.tuning = tune_lambda(trainer, scorer, grid);
  o.lambda = o.tuning.best_lambda;
  PrimalModel model = fit_rr(x.train, y_train, o.lambda);
  o.valid = predict_rr(model, x.valid);
  o.test = predict_rr(model, x.test);
  if (model_out) *model_out = std::move(model);
  return o;
}

std::string dense_fingerprint(const DenseMatrix& m) {
  Fingerprint fp;
  for (const auto& id : m.row_ids) fp.add(id);
  fp.add_bytes(m.values.data(), static_cast<std::size_t>(m.values.size()) * sizeof(double));
  return fp.hex();
}

void write_predictions_tsv(const fs::path& path, const std::vector<PredictionRecord>& preds) {
  std::ofstream out(path);
  out << "id\tgold\tpredicted\tscore\n";
  for (const auto& p : preds) {
    out << p.id << '\t' << p.gold << '\t' << p.predicted << '\t' << format_double(p.score) << '\n';
  }
}

std::string percent(double acc) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(2);
  ss << acc * 100.0 << '%';
  return ss.str();
}

}  // namespace

fs::path run_directory(const ExperimentConfig& cfg, const RunReport& report) {
  return cfg.output_dir / "runs" / report.config_hash;
}

RunReport run_experiment(const ExperimentConfig& cfg, const ExperimentInputs& inputs) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();

  // Inputs
  LabeledCorpus owned_corpus;
  const LabeledCorpus* corpus = inputs.corpus;
  if (!corpus) {
    owned_corpus = load_corpus(cfg.corpus_path);
    corpus = &owned_corpus;
  }
  LabeledCorpus relabeled = *corpus;
  relabeled.set_class_positive(cfg.class_positive);
  corpus = &relabeled;
  if (corpus->count(Split::train) == 0 || corpus->count(Split::valid) == 0 ||
      corpus->count(Split::test) == 0) {
    throw validation_error("corpus needs non-empty train, valid and test splits");
  }

  const bool external_target = cfg.domain_adapt && cfg.target_set != "valid";
  DenseMatrix owned_dense;
  const DenseMatrix* dense = inputs.dense;
  DenseMatrix owned_target_dense;
  const DenseMatrix* target_dense = inputs.target_dense;
  std::vector<Article> owned_target;
  const std::vector<Article>* target_articles = inputs.target_articles;
  if (cfg.representation == Representation::dense) {
    if (!dense) {
      if (cfg.dense_features.empty()) throw config_error("dense representation needs a feature file");
      owned_dense = load_dense(cfg.dense_features);
      dense = &owned_dense;
    }
    if (external_target && !target_dense) {
      owned_target_dense = load_dense(cfg.target_set);
      target_dense = &owned_target_dense;
    }
  } else if (external_target && !target_articles) {
    owned_target = load_unlabeled(cfg.target_set);
    target_articles = &owned_target;
  }

  RunReport report;
  report.config = cfg.to_json();
  report.corpus_fingerprint = corpus_fingerprint(*corpus);
  report.class_positive = cfg.class_positive;
  report.representation = cfg.representation;
  report.task = cfg.task;
  report.domain_adapt = cfg.domain_adapt;
  {
    Fingerprint fp;
    fp.add(report.config.dump()).add(report.corpus_fingerprint);
    if (dense) fp.add(dense_fingerprint(*dense));
    if (external_target && target_dense) fp.add(dense_fingerprint(*target_dense));
    if (external_target && target_articles) fp.add(articles_fingerprint(*target_articles));
    report.config_hash = fp.hex();
  }
  report.notes.push_back("labels: " + std::string(to_string(cfg.class_positive)) +
                         " = +1; score ties at 0 predict +1");
  if (cfg.representation != Representation::dense && cfg.effective_ngram_grid().size() > 1) {
    report.notes.push_back("n-gram length swept at lambda = " + format_double(cfg.sweep_lambda) +
                           " before lambda tuning");
  }
  if (cfg.domain_adapt && !external_target) {
    report.notes.push_back(
        "domain adaptation uses the unlabeled validation texts as target set while lambda is "
        "tuned on the same validation split");
  }

  std::optional<DirectoryLock> lock;
  fs::path run_dir;
  if (!cfg.output_dir.empty()) {
    fs::create_directories(cfg.output_dir);
    lock.emplace(cfg.output_dir);
    run_dir = run_directory(cfg, report);
    fs::create_directories(run_dir);
  }

  const auto train_docs = corpus->split(Split::train);
  const auto valid_docs = corpus->split(Split::valid);
  const auto test_docs = corpus->split(Split::test);
  const auto y_train = signs_of(*corpus, train_docs);
  const auto y_valid = signs_of(*corpus, valid_docs);
  const auto valid_ids = ids_of(valid_docs);
  const auto test_ids = ids_of(test_docs);
  const LambdaGrid grid = cfg.effective_lambda_grid();

  auto finish = [&](const Outcome& chosen, const Outcome* base) {
    // test labels are first read here, after every choice has been made
    const auto y_test = signs_of(*corpus, test_docs);
    report.chosen_lambda = chosen.lambda;
    report.lambda_curve = to_curve(chosen.tuning);
    report.valid_accuracy = accuracy_of(chosen.valid, y_valid);
    const auto test_eval = accuracy(chosen.test.labels, y_test);
    report.test_accuracy = test_eval.accuracy;
    report.test_confusion = test_eval.confusion;
    report.valid_predictions = records(valid_ids, y_valid, chosen.valid);
    report.test_predictions = records(test_ids, y_test, chosen.test);
    if (base) {
      BaselineSummary b;
      b.lambda = base->lambda;
      b.lambda_curve = to_curve(base->tuning);
      b.valid_accuracy = accuracy_of(base->valid, y_valid);
      b.test_accuracy = accuracy_of(base->test, y_test);
      b.test_predictions = records(test_ids, y_test, base->test);
      report.vs_baseline =
          mcnemar(base->test.labels, chosen.test.labels, y_test, cfg.continuity_correction);
      report.baseline = std::move(b);
    }
  };

  try {
    report.metadata["train_size"] = train_docs.size();
    report.metadata["valid_size"] = valid_docs.size();
    report.metadata["test_size"] = test_docs.size();

    if (cfg.representation == Representation::dense) {
      DenseBlocks x{dense->select(ids_of(train_docs)), dense->select(valid_ids),
                    dense->select(test_ids)};
      if (cfg.normalize) x = {l2_normalized(x.train), l2_normalized(x.valid), l2_normalized(x.test)};
      report.metadata["feature_dim"] = x.train.dim();
      PrimalModel model;
      Outcome base = tune_and_fit_dense(x, y_train, y_valid, grid, &model);
      if (!cfg.domain_adapt) {
        finish(base, nullptr);
      } else {
        DenseMatrix z = external_target ? *target_dense : x.valid;
        if (external_target && cfg.normalize) z = l2_normalized(z);
        report.metadata["target_size"] = z.rows();
        DenseBlocks ax{augment_features(x.train, similarity_block(x.train, z), cfg.da_scale),
                       augment_features(x.valid, similarity_block(x.valid, z), cfg.da_scale),
                       augment_features(x.test, similarity_block(x.test, z), cfg.da_scale)};
        report.metadata["augmented_dim"] = ax.train.dim();
        Outcome adapted = tune_and_fit_dense(ax, y_train, y_valid, grid, &model);
        finish(adapted, &base);
      }
      if (!run_dir.empty()) save_primal_model(run_dir / "model.fspl", model);
    } else {
      KernelWorkspace ws(cfg, *corpus, external_target ? target_articles : nullptr,
                         report.corpus_fingerprint);
      // stage 1: n-gram length at a fixed lambda
      const auto ngrams = cfg.effective_ngram_grid();
      unsigned best_n = 0;
      double best_acc = -1;
      for (unsigned n : ngrams) {
        CurvePoint point{static_cast<double>(n), 0, false};
        try {
          const auto k_train = ws.prepared(DocSet::train, DocSet::train, n);
          const auto k_valid = ws.prepared(DocSet::valid, DocSet::train, n);
          const auto model = fit_krr(k_train, y_train, cfg.sweep_lambda);
          point.accuracy = accuracy_of(predict_krr(model, k_valid), y_valid);
        } catch (const numerical_error&) {
          point.failed = true;
        }
        report.ngram_curve.push_back(point);
        // ties keep the shorter n-gram
        if (!point.failed && point.accuracy > best_acc) {
          best_acc = point.accuracy;
          best_n = n;
        }
      }
      if (best_n == 0) throw numerical_error("training failed for every n-gram length");
      report.chosen_n = best_n;

      // stage 2: lambda at the chosen n
      KernelBlocks base_k{ws.prepared(DocSet::train, DocSet::train, best_n),
                          ws.prepared(DocSet::valid, DocSet::train, best_n),
                          ws.prepared(DocSet::test, DocSet::train, best_n)};
      DualModel model;
      Outcome base = tune_and_fit_kernel(base_k, y_train, y_valid, grid, false, &model);
      if (!cfg.domain_adapt) {
        finish(base, nullptr);
      } else {
        report.metadata["target_size"] = ws.docs(DocSet::target).size();
        const KernelBlocks adapted_k = adapt(base_k, ws, best_n, cfg.da_scale);
        Outcome adapted = tune_and_fit_kernel(adapted_k, y_train, y_valid, grid, true, &model);
        finish(adapted, &base);
      }
      report.metadata["kernel"] = to_string(ws.kind());
      report.metadata["train_gram"] = {train_docs.size(), train_docs.size()};
      report.timing["kernel_blocks_computed"] = ws.blocks_computed();
      report.timing["kernel_cache_hits"] = ws.cache_hits();
      if (!run_dir.empty()) save_dual_model(run_dir / "model.fsdl", model);
    }
  } catch (const error& e) {
    report.status = "failed";
    report.error = e.what();
    if (!run_dir.empty()) save_report(run_dir / "report.json", report);
    throw;
  }

  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
  report.timing["total_seconds"] = elapsed.count();

  if (!run_dir.empty()) {
    save_report(run_dir / "report.json", report);
    write_predictions_tsv(run_dir / "predictions_valid.tsv", report.valid_predictions);
    write_predictions_tsv(run_dir / "predictions_test.tsv", report.test_predictions);
    emit_curves(report, run_dir);
    std::ofstream(run_dir / "summary.txt") << summary_table(report);
  }
  return report;
}

Comparison compare_runs(const RunReport& a, const RunReport& b, bool continuity_correction,
                        const std::string& name_a, const std::string& name_b) {
  if (a.test_predictions.size() != b.test_predictions.size()) {
    throw argument_error("runs cover different numbers of test documents");
  }
  std::map<std::string_view, const PredictionRecord*> by_id;
  for (const auto& p : b.test_predictions) by_id.emplace(p.id, &p);
  std::vector<int> pa, pb, gold;
  for (const auto& p : a.test_predictions) {
    auto it = by_id.find(p.id);
    if (it == by_id.end()) throw argument_error("test id '" + p.id + "' is missing from run B");
    if (it->second->gold != p.gold) throw argument_error("gold label differs for '" + p.id + "'");
    pa.push_back(p.predicted);
    pb.push_back(it->second->predicted);
    gold.push_back(p.gold);
  }
  if (by_id.size() != a.test_predictions.size()) throw argument_error("duplicate test ids");

  Comparison c;
  c.mcnemar = mcnemar(pa, pb, gold, continuity_correction);
  const double acc_a = pa.empty() ? 0 : accuracy(pa, gold).accuracy;
  const double acc_b = pb.empty() ? 0 : accuracy(pb, gold).accuracy;
  const bool dagger = c.mcnemar.significant && acc_b > acc_a;
  std::ostringstream t;
  const std::size_t width = std::max<std::size_t>({name_a.size(), name_b.size(), 14}) + 2;
  auto row = [&](const std::string& name, const std::string& v, const std::string& test) {
    t << name << std::string(width - std::min(width, name.size()), ' ') << v
      << std::string(v.size() < 13 ? 13 - v.size() : 1, ' ') << test << '\n';
  };
  row("Representation", "Validation", "Test");
  row(name_a, percent(a.valid_accuracy), percent(acc_a));
  row(name_b, percent(b.valid_accuracy) , percent(acc_b) + (dagger ? " †" : ""));
  t << "McNemar: n01=" << c.mcnemar.n01 << " n10=" << c.mcnemar.n10
    << " statistic=" << format_double(c.mcnemar.statistic, 6)
    << (c.mcnemar.significant ? " significant" : " not significant") << " at 0.05\n";
  c.table = t.str();
  return c;
}

namespace {

/// Shortest text that reads back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_curve(const fs::path& path, const char* x_name, const std::vector<CurvePoint>& curve) {
  std::ofstream out(path);
  if (!out) throw error("cannot write " + path.string());
  out << x_name << "\taccuracy\n";
  for (const auto& p : curve) {
    out << shortest(p.x) << '\t' << (p.failed ? std::string("nan") : shortest(p.accuracy))
        << '\n';
  }
}

}  // namespace

std::vector<fs::path> emit_curves(const RunReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<fs::path> written{dir / "ngram_curve.tsv", dir / "lambda_curve.tsv"};
  write_curve(written[0], "n", report.ngram_curve);
  write_curve(written[1], "lambda", report.lambda_curve);
  if (report.baseline) {
    written.push_back(dir / "baseline_lambda_curve.tsv");
    write_curve(written.back(), "lambda", report.baseline->lambda_curve);
  }
  return written;
}

std::string summary_table(const RunReport& report) {
  std::string name(to_string(report.representation));
  for (auto& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (report.chosen_n) name += " (n=" + std::to_string(report.chosen_n) + ")";
  std::ostringstream t;
  auto row = [&](const std::string& label, double v, double test, bool dagger_v, bool dagger_t) {
    t << label << std::string(label.size() < 24 ? 24 - label.size() : 1, ' ') << percent(v)
      << (dagger_v ? "†" : " ") << "    " << percent(test) << (dagger_t ? "†" : "")
      << '\n';
  };
  t << "Representation          Validation Test\n";
  if (report.baseline) {
    row(name, report.baseline->valid_accuracy, report.baseline->test_accuracy, false, false);
    const bool sig = report.vs_baseline && report.vs_baseline->significant &&
                     report.test_accuracy > report.baseline->test_accuracy;
    row(name + " + DA", report.valid_accuracy, report.test_accuracy, false, sig);
    if (report.vs_baseline) {
      t << "McNemar vs baseline: n01=" << report.vs_baseline->n01
        << " n10=" << report.vs_baseline->n10
        << " statistic=" << format_double(report.vs_baseline->statistic, 6) << '\n';
    }
  } else {
    row(name, report.valid_accuracy, report.test_accuracy, false, false);
  }
  t << "lambda=" << format_double(report.chosen_lambda, 6) << '\n';
  return t.str();
}

double holdout_accuracy(const std::vector<Article>& train, const std::vector<Article>& test,
                        KernelKind kind, unsigned n, double lambda, TextMode task,
                        Label class_positive, unsigned workers) {
  auto profiles = [&](const std::vector<Article>& docs) {
    std::vector<NgramProfile> out;
    out.reserve(docs.size());
    for (const auto& a : docs) out.push_back(extract_profile(document_text(a, task), n, a.id));
    return out;
  };
  auto signs = [&](const std::vector<Article>& docs) {
    std::vector<int> y;
    for (const auto& a : docs) y.push_back(a.label == class_positive ? 1 : -1);
    return y;
  };
  const auto p_train = profiles(train);
  const auto p_test = profiles(test);
  GramOptions opts;
  opts.workers = workers;
  const auto model = fit_krr(gram_block(p_train, p_train, kind, opts), signs(train), lambda);
  const auto pred = predict_krr(model, gram_block(p_test, p_train, kind, opts));
  return accuracy(pred.labels, signs(test)).accuracy;
}

}  // namespace strkern
