#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "strkern/errors.hpp"
#include "strkern/experiment.hpp"
#include "strkern/kernel_cache.hpp"
#include "strkern/synthetic.hpp"

using namespace strkern;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("strkern_exp_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.train_size = 40;
  s.valid_size = 20;
  s.test_size = 20;
  s.doc_length = 25;
  return s;
}

ExperimentConfig kernel_config(const fs::path& out = {}) {
  ExperimentConfig cfg;
  cfg.ngram_grid = {3, 4};
  cfg.lambda_grid = {1e-1, 1e-2, 1e-3};
  cfg.output_dir = out;
  cfg.workers = 1;
  return cfg;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  const auto s = read_text(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

/// Synthetic dense features: the class direction plus a source offset.
DenseMatrix dense_features(const LabeledCorpus& c, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0, 1);
  DenseMatrix d;
  d.values.resize(static_cast<Eigen::Index>(c.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& a = c.articles()[i];
    d.row_ids.push_back(a.id);
    for (std::size_t k = 0; k < dim; ++k) d.values(i, k) = noise(rng);
    d.values(i, 0) += c.sign(a.label) * 1.5;
    d.values(i, 1) += a.split == Split::train ? 2.0 : -2.0;
  }
  return d;
}

}  // namespace

TEST_CASE("config defaults and validation") {
  ExperimentConfig cfg;
  CHECK(cfg.effective_ngram_grid() == std::vector<unsigned>{4, 5, 6, 7, 8});
  cfg.task = TextMode::headline;
  CHECK(cfg.effective_ngram_grid() == std::vector<unsigned>{2, 3, 4, 5, 6, 7, 8});
  CHECK(cfg.effective_lambda_grid().values().size() == 7);
  CHECK(cfg.sweep_lambda == 1e-3);

  ExperimentConfig dup;
  dup.ngram_grid = {3, 3};
  CHECK_THROWS_AS(dup.validate(), config_error);
  ExperimentConfig zero;
  zero.ngram_grid = {0};
  CHECK_THROWS_AS(zero.validate(), config_error);
  ExperimentConfig lam;
  lam.lambda_grid = {-1};
  CHECK_THROWS_AS(lam.validate(), error);
}

TEST_CASE("synthetic generator is deterministic and keeps sources apart") {
  const auto a = generate_articles(small_spec());
  const auto b = generate_articles(small_spec());
  CHECK(a == b);
  auto other = small_spec();
  other.seed = 2;
  CHECK(generate_articles(other) != a);
  CHECK_NOTHROW(validate_corpus(a));
  CHECK(a.size() == 80);
  CHECK(a.front().id == "syn-000000");
  CHECK_THROWS_AS(validate_corpus(generate_in_source_articles(small_spec())), cross_source_violation);

  auto empty = small_spec();
  empty.test_size = 0;
  CHECK_THROWS_AS(generate_articles(empty), argument_error);

  SUBCASE("planted token goes into every positive document only") {
    auto s = small_spec();
    s.planted_token = "ZORGLUB";
    for (const auto& art : generate_articles(s)) {
      const bool has = art.body.find("ZORGLUB") != std::string::npos;
      CHECK(has == (art.label == Label::satirical));
    }
  }
}

TEST_CASE("planted 40-document corpus is classified perfectly") {
  SyntheticSpec s;
  s.train_size = 20;
  s.valid_size = 10;
  s.test_size = 10;
  s.planted_token = "ZORGLUB";
  s.confounder_strength = 0;
  s.class_rate = 0;
  s.filler_vocabulary = 10;
  const auto corpus = generate_synthetic(s);
  REQUIRE(corpus.size() == 40);
  auto cfg = kernel_config();
  cfg.ngram_grid = {};
  const auto r = run_experiment(cfg, {&corpus});
  CHECK(r.test_accuracy == 1.0);
  CHECK(r.valid_accuracy == 1.0);
}

TEST_CASE("protocol choices are members of their grids") {
  const auto corpus = generate_synthetic(small_spec());
  const auto cfg = kernel_config();
  const auto r = run_experiment(cfg, {&corpus});
  CHECK((r.chosen_n == 3 || r.chosen_n == 4));
  CHECK(std::count(cfg.lambda_grid.begin(), cfg.lambda_grid.end(), r.chosen_lambda) == 1);
  CHECK(r.ngram_curve.size() == 2);
  CHECK(r.lambda_curve.size() == 3);
  CHECK(r.test_predictions.size() == 20);
  CHECK(r.valid_predictions.size() == 20);
  CHECK(r.test_confusion.total() == 20);
  CHECK_FALSE(r.baseline.has_value());
  CHECK(r.status == "ok");

  // the chosen n has the best sweep accuracy, the smaller n on ties
  double best = -1;
  unsigned best_n = 0;
  for (const auto& p : r.ngram_curve) {
    if (p.accuracy > best) {
      best = p.accuracy;
      best_n = static_cast<unsigned>(p.x);
    }
  }
  CHECK(r.chosen_n == best_n);
}

TEST_CASE("test labels do not influence choices") {
  auto arts = generate_articles(small_spec());
  const auto corpus = LabeledCorpus(arts);
  for (auto& a : arts) {
    if (a.split == Split::test) a.label = a.label == Label::regular ? Label::satirical : Label::regular;
  }
  const auto flipped = LabeledCorpus(arts);
  auto cfg = kernel_config();
  cfg.domain_adapt = true;
  const auto r1 = run_experiment(cfg, {&corpus});
  const auto r2 = run_experiment(cfg, {&flipped});
  CHECK(r1.chosen_n == r2.chosen_n);
  CHECK(r1.chosen_lambda == r2.chosen_lambda);
  CHECK(r1.valid_accuracy == r2.valid_accuracy);
  CHECK(r1.test_accuracy + r2.test_accuracy == doctest::Approx(1.0));
}

TEST_CASE("reruns are identical and reuse bit-identical caches") {
  const auto dir = scratch("rerun");
  const auto corpus = generate_synthetic(small_spec());
  auto cfg = kernel_config(dir);
  cfg.domain_adapt = true;
  const auto r1 = run_experiment(cfg, {&corpus});
  const auto run_dir = run_directory(cfg, r1);
  const auto first_json = read_text(run_dir / "report.json");
  CHECK(r1.timing.at("kernel_blocks_computed").get<int>() > 0);

  std::vector<fs::path> caches;
  for (const auto& e : fs::directory_iterator(dir / "cache")) caches.push_back(e.path());
  REQUIRE_FALSE(caches.empty());

  const auto r2 = run_experiment(cfg, {&corpus});
  CHECK(r2.timing.at("kernel_blocks_computed") == 0);
  CHECK(r2.timing.at("kernel_cache_hits").get<int>() > 0);
  auto j1 = r1.to_json();
  auto j2 = r2.to_json();
  j1.erase("timing");
  j2.erase("timing");
  CHECK(j1.dump() == j2.dump());
  auto f1 = nlohmann::json::parse(first_json);
  f1.erase("timing");
  CHECK(f1.dump() == j2.dump());

  // a cached block matches a fresh computation bit for bit
  const auto cached = load_kernel_matrix(caches.front());
  std::vector<NgramProfile> rows;
  std::vector<NgramProfile> cols;
  std::map<std::string, const Article*> by_id;
  for (const auto& a : corpus.articles()) by_id[a.id] = &a;
  for (const auto& id : cached.row_ids) rows.push_back(extract_profile(document_text(*by_id[id], TextMode::full), cached.n, id));
  for (const auto& id : cached.col_ids) cols.push_back(extract_profile(document_text(*by_id[id], TextMode::full), cached.n, id));
  const auto fresh = gram_block(rows, cols, cached.kind);
  CHECK(fresh.values == cached.values);

  for (const char* f : {"model.fsdl", "predictions_valid.tsv", "predictions_test.tsv",
                        "ngram_curve.tsv", "lambda_curve.tsv", "baseline_lambda_curve.tsv",
                        "summary.txt"}) {
    CHECK(fs::exists(run_dir / f));
  }
  CHECK_FALSE(fs::exists(dir / ".lock"));
  fs::remove_all(dir);
}

TEST_CASE("worker count does not change results") {
  const auto corpus = generate_synthetic(small_spec());
  auto cfg = kernel_config();
  cfg.representation = Representation::hisk;
  cfg.workers = 1;
  auto a = run_experiment(cfg, {&corpus}).to_json();
  cfg.workers = 4;
  auto b = run_experiment(cfg, {&corpus}).to_json();
  a.erase("timing");
  b.erase("timing");
  CHECK(a == b);
}

TEST_CASE("locked output directory is refused") {
  const auto dir = scratch("lock");
  std::ofstream(dir / ".lock") << "1\n";
  const auto corpus = generate_synthetic(small_spec());
  CHECK_THROWS_AS(run_experiment(kernel_config(dir), {&corpus}), config_error);
  fs::remove_all(dir);
}

TEST_CASE("failed runs leave a report marked failed") {
  const auto dir = scratch("failed");
  const auto corpus = generate_synthetic(small_spec());
  auto dense = dense_features(corpus, 6, 1);
  dense = dense.select(std::vector<std::string>(dense.row_ids.begin(), dense.row_ids.end() - 1));
  ExperimentConfig cfg;
  cfg.representation = Representation::dense;
  cfg.dense_features = "in-memory";
  cfg.output_dir = dir;
  CHECK_THROWS_AS(run_experiment(cfg, {&corpus, &dense}), argument_error);
  bool found = false;
  for (const auto& e : fs::directory_iterator(dir / "runs")) {
    const auto r = load_report(e.path());
    CHECK(r.status == "failed");
    CHECK_FALSE(r.error.empty());
    found = true;
  }
  CHECK(found);
  fs::remove_all(dir);
}

TEST_CASE("dense representation with and without adaptation") {
  const auto corpus = generate_synthetic(small_spec());
  const auto dense = dense_features(corpus, 8, 3);
  ExperimentConfig cfg;
  cfg.representation = Representation::dense;
  cfg.dense_features = "in-memory";
  const auto base = run_experiment(cfg, {&corpus, &dense});
  CHECK(base.metadata.at("feature_dim") == 8);
  CHECK(base.chosen_n == 0);
  CHECK(base.ngram_curve.empty());

  cfg.domain_adapt = true;
  const auto da = run_experiment(cfg, {&corpus, &dense});
  CHECK(da.metadata.at("augmented_dim") == 8 + 20);
  REQUIRE(da.baseline.has_value());
  CHECK(da.baseline->test_accuracy == base.test_accuracy);
  CHECK(da.vs_baseline.has_value());

  SUBCASE("external target set") {
    const auto target = dense_features(generate_synthetic(small_spec()), 8, 9).select({"syn-000001", "syn-000002", "syn-000003"});
    cfg.target_set = "external.fsdm";
    const auto ext = run_experiment(cfg, {&corpus, &dense, nullptr, &target});
    CHECK(ext.metadata.at("augmented_dim") == 8 + 3);
    CHECK(ext.metadata.at("target_size") == 3);
  }
}

TEST_CASE("external unlabeled target documents") {
  const auto corpus = generate_synthetic(small_spec());
  std::vector<Article> target;
  for (const auto* a : corpus.split(Split::test)) {
    Article t = *a;
    t.id = "ext-" + t.id;
    target.push_back(t);
  }
  auto cfg = kernel_config();
  cfg.domain_adapt = true;
  cfg.target_set = "targets.jsonl";
  const auto r = run_experiment(cfg, {&corpus, nullptr, &target});
  CHECK(r.metadata.at("target_size") == target.size());
  CHECK(r.config.at("target_set") == "external");
}

TEST_CASE("compare_runs") {
  const auto corpus = generate_synthetic(small_spec());
  auto cfg = kernel_config();
  const auto a = run_experiment(cfg, {&corpus});
  const auto self = compare_runs(a, a);
  CHECK(self.mcnemar.statistic == 0);
  CHECK_FALSE(self.mcnemar.significant);
  CHECK(self.table.find("McNemar") != std::string::npos);

  cfg.domain_adapt = true;
  const auto b = run_experiment(cfg, {&corpus});
  const auto ab = compare_runs(a, b);
  CHECK(ab.mcnemar.n01 + ab.mcnemar.n10 <= 20);

  RunReport shuffled = b;
  std::reverse(shuffled.test_predictions.begin(), shuffled.test_predictions.end());
  CHECK(compare_runs(a, shuffled).mcnemar.statistic == ab.mcnemar.statistic);

  RunReport disjoint = b;
  for (auto& p : disjoint.test_predictions) p.id = "other-" + p.id;
  CHECK_THROWS_AS(compare_runs(a, disjoint), argument_error);
  RunReport shorter = b;
  shorter.test_predictions.pop_back();
  CHECK_THROWS_AS(compare_runs(a, shorter), argument_error);
}

TEST_CASE("emit_curves writes one row per grid point") {
  const auto dir = scratch("curves");
  RunReport r;
  for (unsigned n = 4; n <= 8; ++n) r.ngram_curve.push_back({static_cast<double>(n), 0.5, false});
  for (double l : LambdaGrid::standard().values()) r.lambda_curve.push_back({l, 0.6, l < 1e-6});
  const auto files = emit_curves(r, dir);
  REQUIRE(files.size() == 2);
  CHECK(line_count(dir / "ngram_curve.tsv") == 1 + 5);
  CHECK(line_count(dir / "lambda_curve.tsv") == 1 + 7);
  CHECK(read_text(dir / "lambda_curve.tsv").find("1e-07\tnan") != std::string::npos);

  RunReport empty;
  emit_curves(empty, dir);
  CHECK(read_text(dir / "ngram_curve.tsv") == "n\taccuracy\n");
  CHECK(read_text(dir / "lambda_curve.tsv") == "lambda\taccuracy\n");
  fs::remove_all(dir);
}

TEST_CASE("report JSON round-trip") {
  const auto corpus = generate_synthetic(small_spec());
  auto cfg = kernel_config();
  cfg.domain_adapt = true;
  const auto r = run_experiment(cfg, {&corpus});
  const auto back = RunReport::from_json(nlohmann::json::parse(r.to_json().dump()));
  CHECK(back.to_json() == r.to_json());
  CHECK(summary_table(r).find("+ DA") != std::string::npos);
}
