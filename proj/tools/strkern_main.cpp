// strkern: string-kernel experiments for cross-source binary text
// classification.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "strkern/corpus.hpp"
#include "strkern/errors.hpp"
#include "strkern/experiment.hpp"
#include "strkern/explain.hpp"
#include "strkern/synthetic.hpp"

namespace fs = std::filesystem;
using namespace strkern;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kNumerical = 4 };

void print_stats(const LabeledCorpus& corpus, std::ostream& out) {
  const auto stats = corpus_stats(corpus);
  out << "set\tregular_samples\tregular_tokens\tsatirical_samples\tsatirical_tokens\n";
  for (Split s : {Split::train, Split::valid, Split::test}) {
    const auto& r = stats.at(s, Label::regular);
    const auto& t = stats.at(s, Label::satirical);
    out << to_string(s) << '\t' << r.sample_count << '\t' << r.token_count << '\t'
        << t.sample_count << '\t' << t.token_count << '\n';
  }
  const auto r = stats.label_total(Label::regular);
  const auto t = stats.label_total(Label::satirical);
  out << "total\t" << r.sample_count << '\t' << r.token_count << '\t' << t.sample_count << '\t'
      << t.token_count << '\n';
}

struct RunFlags {
  std::string corpus;
  std::string task = "full";
  std::string representation = "pbsk";
  std::vector<unsigned> ngrams;
  std::vector<double> lambdas;
  double sweep_lambda = 1e-3;
  bool domain_adapt = false;
  std::string target = "valid";
  double da_scale = 1.0;
  bool normalize = false;
  std::string positive = "satirical";
  std::string out;
  unsigned workers = 0;
  std::uint64_t seed = 1;
  std::string dense;
  bool case_fold = false;
  bool strip_accents = false;
  bool strict_presence = false;
  bool no_continuity = false;
};

/// Expands `run --config FILE` into flags. Keys are flag names without the
/// leading dashes, at top level or under [run]; flags given on the command
/// line win.
std::vector<std::string> expand_run_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0] != "run") return args;
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw config_error("cannot read config file " + path);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw config_error(path + ": " + e.what());
  }
  std::set<std::string> given;
  for (const auto& a : args) {
    if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') - 2));
  }
  for (const auto& item : items) {
    if (!item.parents.empty() && item.parents != std::vector<std::string>{"run"}) continue;
    std::string name = item.name;
    std::replace(name.begin(), name.end(), '_', '-');
    if (name == "++" || name == "--" || given.count(name)) continue;
    if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
      if (item.inputs[0] == "true") args.push_back("--" + name);
      continue;
    }
    std::string joined;
    for (const auto& v : item.inputs) joined += (joined.empty() ? "" : ",") + v;
    args.push_back("--" + name + "=" + joined);
  }
  return args;
}

ExperimentConfig to_config(const RunFlags& f) {
  ExperimentConfig cfg;
  cfg.corpus_path = f.corpus;
  try {
    cfg.task = parse_text_mode(f.task);
    cfg.class_positive = parse_label(f.positive);
  } catch (const argument_error& e) {
    throw config_error(e.what());
  }
  cfg.representation = parse_representation(f.representation);
  cfg.ngram_grid = f.ngrams;
  cfg.lambda_grid = f.lambdas;
  cfg.sweep_lambda = f.sweep_lambda;
  cfg.domain_adapt = f.domain_adapt;
  cfg.target_set = f.target;
  cfg.da_scale = f.da_scale;
  cfg.normalize = f.normalize;
  cfg.output_dir = f.out;
  cfg.workers = f.workers;
  cfg.seed = f.seed;
  cfg.dense_features = f.dense;
  cfg.text.case_fold = f.case_fold;
  cfg.text.strip_accents = f.strip_accents;
  cfg.presence = f.strict_presence ? PresenceRule::more_than_one : PresenceRule::at_least_one;
  cfg.continuity_correction = !f.no_continuity;
  if (cfg.representation == Representation::dense && cfg.dense_features.empty()) {
    throw config_error("--representation dense requires --dense <FSDM file>");
  }
  if (cfg.corpus_path.empty()) throw config_error("--corpus is required");
  return cfg;
}

void write_tsv(const fs::path& path, const std::vector<RankedFeature>& features, Label positive,
               std::size_t top) {
  std::ofstream out(path);
  if (!out) throw error("cannot write " + path.string());
  write_ranked_tsv(out, features, positive, top);
  std::cout << "wrote " << path.string() << '\n';
}

fs::path report_path(const fs::path& p) {
  return fs::is_directory(p) ? p / "report.json" : p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "strkern - string kernels, (kernel) ridge regression and unsupervised domain adaptation\n"
      "for cross-source binary text classification"};
  app.require_subcommand(1);

  // prepare
  std::string prep_in, prep_out;
  auto* prepare = app.add_subcommand("prepare", "Convert a raw dump into the JSON-lines corpus format");
  prepare->add_option("--input", prep_in,
                      "Directory with train/, valid/ (or validation/), test/ entries; each a "
                      "directory of regular/ and satirical/ text files or a <split>.tsv file")
      ->required();
  prepare->add_option("--output", prep_out, "Output corpus (.jsonl)")->required();

  // stats
  std::string stats_corpus;
  auto* stats = app.add_subcommand("stats", "Sample and token counts per split and class");
  stats->add_option("--corpus", stats_corpus, "Corpus file (.jsonl)")->required();

  // run
  RunFlags rf;
  auto* run = app.add_subcommand("run", "Tune, train and evaluate one configuration");
  std::string run_config;
  run->add_option("--config", run_config, "TOML file with any of the flags below as keys");
  run->add_option("--corpus", rf.corpus, "Corpus file (.jsonl)");
  run->add_option("--task", rf.task, "full (title + body) or headline")
      ->check(CLI::IsMember({"full", "headline"}))
      ->capture_default_str();
  run->add_option("--representation", rf.representation, "pbsk, hisk or dense")
      ->check(CLI::IsMember({"pbsk", "hisk", "dense"}))
      ->capture_default_str();
  run->add_option("--ngrams", rf.ngrams,
                  "n-gram lengths to sweep (default 4,5,6,7,8 for full, 2..8 for headline)")
      ->delimiter(',');
  run->add_option("--lambdas", rf.lambdas, "Regularization grid (default 1e-1,...,1e-7)")
      ->delimiter(',');
  run->add_option("--sweep-lambda", rf.sweep_lambda, "Lambda used during the n-gram sweep")
      ->capture_default_str();
  run->add_flag("--da", rf.domain_adapt, "Enable unsupervised domain adaptation");
  run->add_option("--target", rf.target,
                  "Target set for adaptation: 'valid' or a path (.jsonl for string kernels, "
                  "FSDM for dense)")
      ->capture_default_str();
  run->add_option("--da-scale", rf.da_scale, "Multiplier on the appended similarity block")
      ->capture_default_str();
  run->add_flag("--normalize", rf.normalize, "Cosine-normalize kernels (off by default)");
  run->add_option("--positive", rf.positive, "Class mapped to +1")
      ->check(CLI::IsMember({"regular", "satirical"}))
      ->capture_default_str();
  run->add_option("--out", rf.out, "Output directory (caches, runs)");
  run->add_option("--workers", rf.workers, "Worker threads (0 = all cores)")->capture_default_str();
  run->add_option("--seed", rf.seed, "Seed recorded with the run")->capture_default_str();
  run->add_option("--dense", rf.dense, "FSDM feature file for --representation dense");
  run->add_flag("--case-fold", rf.case_fold, "Lower-case texts before n-gram extraction");
  run->add_flag("--strip-accents", rf.strip_accents, "Remove Latin diacritics");
  run->add_flag("--strict-presence", rf.strict_presence,
                "PBSK counts only n-grams occurring more than once (study flag)");
  run->add_flag("--no-continuity", rf.no_continuity, "McNemar without continuity correction");

  // compare
  std::string cmp_a, cmp_b, cmp_name_a = "A", cmp_name_b = "B";
  bool cmp_no_cc = false;
  auto* compare = app.add_subcommand("compare", "Paired McNemar test between two runs");
  compare->add_option("report_a", cmp_a, "Run directory or report.json")->required();
  compare->add_option("report_b", cmp_b, "Run directory or report.json")->required();
  compare->add_option("--name-a", cmp_name_a, "Row label for the first run");
  compare->add_option("--name-b", cmp_name_b, "Row label for the second run");
  compare->add_flag("--no-continuity", cmp_no_cc, "Disable the continuity correction");

  // curves
  std::string curves_run, curves_out;
  auto* curves = app.add_subcommand("curves", "Write tuning curves as TSV");
  curves->add_option("report", curves_run, "Run directory or report.json")->required();
  curves->add_option("--out", curves_out, "Output directory (default: the run directory)");

  // synth
  SyntheticSpec ss;
  std::string synth_out, synth_positive = "satirical";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic cross-source corpus");
  synth->add_option("--output", synth_out, "Output corpus (.jsonl)")->required();
  synth->add_option("--train", ss.train_size, "Training documents")->capture_default_str();
  synth->add_option("--valid", ss.valid_size, "Validation documents")->capture_default_str();
  synth->add_option("--test", ss.test_size, "Test documents")->capture_default_str();
  synth->add_option("--length", ss.doc_length, "Body length in tokens")->capture_default_str();
  synth->add_option("--class-vocab", ss.class_vocabulary, "Words per class")->capture_default_str();
  synth->add_option("--filler-vocab", ss.filler_vocabulary, "Shared filler words")
      ->capture_default_str();
  synth->add_option("--style-vocab", ss.style_vocabulary, "Style words per source")
      ->capture_default_str();
  synth->add_option("--class-rate", ss.class_rate, "Class-word rate among non-style tokens")
      ->capture_default_str();
  synth->add_option("--class-purity", ss.class_purity, "Share of class words from the own class")
      ->capture_default_str();
  synth->add_option("--confounder", ss.confounder_strength, "Probability of a source style word")
      ->capture_default_str();
  synth->add_option("--plant", ss.planted_token, "Token inserted into every positive document");
  synth->add_option("--positive", synth_positive, "Class mapped to +1")
      ->check(CLI::IsMember({"regular", "satirical"}));
  synth->add_option("--seed", ss.seed, "Random seed")->capture_default_str();

  // explain
  std::string ex_run, ex_corpus, ex_words, ex_out;
  std::size_t ex_top = 30;
  auto* explain = app.add_subcommand("explain", "Rank discriminative features of a trained run");
  explain->add_option("--run", ex_run, "Run directory")->required();
  explain->add_option("--corpus", ex_corpus, "Corpus the run was trained on (string kernels)");
  explain->add_option("--words", ex_words, "Word-occurrence file (dense runs)");
  explain->add_option("--top", ex_top, "Features per class (0 = all)")->capture_default_str();
  explain->add_option("--out", ex_out, "Output directory (default: the run directory)");

  try {
    auto args = expand_run_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*prepare) {
      const auto corpus = prepare_corpus(prep_in);
      save_corpus(prep_out, corpus);
      std::cout << "wrote " << corpus.size() << " articles to " << prep_out << '\n';
      print_stats(corpus, std::cout);
    } else if (*stats) {
      print_stats(load_corpus(stats_corpus), std::cout);
    } else if (*run) {
      const auto cfg = to_config(rf);
      const auto report = run_experiment(cfg);
      std::cout << summary_table(report);
      if (!cfg.output_dir.empty()) {
        std::cout << "artifacts: " << run_directory(cfg, report).string() << '\n';
      }
    } else if (*compare) {
      const auto a = load_report(report_path(cmp_a));
      const auto b = load_report(report_path(cmp_b));
      std::cout << compare_runs(a, b, !cmp_no_cc, cmp_name_a, cmp_name_b).table;
    } else if (*curves) {
      const fs::path rp = report_path(curves_run);
      const auto report = load_report(rp);
      const fs::path dir = curves_out.empty() ? rp.parent_path() : fs::path(curves_out);
      for (const auto& p : emit_curves(report, dir)) std::cout << "wrote " << p.string() << '\n';
    } else if (*synth) {
      ss.class_positive = parse_label(synth_positive);
      const auto corpus = generate_synthetic(ss);
      save_corpus(synth_out, corpus);
      std::cout << "wrote " << corpus.size() << " articles to " << synth_out << '\n';
    } else if (*explain) {
      const fs::path run_dir(ex_run);
      const auto report = load_report(run_dir / "report.json");
      const fs::path out_dir = ex_out.empty() ? run_dir : fs::path(ex_out);
      fs::create_directories(out_dir);
      if (report.representation == Representation::dense) {
        if (ex_words.empty()) throw config_error("dense runs need --words <word-occurrence file>");
        const auto model = load_primal_model(run_dir / "model.fspl");
        const auto occ = load_word_occurrences(ex_words);
        write_tsv(out_dir / "words.tsv", embedding_word_scores(occ, model), report.class_positive,
                  ex_top);
        write_tsv(out_dir / "bigrams.tsv", embedding_bigram_scores(occ, model),
                  report.class_positive, ex_top);
      } else {
        if (ex_corpus.empty()) throw config_error("string-kernel runs need --corpus");
        const auto model = load_dual_model(run_dir / "model.fsdl");
        if (model.domain_adapted) {
          std::cerr << "note: model was trained with domain adaptation; only the n-gram part "
                       "of its weight vector is reported\n";
        }
        const auto corpus = load_corpus(ex_corpus);
        TextOptions text;
        text.case_fold = report.config.value("case_fold", false);
        text.strip_accents = report.config.value("strip_accents", false);
        const PresenceRule rule = report.config.value("presence_rule", "at_least_one") ==
                                          "more_than_one"
                                      ? PresenceRule::more_than_one
                                      : PresenceRule::at_least_one;
        std::map<std::string_view, const Article*> by_id;
        for (const auto& a : corpus.articles()) by_id.emplace(a.id, &a);
        std::vector<NgramProfile> profiles;
        profiles.reserve(model.train_ids.size());
        for (const auto& id : model.train_ids) {
          auto it = by_id.find(id);
          if (it == by_id.end()) throw validation_error("training id '" + id + "' not in corpus");
          profiles.push_back(
              extract_profile(document_text(*it->second, report.task, text), model.n, id));
        }
        write_tsv(out_dir / "ngrams.tsv", primal_ngram_weights(model, profiles, rule),
                  report.class_positive, ex_top);
      }
    }
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const argument_error& e) {
    std::cerr << "argument error: " << e.what() << '\n';
    return kConfig;
  } catch (const numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const parse_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const validation_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const format_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
