#include "strkern/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "strkern/errors.hpp"
#include "strkern/hash.hpp"
#include "strkern/utf8.hpp"

namespace strkern {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view to_string(Label label) noexcept {
  return label == Label::regular ? "regular" : "satirical";
}

std::string_view to_string(Split split) noexcept {
  switch (split) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
  }
  return "?";
}

std::string_view to_string(TextMode mode) noexcept {
  return mode == TextMode::full ? "full" : "headline";
}

Label parse_label(std::string_view text) {
  if (text == "regular") return Label::regular;
  if (text == "satirical") return Label::satirical;
  throw argument_error("unknown label '" + std::string(text) + "'");
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "valid") return Split::valid;
  if (text == "test") return Split::test;
  throw argument_error("unknown split '" + std::string(text) + "'");
}

TextMode parse_text_mode(std::string_view text) {
  if (text == "full") return TextMode::full;
  if (text == "headline") return TextMode::headline;
  throw argument_error("unknown task '" + std::string(text) + "'");
}

LabeledCorpus::LabeledCorpus(std::vector<Article> articles, Label class_positive)
    : articles_(std::move(articles)), class_positive_(class_positive) {
  validate_corpus(articles_);
}

Label LabeledCorpus::label_of(int sign) const noexcept {
  if (sign > 0) return class_positive_;
  return class_positive_ == Label::satirical ? Label::regular : Label::satirical;
}

std::vector<const Article*> LabeledCorpus::split(Split which) const {
  std::vector<const Article*> out;
  for (const auto& a : articles_) {
    if (a.split == which) out.push_back(&a);
  }
  return out;
}

std::size_t LabeledCorpus::count(Split which) const {
  return static_cast<std::size_t>(std::count_if(
      articles_.begin(), articles_.end(), [&](const Article& a) { return a.split == which; }));
}

void validate_corpus(const std::vector<Article>& articles) {
  std::unordered_set<std::string_view> ids;
  std::set<std::string_view> train_sources;
  std::set<std::string_view> eval_sources;
  for (const auto& a : articles) {
    if (!ids.insert(a.id).second) throw validation_error("duplicate article id '" + a.id + "'");
    (a.split == Split::train ? train_sources : eval_sources).insert(a.source);
  }
  std::vector<std::string_view> shared;
  std::set_intersection(train_sources.begin(), train_sources.end(), eval_sources.begin(),
                        eval_sources.end(), std::back_inserter(shared));
  if (!shared.empty()) {
    std::string list;
    for (auto s : shared) {
      if (!list.empty()) list += ", ";
      list += s;
    }
    throw cross_source_violation("sources shared between train and valid/test: " + list);
  }
}

namespace {

std::string required_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw parse_error(std::string("missing field '") + key + "'", line);
  if (!it->is_string()) throw parse_error(std::string("field '") + key + "' is not a string", line);
  return it->get<std::string>();
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

}  // namespace

LabeledCorpus read_corpus(std::istream& in) {
  std::vector<Article> articles;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw parse_error(e.what(), line_no);
    }
    if (!obj.is_object()) throw parse_error("expected a JSON object", line_no);
    Article a;
    a.id = required_string(obj, "id", line_no);
    a.title = required_string(obj, "title", line_no);
    a.body = required_string(obj, "body", line_no);
    a.source = required_string(obj, "source", line_no);
    try {
      a.label = parse_label(required_string(obj, "label", line_no));
      a.split = parse_split(required_string(obj, "split", line_no));
    } catch (const argument_error& e) {
      throw parse_error(e.what(), line_no);
    }
    articles.push_back(std::move(a));
  }
  return LabeledCorpus(std::move(articles));
}

LabeledCorpus load_corpus(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open corpus file " + path.string());
  return read_corpus(in);
}

void write_corpus(std::ostream& out, const LabeledCorpus& corpus) {
  for (const auto& a : corpus.articles()) {
    json obj = {{"id", a.id},
                {"title", a.title},
                {"body", a.body},
                {"label", to_string(a.label)},
                {"source", a.source},
                {"split", to_string(a.split)}};
    out << obj.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  }
}

void save_corpus(const fs::path& path, const LabeledCorpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot write " + path.string());
  write_corpus(out, corpus);
}

namespace {

void append_normalized(std::u32string& out, std::u32string_view text, const TextOptions& options) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    char32_t c = text[i];
    if (c == U'\r' || c == U'\n') {
      if (c == U'\r' && i + 1 < text.size() && text[i + 1] == U'\n') ++i;
      out.push_back(U' ');
      continue;
    }
    if (options.strip_accents) c = utf8::strip_accent(c);
    if (options.case_fold) c = utf8::to_lower(c);
    out.push_back(c);
  }
}

std::u32string_view trim(std::u32string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && utf8::is_space(s[b])) ++b;
  while (e > b && utf8::is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

}  // namespace

std::string document_text(const Article& article, TextMode mode, const TextOptions& options) {
  std::u32string title;
  append_normalized(title, utf8::decode(article.title), options);
  if (mode == TextMode::headline) return utf8::encode(trim(title));

  std::u32string body;
  append_normalized(body, utf8::decode(article.body), options);
  const auto t = trim(title);
  const auto b = trim(body);
  std::u32string joined(t);
  if (!t.empty() && !b.empty()) joined.push_back(U' ');
  joined.append(b);
  return utf8::encode(joined);
}

std::uint64_t count_tokens(std::string_view text) {
  return utf8::split_whitespace(utf8::decode(text)).size();
}

ClassStats CorpusStats::split_total(Split s) const {
  ClassStats out;
  for (const auto& c : cells[static_cast<int>(s)]) {
    out.sample_count += c.sample_count;
    out.token_count += c.token_count;
  }
  return out;
}

ClassStats CorpusStats::label_total(Label l) const {
  ClassStats out;
  for (const auto& row : cells) {
    out.sample_count += row[static_cast<int>(l)].sample_count;
    out.token_count += row[static_cast<int>(l)].token_count;
  }
  return out;
}

ClassStats CorpusStats::total() const {
  ClassStats out;
  for (const auto& row : cells) {
    for (const auto& c : row) {
      out.sample_count += c.sample_count;
      out.token_count += c.token_count;
    }
  }
  return out;
}

CorpusStats corpus_stats(const LabeledCorpus& corpus) {
  CorpusStats stats;
  for (const auto& a : corpus.articles()) {
    auto& cell = stats.at(a.split, a.label);
    ++cell.sample_count;
    cell.token_count += count_tokens(document_text(a, TextMode::full));
  }
  return stats;
}

std::string articles_fingerprint(std::span<const Article> articles) {
  Fingerprint fp;
  for (const auto& a : articles) {
    fp.add(a.id).add(a.title).add(a.body).add(to_string(a.label)).add(a.source).add(
        to_string(a.split));
  }
  return fp.hex();
}

std::string corpus_fingerprint(const LabeledCorpus& corpus) {
  return articles_fingerprint(corpus.articles());
}

std::vector<Article> load_unlabeled(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open target file " + path.string());
  std::vector<Article> out;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw parse_error(e.what(), line_no);
    }
    if (!obj.is_object()) throw parse_error("expected a JSON object", line_no);
    Article a;
    a.id = required_string(obj, "id", line_no);
    a.title = required_string(obj, "title", line_no);
    a.body = required_string(obj, "body", line_no);
    if (!ids.insert(a.id).second) throw validation_error("duplicate target id '" + a.id + "'");
    out.push_back(std::move(a));
  }
  return out;
}

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Article article_from_text(const std::string& content) {
  Article a;
  const auto nl = content.find('\n');
  if (nl == std::string::npos) {
    a.title = content;
  } else {
    a.title = content.substr(0, nl);
    a.body = content.substr(nl + 1);
  }
  if (!a.title.empty() && a.title.back() == '\r') a.title.pop_back();
  return a;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

void collect_split(const fs::path& root, Split split, std::vector<Article>& out) {
  std::vector<std::string> names{std::string(to_string(split))};
  if (split == Split::valid) names.push_back("validation");
  const std::string group = split == Split::train ? "train" : "eval";
  for (const auto& name : names) {
    const fs::path dir = root / name;
    const fs::path tsv = root / (name + ".tsv");
    if (fs::is_directory(dir)) {
      for (Label label : {Label::regular, Label::satirical}) {
        const fs::path sub = dir / std::string(to_string(label));
        if (!fs::is_directory(sub)) continue;
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(sub)) {
          if (entry.is_regular_file()) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
          Article a = article_from_text(read_file(f));
          a.id = std::string(to_string(split)) + "/" + std::string(to_string(label)) + "/" +
                 f.stem().string();
          a.label = label;
          a.split = split;
          a.source = group + "-" + std::string(to_string(label));
          out.push_back(std::move(a));
        }
      }
      return;
    }
    if (fs::is_regular_file(tsv)) {
      std::ifstream in(tsv, std::ios::binary);
      std::string line;
      std::size_t line_no = 0;
      std::size_t index = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (blank(line)) continue;
        auto cols = split_tabs(line);
        if (line_no == 1 && cols.size() >= 1 && cols[0] == "label") continue;
        if (cols.size() != 3) throw parse_error(tsv.string() + ": expected 3 columns", line_no);
        Article a;
        try {
          a.label = parse_label(cols[0]);
        } catch (const argument_error& e) {
          throw parse_error(e.what(), line_no);
        }
        a.title = cols[1];
        a.body = cols[2];
        a.split = split;
        a.id = std::string(to_string(split)) + "/" + std::to_string(index++);
        a.source = group + "-" + std::string(to_string(a.label));
        out.push_back(std::move(a));
      }
      return;
    }
  }
  throw parse_error("no '" + names.front() + "' entry under " + root.string());
}

}  // namespace

LabeledCorpus prepare_corpus(const fs::path& root) {
  std::vector<Article> articles;
  for (Split s : {Split::train, Split::valid, Split::test}) collect_split(root, s, articles);
  return LabeledCorpus(std::move(articles));
}

}  // namespace strkern
