#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>
#include <fstream>
#include <random>
#include <sstream>

#include "strkern/corpus.hpp"
#include "strkern/errors.hpp"
#include "strkern/utf8.hpp"

using namespace strkern;
namespace fs = std::filesystem;

namespace {

Article make(std::string id, std::string title, std::string body, Label label, std::string source,
             Split split) {
  return Article{std::move(id), std::move(title), std::move(body), label, std::move(source), split};
}

std::string jsonl_line(const Article& a) {
  std::ostringstream out;
  write_corpus(out, LabeledCorpus({a}));
  return out.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("strkern_corpus_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("utf8 decoding counts scalar values") {
  CHECK(utf8::decode("abc").size() == 3);
  CHECK(utf8::decode("été").size() == 3);
  CHECK(utf8::decode("\xF0\x9F\x98\x80").size() == 1);
  CHECK(utf8::encode(utf8::decode("Ça va, œuvre")) == "Ça va, œuvre");

  SUBCASE("invalid bytes become replacement characters") {
    const auto cps = utf8::decode("a\xFF" "b");
    REQUIRE(cps.size() == 3);
    CHECK(cps[1] == U'�');
  }
}

TEST_CASE("utf8 whitespace split and folding") {
  const auto words = utf8::split_whitespace(U"  un deux\ttrois  ");
  CHECK(words.size() == 3);
  CHECK(utf8::to_lower(U'É') == U'é');
  CHECK(utf8::to_lower(U'Ж') == U'ж');
  CHECK(utf8::strip_accent(U'é') == U'e');
  CHECK(utf8::strip_accent(U'Ç') == U'C');
  CHECK(utf8::strip_accent(U'x') == U'x');
}

TEST_CASE("document_text joins title and body with one space") {
  CHECK(document_text(make("1", "T", "B", Label::regular, "s", Split::train), TextMode::full) ==
        "T B");
  CHECK(document_text(make("1", "T", "", Label::regular, "s", Split::train), TextMode::full) ==
        "T");
  CHECK(document_text(make("1", "Un titre", "Le corps.", Label::regular, "s", Split::train),
                      TextMode::headline) == "Un titre");
  CHECK(document_text(make("1", "", "", Label::regular, "s", Split::train), TextMode::full) == "");

  SUBCASE("line breaks normalize to spaces") {
    const Article a = make("1", " Titre\r\n", "ligne un\rligne deux\nfin ", Label::regular, "s",
                           Split::train);
    CHECK(document_text(a, TextMode::full) == "Titre ligne un ligne deux fin");
    const Article crlf = make("2", "a", "b\r\nc", Label::regular, "s", Split::train);
    CHECK(document_text(crlf, TextMode::full) == "a b c");
  }

  SUBCASE("optional folding") {
    const Article a = make("1", "Élan", "Déjà", Label::regular, "s", Split::train);
    CHECK(document_text(a, TextMode::full, {true, false}) == "élan déjà");
    CHECK(document_text(a, TextMode::full, {true, true}) == "elan deja");
    CHECK(document_text(a, TextMode::full) == "Élan Déjà");
  }
}

TEST_CASE("corpus_stats counts samples and tokens") {
  LabeledCorpus one({make("1", "a b", "c", Label::regular, "s", Split::train)});
  const auto st = corpus_stats(one);
  CHECK(st.at(Split::train, Label::regular).sample_count == 1);
  CHECK(st.at(Split::train, Label::regular).token_count == 3);
  CHECK(st.total().token_count == 3);

  LabeledCorpus empty_texts({make("1", "", "", Label::regular, "s", Split::train),
                             make("2", "", "", Label::satirical, "s", Split::train)});
  CHECK(corpus_stats(empty_texts).total().token_count == 0);
  CHECK(corpus_stats(empty_texts).total().sample_count == 2);

  SUBCASE("totals equal sums and ignore order") {
    std::vector<Article> arts;
    std::mt19937_64 rng(3);
    for (int i = 0; i < 30; ++i) {
      const Split sp = static_cast<Split>(i % 3);
      arts.push_back(make("d" + std::to_string(i), std::string(i % 4, 'x') + " t",
                          "w1 w2 w3 " + std::to_string(i), i % 2 ? Label::satirical : Label::regular,
                          sp == Split::train ? "A" : "B", sp));
    }
    const auto a = corpus_stats(LabeledCorpus(arts));
    std::shuffle(arts.begin(), arts.end(), rng);
    const auto b = corpus_stats(LabeledCorpus(arts));
    CHECK(a == b);
    std::uint64_t samples = 0;
    std::uint64_t tokens = 0;
    for (Split s : {Split::train, Split::valid, Split::test}) {
      samples += a.split_total(s).sample_count;
      tokens += a.split_total(s).token_count;
    }
    CHECK(samples == a.total().sample_count);
    CHECK(tokens == a.total().token_count);
    CHECK(a.label_total(Label::regular).sample_count + a.label_total(Label::satirical).sample_count ==
          30);
  }
}

TEST_CASE("read_corpus parses JSON lines") {
  SUBCASE("empty input gives an empty corpus") {
    std::istringstream in("");
    const auto c = read_corpus(in);
    CHECK(c.empty());
    CHECK(corpus_stats(c).total() == ClassStats{});
  }

  SUBCASE("unknown fields ignored, blank lines skipped") {
    std::istringstream in(
        R"({"id":"a","title":"t","body":"b","label":"regular","source":"s1","split":"train","extra":5})"
        "\n\n"
        R"({"id":"b","title":"t2","body":"b2","label":"satirical","source":"s2","split":"test"})"
        "\n");
    const auto c = read_corpus(in);
    REQUIRE(c.size() == 2);
    CHECK(c.articles()[1].label == Label::satirical);
    CHECK(c.articles()[1].split == Split::test);
    CHECK(c.sign(Label::satirical) == 1);
    CHECK(c.sign(Label::regular) == -1);
  }

  SUBCASE("malformed line reports its line number") {
    std::istringstream in(
        R"({"id":"a","title":"t","body":"b","label":"regular","source":"s1","split":"train"})"
        "\n{not json\n");
    try {
      read_corpus(in);
      FAIL("expected parse_error");
    } catch (const parse_error& e) {
      CHECK(e.line() == 2);
    }
  }

  SUBCASE("missing field and bad label are parse errors") {
    std::istringstream missing(R"({"id":"a","title":"t","label":"regular","source":"s","split":"train"})");
    CHECK_THROWS_AS(read_corpus(missing), parse_error);
    std::istringstream bad(
        R"({"id":"a","title":"t","body":"","label":"fake","source":"s","split":"train"})");
    CHECK_THROWS_AS(read_corpus(bad), parse_error);
  }

  SUBCASE("duplicate ids") {
    const Article a = make("x", "t", "b", Label::regular, "s", Split::train);
    std::istringstream in(jsonl_line(a) + jsonl_line(a));
    CHECK_THROWS_AS(read_corpus(in), validation_error);
  }

  SUBCASE("shared source across train and test") {
    std::istringstream in(jsonl_line(make("1", "t", "b", Label::regular, "A", Split::train)) +
                          jsonl_line(make("2", "t", "b", Label::regular, "A", Split::test)));
    CHECK_THROWS_AS(read_corpus(in), cross_source_violation);
  }
}

TEST_CASE("cross-source violation iff source sets intersect") {
  // every assignment of 3 articles to 2 sources and 3 splits
  const char* sources[] = {"A", "B"};
  int checked = 0;
  for (int code = 0; code < 216; ++code) {
    std::vector<Article> arts;
    int c = code;
    std::set<std::string> train;
    std::set<std::string> eval;
    for (int i = 0; i < 3; ++i) {
      const int src = c % 2;
      c /= 2;
      const Split sp = static_cast<Split>(c % 3);
      c /= 3;
      arts.push_back(make(std::to_string(i), "t", "b", Label::regular, sources[src], sp));
      (sp == Split::train ? train : eval).insert(sources[src]);
    }
    bool overlap = false;
    for (const auto& s : train) overlap = overlap || eval.count(s) > 0;
    if (overlap) {
      CHECK_THROWS_AS(validate_corpus(arts), cross_source_violation);
    } else {
      CHECK_NOTHROW(validate_corpus(arts));
    }
    ++checked;
  }
  CHECK(checked == 216);
}

TEST_CASE("corpus file round-trip is identity") {
  std::vector<Article> arts{
      make("é/1", "Titre \"cité\"", "Corps\navec\tdes\\caractères", Label::satirical, "train-s",
           Split::train),
      make("2", "", "", Label::regular, "eval", Split::valid),
      make("3", "\xF0\x9F\x98\x80", "x", Label::regular, "eval", Split::test)};
  const fs::path dir = scratch("roundtrip");
  save_corpus(dir / "c.jsonl", LabeledCorpus(arts));
  const auto back = load_corpus(dir / "c.jsonl");
  CHECK(back.articles() == arts);
  CHECK(corpus_fingerprint(back) == corpus_fingerprint(LabeledCorpus(arts)));
  fs::remove_all(dir);
}

TEST_CASE("fingerprint tracks content") {
  std::vector<Article> arts{make("1", "a", "b", Label::regular, "s", Split::train)};
  const auto f1 = articles_fingerprint(arts);
  arts[0].body = "c";
  CHECK(articles_fingerprint(arts) != f1);
  arts[0].body = "b";
  CHECK(articles_fingerprint(arts) == f1);
}

TEST_CASE("load_unlabeled ignores labels") {
  const fs::path dir = scratch("unlabeled");
  {
    std::ofstream out(dir / "t.jsonl");
    out << R"({"id":"z1","title":"a","body":"b"})" << "\n"
        << R"({"id":"z2","title":"c","body":"d","label":"satirical"})" << "\n";
  }
  const auto t = load_unlabeled(dir / "t.jsonl");
  REQUIRE(t.size() == 2);
  CHECK(t[1].id == "z2");
  fs::remove_all(dir);
}

TEST_CASE("prepare_corpus reads directories and TSV files") {
  const fs::path dir = scratch("prepare");
  fs::create_directories(dir / "train" / "regular");
  fs::create_directories(dir / "train" / "satirical");
  std::ofstream(dir / "train" / "regular" / "001.txt") << "Titre un\nCorps un\nsuite";
  std::ofstream(dir / "train" / "satirical" / "001.txt") << "Titre deux\r\nCorps deux";
  std::ofstream(dir / "validation.tsv") << "label\ttitle\tbody\nregular\tV1\tcorps\nsatirical\tV2\tc\n";
  std::ofstream(dir / "test.tsv") << "satirical\tT1\tb\n";

  const auto c = prepare_corpus(dir);
  REQUIRE(c.size() == 5);
  CHECK(c.count(Split::train) == 2);
  CHECK(c.count(Split::valid) == 2);
  CHECK(c.count(Split::test) == 1);
  const Article& first = c.articles()[0];
  CHECK(first.title == "Titre un");
  CHECK(first.body == "Corps un\nsuite");
  CHECK(first.source == "train-regular");
  CHECK(c.articles()[1].title == "Titre deux");
  CHECK(c.articles()[2].source == "eval-regular");

  fs::remove_all(dir / "test.tsv");
  CHECK_THROWS_AS(prepare_corpus(dir), parse_error);
  fs::remove_all(dir);
}
