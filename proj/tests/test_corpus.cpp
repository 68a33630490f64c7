#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "wespad/corpus.hpp"

using namespace wespad;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p, std::ios::binary);
  out << content;
  return p;
}

}  // namespace

TEST_CASE("load_posts jsonl counts classes and keeps file order") {
  const auto path = write_temp("wespad_posts1.jsonl",
                               R"({"id":"t1","text":"heart attack","label":"pos"})"
                               "\n"
                               R"({"id":"t2","text":"bad day","label":"pos"})"
                               "\n"
                               R"({"id":"t3","text":"all good","label":"neg"})"
                               "\n"
                               R"({"id":"t4","text":"nothing","label":"neg","topic":"cancer"})"
                               "\n");
  const Corpus c = load_posts(path.string(), PostsFormat::jsonl);
  CHECK(c.size() == 4);
  CHECK(c.positive_count() == 2);
  CHECK(c.negative_count() == 2);
  CHECK(c.posts()[0].id == "t1");
  CHECK(c.posts()[3].topic == "cancer");
  std::remove(path.string().c_str());
}

TEST_CASE("load_posts rejects duplicate ids with the offending id") {
  const auto path = write_temp("wespad_posts2.jsonl",
                               R"({"id":"t1","text":"a","label":"pos"})"
                               "\n"
                               R"({"id":"t1","text":"b","label":"neg"})"
                               "\n");
  CHECK_THROWS_WITH_AS(load_posts(path.string(), PostsFormat::jsonl),
                       doctest::Contains("duplicate post id: t1"), InputError);
  std::remove(path.string().c_str());
}

TEST_CASE("load_posts on an empty file yields an empty corpus") {
  const auto path = write_temp("wespad_posts3.jsonl", "");
  const Corpus c = load_posts(path.string(), PostsFormat::jsonl);
  CHECK(c.size() == 0);
  std::remove(path.string().c_str());
}

TEST_CASE("load_posts reports parse errors and unknown labels with line numbers") {
  const auto bad = write_temp("wespad_posts4.jsonl", "{not json}\n");
  CHECK_THROWS_WITH_AS(load_posts(bad.string(), PostsFormat::jsonl), doctest::Contains(":1:"),
                       InputError);
  const auto label = write_temp("wespad_posts5.jsonl",
                                R"({"id":"t1","text":"a","label":"positive"})"
                                "\n");
  CHECK_THROWS_WITH_AS(load_posts(label.string(), PostsFormat::jsonl),
                       doctest::Contains("unknown label"), InputError);
  std::remove(bad.string().c_str());
  std::remove(label.string().c_str());
}

TEST_CASE("load_posts tsv assigns line-number ids") {
  const auto path = write_temp("wespad_posts6.tsv", "pos\tI am sick\nneg\tall fine\n");
  const Corpus c = load_posts(path.string(), PostsFormat::tsv);
  REQUIRE(c.size() == 2);
  CHECK(c.posts()[0].id == "1");
  CHECK(c.posts()[0].label == Label::positive);
  CHECK(c.posts()[1].tokens == std::vector<std::string>{"all", "fine"});
  std::remove(path.string().c_str());
}

TEST_CASE("tokenize keeps internal apostrophes and #/@ prefixes") {
  CHECK(tokenize("My grandpa has Alzheimer's") ==
        std::vector<std::string>{"my", "grandpa", "has", "alzheimer's"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("heart attack!!") == std::vector<std::string>{"heart", "attack"});
  CHECK(tokenize("#flu2013 hit @me hard...") ==
        std::vector<std::string>{"#flu2013", "hit", "@me", "hard"});
  CHECK(tokenize("rock' on") == std::vector<std::string>{"rock", "on"});
  CHECK(tokenize("# @ '") == std::vector<std::string>{});
  CHECK(tokenize("don''t") == std::vector<std::string>{"don", "t"});
}

TEST_CASE("tokenize is idempotent under whitespace join") {
  Rng rng(42);
  const std::string charset = "abcXYZ019#@' .!?-_\xc3\xa9";
  for (int iter = 0; iter < 200; ++iter) {
    std::string text;
    const auto len = rng.below(40);
    for (std::uint64_t i = 0; i < len; ++i)
      text.push_back(charset[static_cast<std::size_t>(rng.below(charset.size()))]);
    const auto tokens = tokenize(text);
    std::string joined;
    for (const auto& t : tokens) {
      if (!joined.empty()) joined += " ";
      joined += t;
    }
    CHECK(tokenize(joined) == tokens);
  }
}

TEST_CASE("ngram_vocab enumerates unigrams then bigrams deterministically") {
  std::vector<Post> posts{oracle::make_post("t1", "a b", Label::positive)};
  const Corpus c1 = Corpus::from_posts(posts);
  const NgramVocab v1 = ngram_vocab(c1);
  CHECK(v1.size() == 3);
  CHECK(v1.lookup("a") == 0);
  CHECK(v1.lookup("b") == 1);
  CHECK(v1.lookup("a_b") == 2);

  const Corpus c2 = Corpus::from_posts({oracle::make_post("t1", "a", Label::positive),
                                        oracle::make_post("t2", "a", Label::negative)});
  CHECK(ngram_vocab(c2).size() == 1);

  CHECK(ngram_vocab(Corpus{}).size() == 0);
}

namespace {

Corpus numbered_corpus(std::size_t positives, std::size_t negatives) {
  std::vector<Post> posts;
  for (std::size_t i = 0; i < positives; ++i)
    posts.push_back(oracle::make_post("p" + std::to_string(i), "sick", Label::positive));
  for (std::size_t i = 0; i < negatives; ++i)
    posts.push_back(oracle::make_post("n" + std::to_string(i), "fine", Label::negative));
  return Corpus::from_posts(std::move(posts));
}

}  // namespace

TEST_CASE("stratified_folds splits 100/20 into perfectly balanced tenths") {
  const Corpus c = numbered_corpus(20, 80);
  const FoldPlan plan = stratified_folds(c, 10, 7);
  std::vector<int> pos(10, 0), tot(10, 0);
  for (const auto& p : c.posts()) {
    const int f = plan.assignment.at(p.id);
    ++tot[static_cast<std::size_t>(f)];
    if (p.label == Label::positive) ++pos[static_cast<std::size_t>(f)];
  }
  for (int f = 0; f < 10; ++f) {
    CHECK(tot[static_cast<std::size_t>(f)] == 10);
    CHECK(pos[static_cast<std::size_t>(f)] == 2);
  }
}

TEST_CASE("stratified_folds is deterministic and seed-sensitive") {
  const Corpus c = numbered_corpus(23, 77);
  const FoldPlan a = stratified_folds(c, 10, 3);
  const FoldPlan b = stratified_folds(c, 10, 3);
  CHECK(a.assignment == b.assignment);
  CHECK(a.hash() == b.hash());
  const FoldPlan other = stratified_folds(c, 10, 4);
  CHECK(a.assignment != other.assignment);
}

TEST_CASE("stratified_folds rejects classes smaller than k") {
  const Corpus c = numbered_corpus(5, 50);
  CHECK_THROWS_WITH_AS(stratified_folds(c, 10, 1), doctest::Contains("fewer than k"), InputError);
  CHECK_THROWS_AS(stratified_folds(c, 1, 1), InputError);
}

TEST_CASE("stratified_folds keeps every fold ratio within 1/|fold| of global") {
  Rng rng(11);
  for (int iter = 0; iter < 30; ++iter) {
    const std::size_t n_pos = 5 + rng.below(40);
    const std::size_t n_neg = 5 + rng.below(120);
    const int k = 2 + static_cast<int>(rng.below(4));
    if (n_pos < static_cast<std::size_t>(k) || n_neg < static_cast<std::size_t>(k)) continue;
    const Corpus c = numbered_corpus(n_pos, n_neg);
    const FoldPlan plan = stratified_folds(c, k, rng.next_u64());

    const double global = static_cast<double>(n_pos) / static_cast<double>(n_pos + n_neg);
    std::vector<double> pos(static_cast<std::size_t>(k), 0), tot(static_cast<std::size_t>(k), 0);
    for (const auto& p : c.posts()) {
      const auto f = static_cast<std::size_t>(plan.assignment.at(p.id));
      tot[f] += 1;
      if (p.label == Label::positive) pos[f] += 1;
    }
    for (int f = 0; f < k; ++f) {
      const auto uf = static_cast<std::size_t>(f);
      REQUIRE(tot[uf] > 0);
      CHECK(std::abs(pos[uf] / tot[uf] - global) <= 1.0 / tot[uf] + 1e-12);
    }
  }
}

TEST_CASE("subsample_positives keeps negatives, rounds, and is deterministic") {
  const Corpus c = numbered_corpus(20, 30);
  CHECK(subsample_positives(c, 1.0, 5).size() == 50);

  const Corpus s = subsample_positives(c, 0.1, 5);
  CHECK(s.positive_count() == 2);
  CHECK(s.negative_count() == 30);

  const Corpus s2 = subsample_positives(c, 0.1, 5);
  REQUIRE(s2.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s.posts()[i].id == s2.posts()[i].id);
}

TEST_CASE("subsample_positives never alters negatives nor duplicates posts") {
  Rng rng(99);
  for (int iter = 0; iter < 25; ++iter) {
    const Corpus c = numbered_corpus(3 + rng.below(30), 3 + rng.below(30));
    const double fraction = 0.05 + 0.95 * rng.unit();
    const Corpus s = subsample_positives(c, fraction, rng.next_u64());

    std::set<std::string> ids;
    for (const auto& p : s.posts()) CHECK(ids.insert(p.id).second);
    std::vector<std::string> negs_in, negs_out;
    for (const auto& p : c.posts())
      if (p.label == Label::negative) negs_in.push_back(p.id);
    for (const auto& p : s.posts())
      if (p.label == Label::negative) negs_out.push_back(p.id);
    CHECK(negs_in == negs_out);
    const auto expect =
        static_cast<std::size_t>(std::llround(fraction * static_cast<double>(c.positive_count())));
    CHECK(s.positive_count() == std::min(expect, c.positive_count()));
  }
}

TEST_CASE("subcorpus preserves corpus order") {
  const Corpus c = numbered_corpus(3, 3);
  const Corpus s = subcorpus(c, {"n1", "p0", "p2"});
  REQUIRE(s.size() == 3);
  CHECK(s.posts()[0].id == "p0");
  CHECK(s.posts()[1].id == "p2");
  CHECK(s.posts()[2].id == "n1");
}
