#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "wespad/ig.hpp"

using namespace wespad;

namespace {

Corpus corpus_of(const std::vector<std::pair<std::string, Label>>& docs) {
  std::vector<Post> posts;
  int i = 0;
  for (const auto& [text, label] : docs)
    posts.push_back(oracle::make_post("t" + std::to_string(i++), text, label));
  return Corpus::from_posts(std::move(posts));
}

// Straightforward per-word evaluation of the IG definition, independent of
// compute_ig's counting pass.
double ig_oracle(const Corpus& corpus, const std::string& word) {
  auto entropy = [](const std::vector<const Post*>& docs) {
    std::size_t pos = 0;
    for (const auto* d : docs)
      if (d->label == Label::positive) ++pos;
    return binary_entropy(pos, docs.size() - pos);
  };
  std::vector<const Post*> all, with, without;
  for (const auto& p : corpus.posts()) {
    all.push_back(&p);
    const bool has =
        std::find(p.tokens.begin(), p.tokens.end(), word) != p.tokens.end();
    (has ? with : without).push_back(&p);
  }
  const double n = static_cast<double>(all.size());
  return entropy(all) - (static_cast<double>(with.size()) / n * entropy(with) +
                         static_cast<double>(without.size()) / n * entropy(without));
}

}  // namespace

TEST_CASE("compute_ig matches the hand-evaluated 4-document cases") {
  const Corpus c = corpus_of({{"w x", Label::positive},
                              {"w y", Label::positive},
                              {"w z", Label::negative},
                              {"w q", Label::negative}});
  const IGWeights ig = compute_ig(c);
  CHECK(ig.corpus_entropy == doctest::Approx(1.0));
  // Word in all four documents: both branches reproduce the corpus entropy.
  CHECK(ig.table.at("w") == 0.0);
  // Word in exactly the two positive documents would have IG 1; here x is in
  // one positive document: IG = 1 - (0.25*0 + 0.75*H(1/3)).
  CHECK(ig.table.at("x") ==
        doctest::Approx(1.0 - 0.75 * binary_entropy(1, 2)).epsilon(1e-12));

  const Corpus c2 = corpus_of({{"s a", Label::positive},
                               {"s b", Label::positive},
                               {"c d", Label::negative},
                               {"c e", Label::negative}});
  const IGWeights ig2 = compute_ig(c2);
  CHECK(ig2.table.at("s") == doctest::Approx(1.0));  // exactly the two positives
  CHECK(ig2.table.at("c") == doctest::Approx(1.0));

  const Corpus c3 = corpus_of({{"m a", Label::positive},
                               {"b", Label::positive},
                               {"m c", Label::negative},
                               {"d", Label::negative}});
  CHECK(compute_ig(c3).table.at("m") == doctest::Approx(0.0));  // one pos, one neg
}

TEST_CASE("compute_ig rejects empty and single-class corpora") {
  CHECK_THROWS_AS(compute_ig(Corpus{}), FitError);
  CHECK_THROWS_WITH_AS(compute_ig(corpus_of({{"a", Label::negative}, {"b", Label::negative}})),
                       doctest::Contains("single class"), FitError);
}

TEST_CASE("compute_ig equals the brute-force oracle on random corpora") {
  Rng rng(17);
  const std::vector<std::string> words{"w0", "w1", "w2", "w3", "w4", "w5"};
  for (int iter = 0; iter < 60; ++iter) {
    std::vector<std::pair<std::string, Label>> docs;
    const auto n_docs = 2 + rng.below(11);
    for (std::uint64_t d = 0; d < n_docs; ++d) {
      std::string text;
      const auto n_tokens = rng.below(7);
      for (std::uint64_t t = 0; t < n_tokens; ++t) {
        if (!text.empty()) text += " ";
        text += words[static_cast<std::size_t>(rng.below(words.size()))];
      }
      docs.emplace_back(text, rng.unit() < 0.5 ? Label::positive : Label::negative);
    }
    docs[0].second = Label::positive;  // both classes present
    docs[1].second = Label::negative;
    const Corpus c = corpus_of(docs);
    const IGWeights ig = compute_ig(c);

    std::set<std::string> distinct;
    for (const auto& p : c.posts())
      for (const auto& t : p.tokens) distinct.insert(t);
    CHECK(ig.table.size() == distinct.size());
    for (const auto& w : distinct) {
      const double expect = ig_oracle(c, w);
      CHECK(ig.table.at(w) == doctest::Approx(expect).epsilon(1e-12));
      CHECK(ig.table.at(w) >= 0.0);
      CHECK(ig.table.at(w) <= ig.corpus_entropy + 1e-15);
    }
  }
}

TEST_CASE("ig_lookup: direct hit, embedding-neighbor fallback, absent word") {
  const Corpus c = corpus_of({{"flu bad", Label::positive},
                              {"flu sick", Label::positive},
                              {"party fun", Label::negative},
                              {"party chill", Label::negative}});
  const IGWeights ig = compute_ig(c);
  CHECK(ig.table.at("flu") == doctest::Approx(1.0));

  EmbeddingTable t(2, EmbeddingFormat::glove_text);
  t.insert("flu", std::vector<double>{1.0, 0.1});
  t.insert("party", std::vector<double>{-1.0, 0.1});
  t.insert("influenza", std::vector<double>{0.9, 0.2});  // OOV in training, near "flu"

  CHECK(ig_lookup("flu", ig, t) == ig.table.at("flu"));
  CHECK(ig_lookup("influenza", ig, t) == doctest::Approx(ig.table.at("flu")));
  CHECK(ig_lookup("notintable", ig, t) == 0.0);

  const NeighborIndex idx(t, ig.train_vocab());
  CHECK(ig_lookup("influenza", ig, idx) == doctest::Approx(ig.table.at("flu")));
}

TEST_CASE("weighted_centroid evaluates the weighted-mean definition") {
  EmbeddingTable t(2, EmbeddingFormat::glove_text);
  t.insert("a", std::vector<double>{1.0, 0.0});
  t.insert("b", std::vector<double>{0.0, 1.0});

  IGWeights ig;
  ig.corpus_entropy = 1.0;
  ig.table = {{"a", 1.0}, {"b", 3.0}};

  const std::vector<std::string> ab{"a", "b"};
  const CentroidVector w = weighted_centroid(ab, t, ig);
  CHECK(w.values[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(w.values[1] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(w.covered_tokens == 2);
}

TEST_CASE("weighted_centroid with uniform or zero IG equals the plain centroid") {
  EmbeddingTable t(3, EmbeddingFormat::glove_text);
  Rng rng(21);
  std::vector<std::string> vocab;
  for (int i = 0; i < 8; ++i) {
    vocab.push_back("w" + std::to_string(i));
    t.insert(vocab.back(), std::vector<double>{rng.normal(), rng.normal(), rng.normal()});
  }
  IGWeights uniform, zero;
  for (const auto& w : vocab) {
    uniform.table[w] = 0.37;
    zero.table[w] = 0.0;
  }
  for (int iter = 0; iter < 20; ++iter) {
    std::vector<std::string> tokens;
    const auto len = 1 + rng.below(6);
    for (std::uint64_t i = 0; i < len; ++i)
      tokens.push_back(vocab[static_cast<std::size_t>(rng.below(vocab.size()))]);
    const auto plain = centroid(tokens, t);
    const auto u = weighted_centroid(tokens, t, uniform);
    const auto z = weighted_centroid(tokens, t, zero);
    CHECK(z.values == plain.values);  // declared fallback, exact
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(u.values[j] == doctest::Approx(plain.values[j]).epsilon(1e-9));
  }
}

TEST_CASE("weighted_centroid of one distinct token is that token's vector") {
  EmbeddingTable t(2, EmbeddingFormat::glove_text);
  t.insert("only", std::vector<double>{2.5, -1.0});
  IGWeights ig;
  ig.table = {{"only", 0.42}};
  const std::vector<std::string> tokens{"only", "only", "only"};
  const auto w = weighted_centroid(tokens, t, ig);
  CHECK(w.values[0] == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(w.values[1] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("weighted_centroid of all-absent tokens is the empty-flagged zero vector") {
  const EmbeddingTable t(2, EmbeddingFormat::glove_text);
  IGWeights ig;
  const std::vector<std::string> tokens{"ghost"};
  const auto w = weighted_centroid(tokens, t, ig);
  CHECK(w.empty());
  CHECK(w.values == std::vector<double>{0.0, 0.0});
}
