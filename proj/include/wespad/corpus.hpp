#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wespad/common.hpp"

namespace wespad {

struct DependencyForest;  // treebank.hpp

enum class Label : std::uint8_t { negative = 0, positive = 1 };

inline const char* label_name(Label l) { return l == Label::positive ? "pos" : "neg"; }

struct Post {
  std::string id;
  std::string text;
  std::vector<std::string> tokens;  // tokenize(text)
  Label label = Label::negative;
  std::string topic;  // empty when absent
  std::optional<std::string> prev_text;
  std::optional<std::string> next_text;
  std::shared_ptr<const DependencyForest> tree;  // null when no parse is available
};

// Immutable ordered collection of labeled posts. Safe to share across threads.
class Corpus {
 public:
  Corpus() = default;

  // Validates id uniqueness and counts classes. Throws InputError on duplicates.
  static Corpus from_posts(std::vector<Post> posts);

  const std::vector<Post>& posts() const { return posts_; }
  std::size_t size() const { return posts_.size(); }
  std::size_t positive_count() const { return positive_count_; }
  std::size_t negative_count() const { return negative_count_; }

 private:
  std::vector<Post> posts_;
  std::size_t positive_count_ = 0;
  std::size_t negative_count_ = 0;
};

enum class PostsFormat { jsonl, tsv };

// JSONL: one object per line with fields
//   {"id": str, "text": str, "label": "pos"|"neg",
//    "topic"?: str, "prev_text"?: str, "next_text"?: str}
// TSV: label TAB text, UTF-8, no header; ids are the 1-based line numbers.
// Posts come back in file order, already tokenized.
Corpus load_posts(const std::string& path, PostsFormat format);

// Lowercases and splits on whitespace/punctuation. ASCII letters and digits
// and all non-ASCII bytes are token characters; an apostrophe survives
// between two token characters ("alzheimer's"); '#' and '@' survive at the
// start of a token ("#flu", "@user"). No stemming, no stopword removal.
std::vector<std::string> tokenize(std::string_view text);

// Word unigram + bigram vocabulary with dense feature indices. Indices are
// assigned in first-occurrence order over the corpus: all unigrams first,
// then all bigrams, so the mapping is deterministic for a given corpus.
class NgramVocab {
 public:
  std::optional<std::uint32_t> lookup(std::string_view ngram) const;
  std::size_t size() const { return by_index_.size(); }
  // n-gram strings ordered by feature index
  const std::vector<std::string>& entries() const { return by_index_; }

  std::uint32_t add(const std::string& ngram);  // returns existing index when present

 private:
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::string> by_index_;
};

inline std::string bigram_key(const std::string& a, const std::string& b) { return a + "_" + b; }

NgramVocab ngram_vocab(const Corpus& corpus);

// Stratified fold assignment: every post belongs to exactly one of k folds
// and each fold's positive ratio is within 1/|fold| of the corpus ratio.
struct FoldPlan {
  int k = 0;
  std::uint64_t seed = 0;
  std::map<std::string, int> assignment;  // post id -> fold in [0, k)

  std::uint64_t hash() const;
  std::vector<std::size_t> fold_sizes() const;
};

// Deterministic for fixed (corpus, k, seed). Throws InputError when k < 2 or
// either class has fewer than k members.
FoldPlan stratified_folds(const Corpus& corpus, int k, std::uint64_t seed);

// Keeps every negative and round(fraction * positive_count) positives,
// sampled without replacement; corpus order is preserved. fraction in (0, 1].
Corpus subsample_positives(const Corpus& corpus, double fraction, std::uint64_t seed);

// Returns a corpus whose posts carry the forests found for their ids;
// missing_trees reports how many posts had no forest (they keep tree=null),
// dropped_forests how many forests matched no post.
struct AttachStats {
  std::size_t missing_trees = 0;
  std::size_t dropped_forests = 0;
};
Corpus attach_trees(const Corpus& corpus,
                    const std::map<std::string, std::shared_ptr<const DependencyForest>>& forests,
                    AttachStats* stats = nullptr);

// Posts whose ids belong to the given set, in corpus order.
Corpus subcorpus(const Corpus& corpus, const std::vector<std::string>& ids);

}  // namespace wespad
