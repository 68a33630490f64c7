#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "wespad/corpus.hpp"
#include "wespad/embeddings.hpp"
#include "wespad/model.hpp"
#include "wespad/treebank.hpp"

namespace wespad {

// Seeded synthetic corpora used by the evaluation experiments and tests.
//
// heldout_vocab: 800 posts, 20% positive. Every positive post carries a
//   "symptom" word unique to that post whose vector sits near the positive
//   anchor direction, so lexical models cannot generalize across folds while
//   embedding-region features can. A minority of shared cue words and a noisy
//   "i have" template keep the lexical baseline alive but mediocre. Posts also
//   carry prev/next context texts and dependency trees for a subset.
//
// impure_cluster: three embedding-space blobs on one axis: a pure-positive
//   blob, a pure-negative blob, and a deliberately impure blob (minority
//   positive) between them. The centroid classifier is overconfident on the
//   impure blob, so the partition count K controls the recall/precision
//   trade-off. Lexical content is unique per post (uninformative).
//
// separable: small corpus where one token determines the label.
enum class FixtureKind { heldout_vocab, impure_cluster, separable };

const char* fixture_kind_name(FixtureKind k);
std::optional<FixtureKind> parse_fixture_kind(const std::string& name);

struct Fixture {
  Corpus corpus;  // trees already attached
  std::shared_ptr<const EmbeddingTable> table;
  std::map<std::string, std::shared_ptr<const DependencyForest>> forests;
};

Fixture gen_fixture(FixtureKind kind, std::uint64_t seed);

// Hyperparameters the fixtures are designed for.
WespadConfig fixture_config(FixtureKind kind, std::uint64_t seed);

// Writes posts.jsonl, embeddings.txt (glove text format) and, when the
// fixture has trees, trees.conll into the directory. Byte-deterministic for
// a given (kind, seed).
void write_fixture(const Fixture& fixture, const std::string& dir);

}  // namespace wespad
