#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>

#include "wespad/corpus.hpp"
#include "wespad/embeddings.hpp"

namespace wespad {

// Per-word information gain over a binary-labeled training corpus.
// Entropies are in bits; 0 <= IG <= corpus_entropy <= 1 for every word.
// The training vocabulary is exactly the key set of table.
struct IGWeights {
  std::map<std::string, double> table;  // word -> IG
  double corpus_entropy = 0.0;

  bool in_train_vocab(std::string_view word) const {
    return table.count(std::string(word)) > 0;
  }
  std::vector<std::string> train_vocab() const;
};

// Binary entropy of a (positive, negative) count split, in bits; empty -> 0.
double binary_entropy(std::size_t positives, std::size_t negatives);

// IG_w = Entr(D) - (|D_w|/|D| Entr(D_w) + |D~w|/|D| Entr(D~w)) per distinct
// token, with document-presence counts. Throws FitError when the corpus is
// empty or single-class (entropy degenerate).
IGWeights compute_ig(const Corpus& train);

// IG of a word: direct hit when the word occurred in training; otherwise the
// IG of its nearest embedding-space neighbor among training words present in
// the table; otherwise 0. The NeighborIndex overload avoids rebuilding the
// candidate list per call and must be built over train_vocab.
double ig_lookup(std::string_view word, const IGWeights& ig, const EmbeddingTable& table);
double ig_lookup(std::string_view word, const IGWeights& ig, const NeighborIndex& neighbors);

// IG-weighted mean of the token vectors present in the table
// (M = sum IG_i W_i / sum IG_i). When the IG mass is zero the unweighted
// centroid is returned. Token order does not affect the result.
CentroidVector weighted_centroid(std::span<const std::string> tokens, const EmbeddingTable& table,
                                 const IGWeights& ig);
CentroidVector weighted_centroid(std::span<const std::string> tokens, const EmbeddingTable& table,
                                 const IGWeights& ig, const NeighborIndex& neighbors);

}  // namespace wespad
