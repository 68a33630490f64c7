#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wespad/common.hpp"

namespace wespad {

enum class EmbeddingFormat { word2vec_binary, word2vec_text, glove_text };

const char* embedding_format_name(EmbeddingFormat f);
EmbeddingFormat parse_embedding_format(std::string_view name);  // throws InputError

// Pretrained word -> vector table. Immutable after load; concurrent lookups
// are safe. Absent words look up to nullptr, never to a default vector.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::size_t dim, EmbeddingFormat source) : dim_(dim), source_(source) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  EmbeddingFormat source() const { return source_; }
  std::uint64_t source_digest() const { return source_digest_; }
  void set_source_digest(std::uint64_t d) { source_digest_ = d; }

  // Pointer to dim() doubles, or nullptr when the word is absent.
  const double* find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word) != nullptr; }

  // Duplicate words keep the first occurrence; returns false on duplicates.
  bool insert(const std::string& word, std::span<const double> vec);

  std::vector<std::string> vocabulary_sorted() const;

 private:
  std::size_t dim_ = 0;
  EmbeddingFormat source_ = EmbeddingFormat::glove_text;
  std::uint64_t source_digest_ = 0;
  std::unordered_map<std::string, std::size_t> index_;  // word -> offset into data_
  std::vector<std::string> words_;
  std::vector<double> data_;
};

// Loads a pretrained table. When restrict_to is non-null only those words are
// kept (saves memory with full-size tables). Vector components must be
// finite; rows with the wrong component count raise InputError.
EmbeddingTable load_embeddings(const std::string& path, EmbeddingFormat format,
                               const std::set<std::string>* restrict_to = nullptr);

struct CentroidVector {
  std::vector<double> values;
  std::size_t covered_tokens = 0;  // tokens found in the table
  std::size_t total_tokens = 0;
  bool empty() const { return covered_tokens == 0; }
};

// Arithmetic mean of the vectors of the tokens present in the table; absent
// tokens are skipped. All covered tokens absent -> zero vector flagged empty.
// Accumulation runs in sorted-token order, so the result depends only on the
// token multiset, not its order.
CentroidVector centroid(std::span<const std::string> tokens, const EmbeddingTable& table);

// Precomputed candidate list for repeated nearest-word queries against a
// fixed set (candidates absent from the table are dropped; remaining ones are
// kept in lexicographic order, which is also the tie-break order).
class NeighborIndex {
 public:
  NeighborIndex(const EmbeddingTable& table, std::vector<std::string> candidates);

  // Candidate with the highest cosine similarity to word's vector; nullopt
  // when word is absent from the table, has a zero vector, or the candidate
  // list is empty. Ties go to the lexicographically smaller candidate.
  std::optional<std::string> nearest(std::string_view word) const;

  std::size_t size() const { return words_.size(); }
  const EmbeddingTable& table() const { return *table_; }

 private:
  const EmbeddingTable* table_ = nullptr;
  std::vector<std::string> words_;       // sorted, unique, present in table
  std::vector<const double*> vectors_;
  std::vector<double> norms_;
};

// One-off form of NeighborIndex::nearest for a caller-supplied candidate set.
std::optional<std::string> nearest_in_set(std::string_view word, const EmbeddingTable& table,
                                          const std::vector<std::string>& candidate_set);

}  // namespace wespad
