#include "wespad/ig.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace wespad {

std::vector<std::string> IGWeights::train_vocab() const {
  std::vector<std::string> v;
  v.reserve(table.size());
  for (const auto& [w, ig] : table) v.push_back(w);
  return v;
}

double binary_entropy(std::size_t positives, std::size_t negatives) {
  const std::size_t n = positives + negatives;
  if (n == 0 || positives == 0 || negatives == 0) return 0.0;
  const double p = static_cast<double>(positives) / static_cast<double>(n);
  const double q = 1.0 - p;
  return -(p * std::log2(p) + q * std::log2(q));
}

IGWeights compute_ig(const Corpus& train) {
  if (train.size() == 0) throw FitError("compute_ig: empty training corpus");
  if (train.positive_count() == 0 || train.negative_count() == 0)
    throw FitError("compute_ig: training corpus has a single class");

  const std::size_t n = train.size();
  const std::size_t n_pos = train.positive_count();
  const std::size_t n_neg = train.negative_count();

  // Document-presence counts per word.
  struct Counts {
    std::size_t pos = 0, neg = 0;
  };
  std::unordered_map<std::string, Counts> counts;
  std::unordered_set<std::string> seen;
  for (const auto& post : train.posts()) {
    seen.clear();
    for (const auto& t : post.tokens) {
      if (!seen.insert(t).second) continue;
      auto& c = counts[t];
      if (post.label == Label::positive)
        ++c.pos;
      else
        ++c.neg;
    }
  }

  IGWeights ig;
  ig.corpus_entropy = binary_entropy(n_pos, n_neg);
  for (const auto& [word, c] : counts) {
    const std::size_t with = c.pos + c.neg;
    const std::size_t without_pos = n_pos - c.pos;
    const std::size_t without_neg = n_neg - c.neg;
    const std::size_t without = without_pos + without_neg;
    const double cond = (static_cast<double>(with) / static_cast<double>(n)) *
                            binary_entropy(c.pos, c.neg) +
                        (static_cast<double>(without) / static_cast<double>(n)) *
                            binary_entropy(without_pos, without_neg);
    double gain = ig.corpus_entropy - cond;
    gain = std::clamp(gain, 0.0, ig.corpus_entropy);  // absorb FP rounding
    ig.table[word] = gain;
  }
  return ig;
}

double ig_lookup(std::string_view word, const IGWeights& ig, const NeighborIndex& neighbors) {
  auto it = ig.table.find(std::string(word));
  if (it != ig.table.end()) return it->second;
  auto near = neighbors.nearest(word);
  if (!near) return 0.0;
  auto nit = ig.table.find(*near);
  return nit == ig.table.end() ? 0.0 : nit->second;
}

double ig_lookup(std::string_view word, const IGWeights& ig, const EmbeddingTable& table) {
  auto it = ig.table.find(std::string(word));
  if (it != ig.table.end()) return it->second;
  return ig_lookup(word, ig, NeighborIndex(table, ig.train_vocab()));
}

namespace {

CentroidVector weighted_centroid_impl(std::span<const std::string> tokens,
                                      const EmbeddingTable& table, const IGWeights& ig,
                                      const NeighborIndex* neighbors) {
  CentroidVector out;
  out.values.assign(table.dim(), 0.0);
  out.total_tokens = tokens.size();

  std::vector<const std::string*> sorted;
  sorted.reserve(tokens.size());
  for (const auto& t : tokens) sorted.push_back(&t);
  std::sort(sorted.begin(), sorted.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });

  double mass = 0.0;
  for (const auto* t : sorted) {
    const double* v = table.find(*t);
    if (!v) continue;
    ++out.covered_tokens;
    const double w = neighbors ? ig_lookup(*t, ig, *neighbors) : ig_lookup(*t, ig, table);
    mass += w;
    for (std::size_t j = 0; j < table.dim(); ++j) out.values[j] += w * v[j];
  }
  if (out.covered_tokens == 0) return out;
  if (mass > 0.0) {
    const double inv = 1.0 / mass;
    for (auto& x : out.values) x *= inv;
    return out;
  }
  // All covered tokens carry zero IG: the weighted mean is undefined, fall
  // back to the unweighted centroid.
  return centroid(tokens, table);
}

}  // namespace

CentroidVector weighted_centroid(std::span<const std::string> tokens, const EmbeddingTable& table,
                                 const IGWeights& ig) {
  return weighted_centroid_impl(tokens, table, ig, nullptr);
}

CentroidVector weighted_centroid(std::span<const std::string> tokens, const EmbeddingTable& table,
                                 const IGWeights& ig, const NeighborIndex& neighbors) {
  return weighted_centroid_impl(tokens, table, ig, &neighbors);
}

}  // namespace wespad
