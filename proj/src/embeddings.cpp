#include "wespad/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace wespad {

const char* embedding_format_name(EmbeddingFormat f) {
  switch (f) {
    case EmbeddingFormat::word2vec_binary: return "word2vec-binary";
    case EmbeddingFormat::word2vec_text: return "word2vec-text";
    case EmbeddingFormat::glove_text: return "glove-text";
  }
  return "?";
}

EmbeddingFormat parse_embedding_format(std::string_view name) {
  if (name == "word2vec-binary" || name == "w2v-bin") return EmbeddingFormat::word2vec_binary;
  if (name == "word2vec-text" || name == "w2v-text") return EmbeddingFormat::word2vec_text;
  if (name == "glove-text" || name == "glove") return EmbeddingFormat::glove_text;
  throw InputError("unknown embedding format: " + std::string(name) +
                   " (expected word2vec-binary, word2vec-text, or glove-text)");
}

const double* EmbeddingTable::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return nullptr;
  return data_.data() + it->second;
}

bool EmbeddingTable::insert(const std::string& word, std::span<const double> vec) {
  if (vec.size() != dim_) throw InputError("EmbeddingTable::insert: wrong dimension for " + word);
  auto [it, inserted] = index_.emplace(word, data_.size());
  if (!inserted) return false;
  words_.push_back(word);
  data_.insert(data_.end(), vec.begin(), vec.end());
  return true;
}

std::vector<std::string> EmbeddingTable::vocabulary_sorted() const {
  std::vector<std::string> out = words_;
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

void check_finite(std::span<const double> vec, const std::string& where) {
  for (double v : vec)
    if (!std::isfinite(v)) throw InputError(where + ": non-finite vector component");
}

bool want(const std::set<std::string>* restrict_to, const std::string& word) {
  return restrict_to == nullptr || restrict_to->count(word) > 0;
}

EmbeddingTable load_text_table(const std::string& path, EmbeddingFormat format,
                               const std::set<std::string>* restrict_to) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open embeddings file: " + path);
  std::string line;
  std::size_t lineno = 0;
  std::size_t declared_count = 0;
  std::size_t dim = 0;

  if (format == EmbeddingFormat::word2vec_text) {
    if (!std::getline(in, line)) throw InputError(path + ": empty word2vec text file");
    ++lineno;
    std::istringstream hs(line);
    long long cnt = -1, d = -1;
    if (!(hs >> cnt >> d) || cnt < 0 || d <= 0 || (hs >> std::ws, !hs.eof()))
      throw InputError(path + ":1: malformed word2vec header (expected \"count dim\")");
    declared_count = static_cast<std::size_t>(cnt);
    dim = static_cast<std::size_t>(d);
  }

  EmbeddingTable table(dim, format);
  std::vector<double> vec;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    vec.clear();
    double v;
    while (ls >> v) vec.push_back(v);
    const std::string where = path + ":" + std::to_string(lineno);
    if (!ls.eof()) throw InputError(where + ": unparsable vector component");
    if (dim == 0) {
      if (vec.empty()) throw InputError(where + ": no vector components");
      dim = vec.size();
      table = EmbeddingTable(dim, format);
    }
    if (vec.size() != dim)
      throw InputError(where + ": dimension mismatch (got " + std::to_string(vec.size()) +
                       ", expected " + std::to_string(dim) + ")");
    check_finite(vec, where);
    ++rows;
    if (want(restrict_to, word)) table.insert(word, vec);
  }
  if (format == EmbeddingFormat::word2vec_text && rows != declared_count)
    throw InputError(path + ": header declares " + std::to_string(declared_count) +
                     " words but file has " + std::to_string(rows));
  return table;
}

EmbeddingTable load_word2vec_binary(const std::string& path,
                                    const std::set<std::string>* restrict_to) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open embeddings file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw InputError(path + ": empty word2vec binary file");
  std::istringstream hs(header);
  long long cnt = -1, d = -1;
  if (!(hs >> cnt >> d) || cnt < 0 || d <= 0)
    throw InputError(path + ": malformed word2vec binary header");
  const auto count = static_cast<std::size_t>(cnt);
  const auto dim = static_cast<std::size_t>(d);

  EmbeddingTable table(dim, EmbeddingFormat::word2vec_binary);
  std::vector<float> raw(dim);
  std::vector<double> vec(dim);
  for (std::size_t i = 0; i < count; ++i) {
    std::string word;
    char c;
    // Skip the newline terminating the previous vector, then read the word
    // up to the separating space.
    while (in.get(c)) {
      if (c == ' ') break;
      if (c == '\n' || c == '\r') {
        if (word.empty()) continue;
        break;
      }
      word.push_back(c);
    }
    if (!in || word.empty())
      throw InputError(path + ": truncated word2vec binary file at entry " + std::to_string(i));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(dim * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(dim * sizeof(float)))
      throw InputError(path + ": truncated vector for word \"" + word + "\"");
    for (std::size_t j = 0; j < dim; ++j) vec[j] = static_cast<double>(raw[j]);
    check_finite(vec, path + " word \"" + word + "\"");
    if (want(restrict_to, word)) table.insert(word, vec);
  }
  return table;
}

}  // namespace

EmbeddingTable load_embeddings(const std::string& path, EmbeddingFormat format,
                               const std::set<std::string>* restrict_to) {
  EmbeddingTable table = format == EmbeddingFormat::word2vec_binary
                             ? load_word2vec_binary(path, restrict_to)
                             : load_text_table(path, format, restrict_to);
  table.set_source_digest(fnv1a64_file(path));
  return table;
}

CentroidVector centroid(std::span<const std::string> tokens, const EmbeddingTable& table) {
  CentroidVector out;
  out.values.assign(table.dim(), 0.0);
  out.total_tokens = tokens.size();
  std::vector<const std::string*> sorted;
  sorted.reserve(tokens.size());
  for (const auto& t : tokens) sorted.push_back(&t);
  std::sort(sorted.begin(), sorted.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  for (const auto* t : sorted) {
    const double* v = table.find(*t);
    if (!v) continue;
    ++out.covered_tokens;
    for (std::size_t j = 0; j < table.dim(); ++j) out.values[j] += v[j];
  }
  if (out.covered_tokens > 0) {
    const double inv = 1.0 / static_cast<double>(out.covered_tokens);
    for (auto& x : out.values) x *= inv;
  }
  return out;
}

NeighborIndex::NeighborIndex(const EmbeddingTable& table, std::vector<std::string> candidates)
    : table_(&table) {
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  for (auto& w : candidates) {
    const double* v = table.find(w);
    if (!v) continue;
    double n2 = 0;
    for (std::size_t j = 0; j < table.dim(); ++j) n2 += v[j] * v[j];
    words_.push_back(std::move(w));
    vectors_.push_back(v);
    norms_.push_back(std::sqrt(n2));
  }
}

std::optional<std::string> NeighborIndex::nearest(std::string_view word) const {
  const double* q = table_->find(word);
  if (!q || words_.empty()) return std::nullopt;
  const std::size_t dim = table_->dim();
  double qn2 = 0;
  for (std::size_t j = 0; j < dim; ++j) qn2 += q[j] * q[j];
  if (qn2 == 0.0) return std::nullopt;
  const double qn = std::sqrt(qn2);
  std::size_t best = words_.size();
  double best_sim = -2.0;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    double sim = -2.0;
    if (norms_[i] > 0.0) {
      double dot = 0;
      const double* v = vectors_[i];
      for (std::size_t j = 0; j < dim; ++j) dot += q[j] * v[j];
      sim = dot / (qn * norms_[i]);
    }
    if (sim > best_sim) {  // strict: first (lexicographically smallest) wins ties
      best_sim = sim;
      best = i;
    }
  }
  if (best == words_.size()) return std::nullopt;
  return words_[best];
}

std::optional<std::string> nearest_in_set(std::string_view word, const EmbeddingTable& table,
                                          const std::vector<std::string>& candidate_set) {
  return NeighborIndex(table, candidate_set).nearest(word);
}

}  // namespace wespad
