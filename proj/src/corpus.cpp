#include "wespad/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace wespad {

using json = nlohmann::json;

Corpus Corpus::from_posts(std::vector<Post> posts) {
  Corpus c;
  std::unordered_set<std::string> seen;
  seen.reserve(posts.size());
  for (const auto& p : posts) {
    if (!seen.insert(p.id).second) {
      throw InputError("duplicate post id: " + p.id);
    }
    if (p.label == Label::positive)
      ++c.positive_count_;
    else
      ++c.negative_count_;
  }
  c.posts_ = std::move(posts);
  return c;
}

namespace {

Label parse_label(const std::string& s, const std::string& where) {
  if (s == "pos") return Label::positive;
  if (s == "neg") return Label::negative;
  throw InputError(where + ": unknown label string \"" + s + "\" (expected \"pos\" or \"neg\")");
}

Post parse_jsonl_record(const std::string& line, const std::string& where) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw InputError(where + ": " + e.what());
  }
  if (!j.is_object()) throw InputError(where + ": record is not a JSON object");
  Post p;
  try {
    p.id = j.at("id").get<std::string>();
    p.text = j.at("text").get<std::string>();
    p.label = parse_label(j.at("label").get<std::string>(), where);
    if (j.contains("topic")) p.topic = j.at("topic").get<std::string>();
    if (j.contains("prev_text")) p.prev_text = j.at("prev_text").get<std::string>();
    if (j.contains("next_text")) p.next_text = j.at("next_text").get<std::string>();
  } catch (const json::exception& e) {
    throw InputError(where + ": " + e.what());
  }
  p.tokens = tokenize(p.text);
  return p;
}

}  // namespace

Corpus load_posts(const std::string& path, PostsFormat format) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open posts file: " + path);
  std::vector<Post> posts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (format == PostsFormat::jsonl) {
      posts.push_back(parse_jsonl_record(line, where));
    } else {
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw InputError(where + ": expected \"label<TAB>text\"");
      Post p;
      p.id = std::to_string(lineno);
      p.label = parse_label(line.substr(0, tab), where);
      p.text = line.substr(tab + 1);
      p.tokens = tokenize(p.text);
      posts.push_back(std::move(p));
    }
  }
  return Corpus::from_posts(std::move(posts));
}

namespace {

inline bool is_token_char(unsigned char c) {
  return std::isalnum(c) != 0 || c >= 0x80;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  };
  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (is_token_char(c)) {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    } else if (c == '\'') {
      const bool next_ok = i + 1 < n && is_token_char(static_cast<unsigned char>(text[i + 1]));
      if (!cur.empty() && next_ok)
        cur.push_back('\'');
      else
        flush();
    } else if (c == '#' || c == '@') {
      flush();
      const bool next_ok = i + 1 < n && is_token_char(static_cast<unsigned char>(text[i + 1]));
      if (next_ok) cur.push_back(static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::optional<std::uint32_t> NgramVocab::lookup(std::string_view ngram) const {
  auto it = index_.find(std::string(ngram));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t NgramVocab::add(const std::string& ngram) {
  auto [it, inserted] = index_.emplace(ngram, static_cast<std::uint32_t>(by_index_.size()));
  if (inserted) by_index_.push_back(ngram);
  return it->second;
}

NgramVocab ngram_vocab(const Corpus& corpus) {
  NgramVocab v;
  for (const auto& p : corpus.posts())
    for (const auto& t : p.tokens) v.add(t);
  for (const auto& p : corpus.posts())
    for (std::size_t i = 0; i + 1 < p.tokens.size(); ++i)
      v.add(bigram_key(p.tokens[i], p.tokens[i + 1]));
  return v;
}

std::uint64_t FoldPlan::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& [id, fold] : assignment) {
    h = fnv1a64(id, h);
    h = fnv1a64(":", h);
    h = fnv1a64(std::to_string(fold), h);
    h = fnv1a64("\n", h);
  }
  return h;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (const auto& [id, fold] : assignment) ++sizes[static_cast<std::size_t>(fold)];
  return sizes;
}

FoldPlan stratified_folds(const Corpus& corpus, int k, std::uint64_t seed) {
  if (k < 2) throw InputError("stratified_folds: k must be >= 2");
  std::vector<std::size_t> pos_idx, neg_idx;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    (corpus.posts()[i].label == Label::positive ? pos_idx : neg_idx).push_back(i);
  }
  if (pos_idx.size() < static_cast<std::size_t>(k) || neg_idx.size() < static_cast<std::size_t>(k)) {
    throw InputError("stratified_folds: a class has fewer than k=" + std::to_string(k) +
                     " examples (pos=" + std::to_string(pos_idx.size()) +
                     ", neg=" + std::to_string(neg_idx.size()) + ")");
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  Rng rng(seed);
  // Per class: shuffle the posts, shuffle the fold order, then deal
  // round-robin. Dealing keeps every fold's class count within one of the
  // proportional share, which meets the stratification invariant.
  for (auto* idx : {&pos_idx, &neg_idx}) {
    rng.shuffle(*idx);
    std::vector<int> fold_order(static_cast<std::size_t>(k));
    for (int f = 0; f < k; ++f) fold_order[static_cast<std::size_t>(f)] = f;
    rng.shuffle(fold_order);
    for (std::size_t i = 0; i < idx->size(); ++i) {
      const int fold = fold_order[i % static_cast<std::size_t>(k)];
      plan.assignment[corpus.posts()[(*idx)[i]].id] = fold;
    }
  }
  return plan;
}

Corpus subsample_positives(const Corpus& corpus, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw InputError("subsample_positives: fraction must be in (0, 1]");
  const auto n_pos = corpus.positive_count();
  const auto keep =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n_pos)));
  if (keep >= n_pos) return corpus;

  std::vector<std::size_t> pos_idx;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (corpus.posts()[i].label == Label::positive) pos_idx.push_back(i);
  Rng rng(seed);
  rng.shuffle(pos_idx);
  std::set<std::size_t> kept(pos_idx.begin(), pos_idx.begin() + static_cast<std::ptrdiff_t>(keep));

  std::vector<Post> out;
  out.reserve(corpus.size() - (n_pos - keep));
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& p = corpus.posts()[i];
    if (p.label == Label::negative || kept.count(i)) out.push_back(p);
  }
  return Corpus::from_posts(std::move(out));
}

Corpus attach_trees(const Corpus& corpus,
                    const std::map<std::string, std::shared_ptr<const DependencyForest>>& forests,
                    AttachStats* stats) {
  std::vector<Post> posts = corpus.posts();
  std::size_t attached = 0, missing = 0;
  for (auto& p : posts) {
    auto it = forests.find(p.id);
    if (it != forests.end()) {
      p.tree = it->second;
      ++attached;
    } else {
      p.tree = nullptr;
      ++missing;
    }
  }
  if (stats) {
    stats->missing_trees = missing;
    stats->dropped_forests = forests.size() - attached;
  }
  return Corpus::from_posts(std::move(posts));
}

Corpus subcorpus(const Corpus& corpus, const std::vector<std::string>& ids) {
  std::unordered_set<std::string> want(ids.begin(), ids.end());
  std::vector<Post> out;
  out.reserve(want.size());
  for (const auto& p : corpus.posts())
    if (want.count(p.id)) out.push_back(p);
  return Corpus::from_posts(std::move(out));
}

}  // namespace wespad
