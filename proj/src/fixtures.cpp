#include "wespad/fixtures.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace wespad {

namespace fs = std::filesystem;
using json = nlohmann::json;

const char* fixture_kind_name(FixtureKind k) {
  switch (k) {
    case FixtureKind::heldout_vocab: return "heldout-vocab";
    case FixtureKind::impure_cluster: return "impure-cluster";
    case FixtureKind::separable: return "separable";
  }
  return "?";
}

std::optional<FixtureKind> parse_fixture_kind(const std::string& name) {
  for (FixtureKind k :
       {FixtureKind::heldout_vocab, FixtureKind::impure_cluster, FixtureKind::separable}) {
    if (name == fixture_kind_name(k)) return k;
  }
  return std::nullopt;
}

namespace {

constexpr std::size_t kDim = 50;

// word vector = scale * e0 + gaussian noise in the remaining components
std::vector<double> anchored_vector(Rng& rng, double scale, double noise) {
  std::vector<double> v(kDim, 0.0);
  v[0] = scale + 0.1 * noise * rng.normal();
  for (std::size_t j = 1; j < kDim; ++j) v[j] = noise * rng.normal();
  return v;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string s;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) s += " ";
    s += tokens[i];
  }
  return s;
}

// Flat parse: token 1 heads the sentence, everything else attaches to it,
// except "i have ..." where "have" is the root.
DependencyTree flat_tree(const std::vector<std::string>& tokens) {
  std::vector<DependencyTree::Node> nodes;
  int root = 0;
  if (tokens.size() >= 2 && tokens[0] == "i" && tokens[1] == "have") root = 1;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    DependencyTree::Node n;
    n.form = tokens[i];
    n.head = static_cast<int>(i) == root ? -1 : root;
    nodes.push_back(std::move(n));
  }
  return DependencyTree::build(std::move(nodes), "fixture");
}

struct Vocab {
  std::vector<std::string> fillers, cues, neg_cues, pos_ctx, neg_ctx;
};

Fixture build_heldout(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0xf1c7u));
  auto table = std::make_shared<EmbeddingTable>(kDim, EmbeddingFormat::glove_text);
  const double kAnchor = 6.0;
  const double kNoise = 0.35;

  Vocab v;
  for (int i = 0; i < 40; ++i) {
    v.fillers.push_back("word" + std::to_string(i));
    table->insert(v.fillers.back(), anchored_vector(rng, 0.0, kNoise));
  }
  for (int i = 0; i < 8; ++i) {
    v.cues.push_back("diagnosed" + std::to_string(i));
    table->insert(v.cues.back(), anchored_vector(rng, kAnchor, kNoise));
  }
  for (int i = 0; i < 12; ++i) {
    v.neg_cues.push_back("fine" + std::to_string(i));
    table->insert(v.neg_cues.back(), anchored_vector(rng, -kAnchor, kNoise));
  }
  for (int i = 0; i < 20; ++i) {
    v.pos_ctx.push_back("worried" + std::to_string(i));
    table->insert(v.pos_ctx.back(), anchored_vector(rng, 0.8 * kAnchor, kNoise));
    v.neg_ctx.push_back("chill" + std::to_string(i));
    table->insert(v.neg_ctx.back(), anchored_vector(rng, -0.8 * kAnchor, kNoise));
  }
  table->insert("i", anchored_vector(rng, 0.0, kNoise));
  table->insert("have", anchored_vector(rng, 0.0, kNoise));

  const std::size_t n_pos = 160, n_neg = 640;
  for (std::size_t i = 0; i < n_pos; ++i)
    table->insert("sympt" + std::to_string(i), anchored_vector(rng, kAnchor, kNoise));

  auto pick = [&](const std::vector<std::string>& pool) {
    return pool[static_cast<std::size_t>(rng.below(pool.size()))];
  };
  auto filler_run = [&](std::size_t count) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(pick(v.fillers));
    return out;
  };
  auto context_text = [&](bool positive) {
    std::vector<std::string> toks = filler_run(2 + rng.below(3));
    toks.push_back(pick(positive ? v.pos_ctx : v.neg_ctx));
    rng.shuffle(toks);
    return join_tokens(toks);
  };

  std::vector<Post> posts;
  std::map<std::string, std::shared_ptr<const DependencyForest>> forests;

  for (std::size_t i = 0; i < n_pos; ++i) {
    std::vector<std::string> toks;
    const bool template_i_have = rng.unit() < 0.6;
    if (template_i_have) {
      toks = {"i", "have", "sympt" + std::to_string(i)};
      auto tail = filler_run(3 + rng.below(3));
      toks.insert(toks.end(), tail.begin(), tail.end());
    } else {
      toks = filler_run(4 + rng.below(3));
      toks.push_back("sympt" + std::to_string(i));
      rng.shuffle(toks);
    }
    if (rng.unit() < 0.6) toks.push_back(pick(v.cues));

    Post p;
    p.id = "p" + std::to_string(i);
    p.label = Label::positive;
    p.text = join_tokens(toks);
    p.tokens = tokenize(p.text);
    const bool noisy_ctx = rng.unit() < 0.05;
    if (rng.unit() < 0.6) p.prev_text = context_text(!noisy_ctx);
    if (rng.unit() < 0.6) p.next_text = context_text(!noisy_ctx);
    if (template_i_have) {
      auto forest = std::make_shared<DependencyForest>();
      forest->post_id = p.id;
      forest->sentences.push_back(flat_tree(p.tokens));
      forests[p.id] = forest;
    }
    posts.push_back(std::move(p));
  }

  for (std::size_t i = 0; i < n_neg; ++i) {
    std::vector<std::string> toks;
    const bool template_i_have = rng.unit() < 0.15;
    if (template_i_have) {
      toks = {"i", "have"};
      auto tail = filler_run(4 + rng.below(3));
      toks.insert(toks.end(), tail.begin(), tail.end());
    } else {
      toks = filler_run(4 + rng.below(3));
    }
    toks.push_back(pick(v.neg_cues));
    if (rng.unit() < 0.5) toks.push_back(pick(v.neg_cues));
    if (rng.unit() < 0.03) toks.push_back(pick(v.cues));

    Post p;
    p.id = "n" + std::to_string(i);
    p.label = Label::negative;
    p.text = join_tokens(toks);
    p.tokens = tokenize(p.text);
    if (rng.unit() < 0.6) p.prev_text = context_text(false);
    if (rng.unit() < 0.6) p.next_text = context_text(false);
    if (template_i_have) {
      auto forest = std::make_shared<DependencyForest>();
      forest->post_id = p.id;
      forest->sentences.push_back(flat_tree(p.tokens));
      forests[p.id] = forest;
    }
    posts.push_back(std::move(p));
  }

  rng.shuffle(posts);

  Fixture f;
  f.table = table;
  f.forests = std::move(forests);
  f.corpus = attach_trees(Corpus::from_posts(std::move(posts)), f.forests);
  return f;
}

Fixture build_impure(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x13b9u));
  auto table = std::make_shared<EmbeddingTable>(kDim, EmbeddingFormat::glove_text);
  const double kAnchor = 6.0;
  const double kNoise = 0.35;

  std::vector<std::string> fillers;
  for (int i = 0; i < 40; ++i) {
    fillers.push_back("word" + std::to_string(i));
    table->insert(fillers.back(), anchored_vector(rng, 0.0, kNoise));
  }

  // Blobs on the e0 axis: A pure positive at +1, C impure at +0.7 with 40%
  // positives, B pure negative at -1.
  struct Blob {
    char tag;
    double position;
    std::size_t positives, negatives;
  };
  const std::vector<Blob> blobs = {{'a', 1.0, 120, 0}, {'c', 0.7, 48, 72}, {'b', -1.0, 0, 330}};

  std::vector<Post> posts;
  std::size_t serial = 0;
  for (const auto& blob : blobs) {
    const std::size_t total = blob.positives + blob.negatives;
    for (std::size_t i = 0; i < total; ++i) {
      const bool positive = i < blob.positives;
      // Two per-post anchor words keep the blob tight; unique names keep the
      // lexical features useless across posts.
      std::vector<std::string> toks;
      for (int w = 0; w < 2; ++w) {
        std::string word = std::string(1, blob.tag) + "anchor" + std::to_string(serial) + "x" +
                           std::to_string(w);
        table->insert(word, anchored_vector(rng, blob.position * kAnchor, kNoise));
        toks.push_back(std::move(word));
      }
      for (int w = 0; w < 4; ++w)
        toks.push_back(fillers[static_cast<std::size_t>(rng.below(fillers.size()))]);
      rng.shuffle(toks);

      Post p;
      p.id = std::string(1, blob.tag) + std::to_string(i);
      p.label = positive ? Label::positive : Label::negative;
      p.text = join_tokens(toks);
      p.tokens = tokenize(p.text);
      posts.push_back(std::move(p));
      ++serial;
    }
  }
  rng.shuffle(posts);

  Fixture f;
  f.table = table;
  f.corpus = Corpus::from_posts(std::move(posts));
  return f;
}

Fixture build_separable(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x5e9au));
  auto table = std::make_shared<EmbeddingTable>(kDim, EmbeddingFormat::glove_text);
  table->insert("sick", anchored_vector(rng, 6.0, 0.3));
  table->insert("well", anchored_vector(rng, -6.0, 0.3));
  std::vector<std::string> fillers;
  for (int i = 0; i < 20; ++i) {
    fillers.push_back("word" + std::to_string(i));
    table->insert(fillers.back(), anchored_vector(rng, 0.0, 0.3));
  }

  std::vector<Post> posts;
  for (std::size_t i = 0; i < 200; ++i) {
    const bool positive = i < 60;
    std::vector<std::string> toks;
    for (int w = 0; w < 4; ++w)
      toks.push_back(fillers[static_cast<std::size_t>(rng.below(fillers.size()))]);
    toks.push_back(positive ? "sick" : "well");
    rng.shuffle(toks);
    Post p;
    p.id = (positive ? "p" : "n") + std::to_string(i);
    p.label = positive ? Label::positive : Label::negative;
    p.text = join_tokens(toks);
    p.tokens = tokenize(p.text);
    posts.push_back(std::move(p));
  }
  rng.shuffle(posts);

  Fixture f;
  f.table = table;
  f.corpus = Corpus::from_posts(std::move(posts));
  return f;
}

}  // namespace

Fixture gen_fixture(FixtureKind kind, std::uint64_t seed) {
  switch (kind) {
    case FixtureKind::heldout_vocab: return build_heldout(seed);
    case FixtureKind::impure_cluster: return build_impure(seed);
    case FixtureKind::separable: return build_separable(seed);
  }
  throw InputError("gen_fixture: unknown fixture kind");
}

WespadConfig fixture_config(FixtureKind kind, std::uint64_t seed) {
  WespadConfig c;
  c.seed = seed;
  switch (kind) {
    case FixtureKind::heldout_vocab:
      c.alpha = c.alpha2 = 0.15;
      c.k_partitions = c.k2_partitions = 3;
      break;
    case FixtureKind::impure_cluster:
      c.alpha = c.alpha2 = 0.05;
      c.k_partitions = c.k2_partitions = 4;
      c.features.syn_feats = false;
      c.features.we_distortion = false;
      c.features.context_prev = false;
      c.features.context_next = false;
      break;
    case FixtureKind::separable:
      c.alpha = c.alpha2 = 0.15;
      c.k_partitions = c.k2_partitions = 2;
      c.features.syn_feats = false;
      c.features.context_prev = false;
      c.features.context_next = false;
      break;
  }
  return c;
}

void write_fixture(const Fixture& fixture, const std::string& dir) {
  fs::create_directories(dir);

  {
    std::ofstream out(fs::path(dir) / "posts.jsonl", std::ios::binary);
    if (!out) throw InputError("cannot write posts.jsonl under " + dir);
    for (const auto& p : fixture.corpus.posts()) {
      json j;
      j["id"] = p.id;
      j["text"] = p.text;
      j["label"] = label_name(p.label);
      if (!p.topic.empty()) j["topic"] = p.topic;
      if (p.prev_text) j["prev_text"] = *p.prev_text;
      if (p.next_text) j["next_text"] = *p.next_text;
      out << j.dump() << "\n";
    }
  }

  {
    std::ofstream out(fs::path(dir) / "embeddings.txt", std::ios::binary);
    if (!out) throw InputError("cannot write embeddings.txt under " + dir);
    for (const auto& word : fixture.table->vocabulary_sorted()) {
      const double* vec = fixture.table->find(word);
      out << word;
      for (std::size_t j = 0; j < fixture.table->dim(); ++j)
        out << " " << format_double(vec[j]);
      out << "\n";
    }
  }

  if (!fixture.forests.empty()) {
    std::ofstream out(fs::path(dir) / "trees.conll", std::ios::binary);
    if (!out) throw InputError("cannot write trees.conll under " + dir);
    for (const auto& [id, forest] : fixture.forests) {
      out << "# id = " << id << "\n";
      for (const auto& tree : forest->sentences) {
        for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
          const auto& n = tree.nodes[i];
          out << (i + 1) << "\t" << n.form << "\t_\t_\t_\t_\t" << (n.head + 1) << "\t_\t_\t_\n";
        }
        out << "\n";
      }
    }
  }
}

}  // namespace wespad
