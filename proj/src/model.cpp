#include "wespad/model.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace wespad {

using json = nlohmann::json;

int flag_slot(double p, double alpha, int partition, int k) {
  if (p >= 0.5 + alpha) return partition;
  if (p <= 0.5 - alpha) return k + partition;
  return -1;
}

RegionFlagModel fit_region_model(const std::vector<CentroidVector>& vectors,
                                 const std::vector<int>& labels, double alpha, int k,
                                 std::uint64_t seed, EmbeddingSpace space,
                                 const LogregConfig& logreg) {
  if (vectors.size() != labels.size())
    throw FitError("fit_region_model: vectors/labels size mismatch");
  RegionFlagModel m;
  m.alpha = alpha;
  m.space = space;
  m.k_slots = k;

  std::vector<std::vector<double>> pts;
  std::vector<int> y;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].empty()) continue;
    pts.push_back(vectors[i].values);
    y.push_back(labels[i]);
  }
  if (pts.empty()) return m;  // unfitted: all flags stay zero

  m.centroid_classifier = train_logreg_dense(pts, y, logreg);
  m.partitioner = kmeans_fit(pts, k, seed);
  m.fitted = true;
  return m;
}

std::vector<std::uint8_t> region_flags(const RegionFlagModel& model, const CentroidVector& v) {
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(2 * model.k_slots), 0);
  if (!model.fitted || v.empty()) return flags;
  const double p = predict_proba(model.centroid_classifier, v.values);
  const int j = kmeans_assign(model.partitioner, v.values);
  const int slot = flag_slot(p, model.alpha, j, model.k_slots);
  if (slot >= 0) flags[static_cast<std::size_t>(slot)] = 1;
  return flags;
}

void WespadConfig::validate() const {
  if (!(alpha >= 0.0 && alpha < 0.5)) throw InputError("config: alpha must be in [0, 0.5)");
  if (!(alpha2 >= 0.0 && alpha2 < 0.5)) throw InputError("config: alpha2 must be in [0, 0.5)");
  if (k_partitions < 1) throw InputError("config: k_partitions must be >= 1");
  if (k2_partitions < 1) throw InputError("config: k2_partitions must be >= 1");
  if (!(l2 >= 0.0)) throw InputError("config: l2 must be >= 0");
  if (min_support < 1) throw InputError("config: min_support must be >= 1");
  if (min_size < 1) throw InputError("config: min_size must be >= 1");
}

const char* feature_group_name(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::lex: return "lex_feats";
    case FeatureGroup::syn: return "syn_feats";
    case FeatureGroup::we_partitioning: return "we_partitioning";
    case FeatureGroup::we_distortion: return "we_distortion";
    case FeatureGroup::context_prev: return "context_prev";
    case FeatureGroup::context_next: return "context_next";
    case FeatureGroup::raw_centroid: return "raw_centroid";
  }
  return "?";
}

std::optional<FeatureGroup> parse_feature_group(const std::string& name) {
  for (FeatureGroup g :
       {FeatureGroup::lex, FeatureGroup::syn, FeatureGroup::we_partitioning,
        FeatureGroup::we_distortion, FeatureGroup::context_prev, FeatureGroup::context_next,
        FeatureGroup::raw_centroid}) {
    if (name == feature_group_name(g)) return g;
  }
  return std::nullopt;
}

const FeatureLayout::GroupSpan* FeatureLayout::find(FeatureGroup g) const {
  for (const auto& s : groups)
    if (s.group == g) return &s;
  return nullptr;
}

namespace {

std::vector<int> class_labels(const Corpus& corpus) {
  std::vector<int> y;
  y.reserve(corpus.size());
  for (const auto& p : corpus.posts()) y.push_back(p.label == Label::positive ? 1 : 0);
  return y;
}

// Per-class mining merged over the union: patterns frequent in either class,
// with document support recounted over all training trees.
std::vector<SubtreePattern> mine_per_class(const std::vector<DependencyTree>& all_trees,
                                           const std::vector<DependencyTree>& pos_trees,
                                           const std::vector<DependencyTree>& neg_trees,
                                           int min_support, int min_size) {
  auto pos = mine_frequent_subtrees(pos_trees, min_support, min_size);
  auto neg = mine_frequent_subtrees(neg_trees, min_support, min_size);
  std::vector<SubtreePattern> merged = std::move(pos);
  for (auto& p : neg) {
    const bool dup = std::any_of(merged.begin(), merged.end(),
                                 [&](const SubtreePattern& q) { return q.nodes == p.nodes; });
    if (!dup) merged.push_back(std::move(p));
  }
  for (auto& p : merged) {
    p.support = 0;
    p.supporting_trees.clear();
    for (std::size_t t = 0; t < all_trees.size(); ++t) {
      if (contains(all_trees[t], p)) {
        ++p.support;
        p.supporting_trees.push_back(t);
      }
    }
  }
  std::sort(merged.begin(), merged.end(), [](const SubtreePattern& a, const SubtreePattern& b) {
    if (a.size != b.size) return a.size < b.size;
    return a.nodes < b.nodes;
  });
  for (std::size_t i = 0; i < merged.size(); ++i)
    merged[i].feature_index = static_cast<std::uint32_t>(i);
  return merged;
}

CentroidVector context_vector(const std::string& text, const WespadModel& m) {
  const auto tokens = tokenize(text);
  if (m.config.context_distorted && m.neighbors)
    return weighted_centroid(tokens, *m.table, m.ig, *m.neighbors);
  return centroid(tokens, *m.table);
}

RegionFlagModel fit_context_region(const Corpus& train, const WespadModel& m,
                                   bool use_prev, std::uint64_t seed) {
  std::vector<CentroidVector> vecs;
  std::vector<int> labels;
  for (const auto& p : train.posts()) {
    const auto& text = use_prev ? p.prev_text : p.next_text;
    if (!text) continue;
    vecs.push_back(context_vector(*text, m));
    labels.push_back(p.label == Label::positive ? 1 : 0);
  }
  const auto& cfg = m.config;
  const double alpha = cfg.context_distorted ? cfg.alpha2 : cfg.alpha;
  const int k = cfg.context_distorted ? cfg.k2_partitions : cfg.k_partitions;
  const auto space = cfg.context_distorted ? EmbeddingSpace::distorted : EmbeddingSpace::regular;
  return fit_region_model(vecs, labels, alpha, k, seed, space,
                          LogregConfig{cfg.l2, 200, 1e-6, seed});
}

}  // namespace

WespadModel fit_wespad(const Corpus& train, const WespadConfig& config,
                       std::shared_ptr<const EmbeddingTable> table) {
  config.validate();
  if (!table) throw FitError("fit_wespad: embedding table is required");
  if (train.size() == 0) throw FitError("fit_wespad: empty training corpus");
  if (train.positive_count() == 0 || train.negative_count() == 0)
    throw FitError("fit_wespad: training corpus must contain both classes");

  WespadModel m;
  m.config = config;
  m.table = std::move(table);
  const auto& cfg = m.config;
  const LogregConfig lr{cfg.l2, 200, 1e-6, cfg.seed};

  if (cfg.features.lex_feats) m.vocab = ngram_vocab(train);

  if (cfg.features.syn_feats) {
    std::vector<DependencyTree> all_trees, pos_trees, neg_trees;
    for (const auto& p : train.posts()) {
      if (!p.tree) continue;
      for (const auto& s : p.tree->sentences) {
        all_trees.push_back(s);
        (p.label == Label::positive ? pos_trees : neg_trees).push_back(s);
      }
    }
    if (!all_trees.empty()) {
      m.patterns = cfg.per_class_mining
                       ? mine_per_class(all_trees, pos_trees, neg_trees, cfg.min_support,
                                        cfg.min_size)
                       : mine_frequent_subtrees(all_trees, cfg.min_support, cfg.min_size);
    }
  }

  const bool context_on = cfg.features.context_prev || cfg.features.context_next;
  if (cfg.features.we_distortion || (cfg.context_distorted && context_on)) {
    m.ig = compute_ig(train);
    m.neighbors = std::make_shared<NeighborIndex>(*m.table, m.ig.train_vocab());
  }

  const std::vector<int> labels = class_labels(train);

  if (cfg.features.we_partitioning) {
    std::vector<CentroidVector> vecs;
    vecs.reserve(train.size());
    for (const auto& p : train.posts()) vecs.push_back(centroid(p.tokens, *m.table));
    m.regular_region = fit_region_model(vecs, labels, cfg.alpha, cfg.k_partitions,
                                        mix_seed(cfg.seed, 101), EmbeddingSpace::regular, lr);
  }
  if (cfg.features.we_distortion) {
    std::vector<CentroidVector> vecs;
    vecs.reserve(train.size());
    for (const auto& p : train.posts())
      vecs.push_back(weighted_centroid(p.tokens, *m.table, m.ig, *m.neighbors));
    m.distorted_region = fit_region_model(vecs, labels, cfg.alpha2, cfg.k2_partitions,
                                          mix_seed(cfg.seed, 102), EmbeddingSpace::distorted, lr);
  }
  if (cfg.features.context_prev)
    m.prev_region = fit_context_region(train, m, true, mix_seed(cfg.seed, 103));
  if (cfg.features.context_next)
    m.next_region = fit_context_region(train, m, false, mix_seed(cfg.seed, 104));

  // Feature layout, fixed group order.
  auto add_group = [&](FeatureGroup g, std::uint32_t size) {
    m.layout.groups.push_back({g, m.layout.total_dim, size});
    m.layout.total_dim += size;
  };
  if (cfg.features.lex_feats) add_group(FeatureGroup::lex, static_cast<std::uint32_t>(m.vocab.size()));
  if (cfg.features.syn_feats)
    add_group(FeatureGroup::syn, static_cast<std::uint32_t>(m.patterns.size()));
  if (cfg.features.we_partitioning)
    add_group(FeatureGroup::we_partitioning, static_cast<std::uint32_t>(2 * cfg.k_partitions));
  if (cfg.features.we_distortion)
    add_group(FeatureGroup::we_distortion, static_cast<std::uint32_t>(2 * cfg.k2_partitions));
  if (cfg.features.context_prev)
    add_group(FeatureGroup::context_prev, static_cast<std::uint32_t>(2 * m.prev_region.k_slots));
  if (cfg.features.context_next)
    add_group(FeatureGroup::context_next, static_cast<std::uint32_t>(2 * m.next_region.k_slots));
  if (cfg.features.raw_centroid)
    add_group(FeatureGroup::raw_centroid, static_cast<std::uint32_t>(m.table->dim()));

  std::vector<SparseVector> rows;
  rows.reserve(train.size());
  for (const auto& p : train.posts()) rows.push_back(featurize(p, m));
  m.final_classifier = train_logreg(rows, labels, m.layout.total_dim, lr);
  return m;
}

SparseVector featurize(const Post& post, const WespadModel& model) {
  SparseVector sv;
  sv.dim = model.layout.total_dim;

  auto set_flags = [&](const FeatureLayout::GroupSpan& span, const RegionFlagModel& region,
                       const CentroidVector& v) {
    const auto flags = region_flags(region, v);
    for (std::size_t j = 0; j < flags.size(); ++j)
      if (flags[j]) sv.set(span.offset + static_cast<std::uint32_t>(j), 1.0);
  };

  for (const auto& span : model.layout.groups) {
    switch (span.group) {
      case FeatureGroup::lex: {
        for (const auto& t : post.tokens)
          if (auto idx = model.vocab.lookup(t)) sv.set(span.offset + *idx, 1.0);
        for (std::size_t i = 0; i + 1 < post.tokens.size(); ++i)
          if (auto idx = model.vocab.lookup(bigram_key(post.tokens[i], post.tokens[i + 1])))
            sv.set(span.offset + *idx, 1.0);
        break;
      }
      case FeatureGroup::syn: {
        for (auto idx : subtree_features(post.tree.get(), model.patterns))
          sv.set(span.offset + idx, 1.0);
        break;
      }
      case FeatureGroup::we_partitioning: {
        set_flags(span, model.regular_region, centroid(post.tokens, *model.table));
        break;
      }
      case FeatureGroup::we_distortion: {
        const auto v = model.neighbors
                           ? weighted_centroid(post.tokens, *model.table, model.ig, *model.neighbors)
                           : weighted_centroid(post.tokens, *model.table, model.ig);
        set_flags(span, model.distorted_region, v);
        break;
      }
      case FeatureGroup::context_prev: {
        if (post.prev_text) set_flags(span, model.prev_region, context_vector(*post.prev_text, model));
        break;
      }
      case FeatureGroup::context_next: {
        if (post.next_text) set_flags(span, model.next_region, context_vector(*post.next_text, model));
        break;
      }
      case FeatureGroup::raw_centroid: {
        const auto v = centroid(post.tokens, *model.table);
        if (!v.empty())
          for (std::size_t j = 0; j < v.values.size(); ++j)
            sv.set(span.offset + static_cast<std::uint32_t>(j), v.values[j]);
        break;
      }
    }
  }
  return sv;
}

Prediction predict(const WespadModel& model, const Post& post) {
  const double p = predict_proba(model.final_classifier, featurize(post, model));
  return Prediction{p >= 0.5 ? Label::positive : Label::negative, p};
}

namespace {

json linear_to_json(const LinearModel& m) {
  return json{{"weights", m.weights},
              {"bias", m.bias},
              {"l2", m.l2},
              {"iterations", m.iterations},
              {"final_objective", m.final_objective}};
}

LinearModel linear_from_json(const json& j) {
  LinearModel m;
  m.weights = j.at("weights").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.l2 = j.at("l2").get<double>();
  m.iterations = j.at("iterations").get<int>();
  m.final_objective = j.at("final_objective").get<double>();
  return m;
}

json partition_to_json(const PartitionModel& m) {
  return json{{"k", m.k},
              {"seed", m.seed},
              {"centroids", m.centroids},
              {"wcss", m.wcss},
              {"iterations", m.iterations}};
}

PartitionModel partition_from_json(const json& j) {
  PartitionModel m;
  m.k = j.at("k").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
  m.wcss = j.at("wcss").get<double>();
  m.iterations = j.at("iterations").get<int>();
  return m;
}

json region_to_json(const RegionFlagModel& m) {
  json j{{"alpha", m.alpha},
         {"space", m.space == EmbeddingSpace::distorted ? "distorted" : "regular"},
         {"k_slots", m.k_slots},
         {"fitted", m.fitted}};
  if (m.fitted) {
    j["classifier"] = linear_to_json(m.centroid_classifier);
    j["partitioner"] = partition_to_json(m.partitioner);
  }
  return j;
}

RegionFlagModel region_from_json(const json& j) {
  RegionFlagModel m;
  m.alpha = j.at("alpha").get<double>();
  m.space = j.at("space").get<std::string>() == "distorted" ? EmbeddingSpace::distorted
                                                            : EmbeddingSpace::regular;
  m.k_slots = j.at("k_slots").get<int>();
  m.fitted = j.at("fitted").get<bool>();
  if (m.fitted) {
    m.centroid_classifier = linear_from_json(j.at("classifier"));
    m.partitioner = partition_from_json(j.at("partitioner"));
  }
  return m;
}

json config_to_json_obj(const WespadConfig& c) {
  return json{{"alpha", c.alpha},
              {"alpha2", c.alpha2},
              {"k_partitions", c.k_partitions},
              {"k2_partitions", c.k2_partitions},
              {"l2", c.l2},
              {"lex_feats", c.features.lex_feats},
              {"syn_feats", c.features.syn_feats},
              {"we_partitioning", c.features.we_partitioning},
              {"we_distortion", c.features.we_distortion},
              {"context_prev", c.features.context_prev},
              {"context_next", c.features.context_next},
              {"raw_centroid", c.features.raw_centroid},
              {"min_support", c.min_support},
              {"min_size", c.min_size},
              {"per_class_mining", c.per_class_mining},
              {"context_distorted", c.context_distorted},
              {"seed", c.seed}};
}

WespadConfig config_from_json_obj(const json& j) {
  WespadConfig c;
  if (!j.is_object()) throw InputError("config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "alpha") c.alpha = value.get<double>();
      else if (key == "alpha2") c.alpha2 = value.get<double>();
      else if (key == "k_partitions") c.k_partitions = value.get<int>();
      else if (key == "k2_partitions") c.k2_partitions = value.get<int>();
      else if (key == "l2") c.l2 = value.get<double>();
      else if (key == "lex_feats") c.features.lex_feats = value.get<bool>();
      else if (key == "syn_feats") c.features.syn_feats = value.get<bool>();
      else if (key == "we_partitioning") c.features.we_partitioning = value.get<bool>();
      else if (key == "we_distortion") c.features.we_distortion = value.get<bool>();
      else if (key == "context_prev") c.features.context_prev = value.get<bool>();
      else if (key == "context_next") c.features.context_next = value.get<bool>();
      else if (key == "raw_centroid") c.features.raw_centroid = value.get<bool>();
      else if (key == "min_support") c.min_support = value.get<int>();
      else if (key == "min_size") c.min_size = value.get<int>();
      else if (key == "per_class_mining") c.per_class_mining = value.get<bool>();
      else if (key == "context_distorted") c.context_distorted = value.get<bool>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else throw InputError("config: unknown key \"" + key + "\"");
    } catch (const json::exception& e) {
      throw InputError("config: bad value for \"" + key + "\": " + e.what());
    }
  }
  c.validate();
  return c;
}

constexpr int kBundleVersion = 1;

}  // namespace

std::string config_to_json(const WespadConfig& config) { return config_to_json_obj(config).dump(2); }

WespadConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return config_from_json_obj(j);
}

std::string bundle_to_string(const WespadModel& model) {
  json j;
  j["format"] = "wespad-model";
  j["version"] = kBundleVersion;
  j["config"] = config_to_json_obj(model.config);

  json layout = json::array();
  for (const auto& g : model.layout.groups)
    layout.push_back(json{{"group", feature_group_name(g.group)},
                          {"offset", g.offset},
                          {"size", g.size}});
  j["layout"] = layout;
  j["total_dim"] = model.layout.total_dim;

  j["vocab"] = model.vocab.entries();

  json patterns = json::array();
  for (const auto& p : model.patterns) {
    json nodes = json::array();
    for (const auto& [d, form] : p.nodes) nodes.push_back(json::array({d, form}));
    patterns.push_back(json{{"nodes", nodes}, {"support", p.support}});
  }
  j["patterns"] = patterns;

  j["ig"] = json{{"corpus_entropy", model.ig.corpus_entropy}, {"table", model.ig.table}};

  j["regions"] = json{{"regular", region_to_json(model.regular_region)},
                      {"distorted", region_to_json(model.distorted_region)},
                      {"prev", region_to_json(model.prev_region)},
                      {"next", region_to_json(model.next_region)}};

  j["final_classifier"] = linear_to_json(model.final_classifier);

  j["embedding"] = json{{"dim", model.table ? model.table->dim() : 0},
                        {"digest", hex64(model.table ? model.table->source_digest() : 0)},
                        {"format", model.table ? embedding_format_name(model.table->source())
                                               : "glove-text"}};
  return j.dump(1);
}

void save_bundle(const WespadModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open bundle for writing: " + path);
  out << bundle_to_string(model) << "\n";
  if (!out) throw InputError("failed writing bundle: " + path);
}

WespadModel load_bundle(const std::string& path, std::shared_ptr<const EmbeddingTable> table) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BundleError("cannot open bundle: " + path);
  std::stringstream buf;
  buf << in.rdbuf();

  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::exception& e) {
    throw BundleError(std::string("corrupted bundle: ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", "") != "wespad-model")
      throw BundleError("not a wespad model bundle: " + path);
    if (j.value("version", -1) != kBundleVersion)
      throw BundleError("unsupported bundle version " + std::to_string(j.value("version", -1)) +
                        " (expected " + std::to_string(kBundleVersion) + ")");

    WespadModel m;
    m.config = config_from_json_obj(j.at("config"));

    const auto& emb = j.at("embedding");
    const auto want_dim = emb.at("dim").get<std::size_t>();
    const auto want_digest = emb.at("digest").get<std::string>();
    if (!table) throw InputError("load_bundle: embedding table is required");
    if (table->dim() != want_dim)
      throw InputError("embedding dimension mismatch: bundle built with dim " +
                       std::to_string(want_dim) + ", table has " + std::to_string(table->dim()));
    if (hex64(table->source_digest()) != want_digest)
      throw InputError("embedding file digest mismatch: bundle built with " + want_digest +
                       ", got " + hex64(table->source_digest()));
    m.table = std::move(table);

    for (const auto& w : j.at("vocab").get<std::vector<std::string>>()) m.vocab.add(w);

    std::uint32_t pidx = 0;
    for (const auto& jp : j.at("patterns")) {
      SubtreePattern p;
      for (const auto& n : jp.at("nodes"))
        p.nodes.emplace_back(n.at(0).get<int>(), n.at(1).get<std::string>());
      p.size = static_cast<int>(p.nodes.size());
      p.support = jp.at("support").get<int>();
      p.feature_index = pidx++;
      m.patterns.push_back(std::move(p));
    }

    m.ig.corpus_entropy = j.at("ig").at("corpus_entropy").get<double>();
    m.ig.table = j.at("ig").at("table").get<std::map<std::string, double>>();
    if (!m.ig.table.empty())
      m.neighbors = std::make_shared<NeighborIndex>(*m.table, m.ig.train_vocab());

    m.regular_region = region_from_json(j.at("regions").at("regular"));
    m.distorted_region = region_from_json(j.at("regions").at("distorted"));
    m.prev_region = region_from_json(j.at("regions").at("prev"));
    m.next_region = region_from_json(j.at("regions").at("next"));

    m.final_classifier = linear_from_json(j.at("final_classifier"));

    for (const auto& jg : j.at("layout")) {
      auto g = parse_feature_group(jg.at("group").get<std::string>());
      if (!g) throw BundleError("unknown feature group in bundle layout");
      m.layout.groups.push_back(
          {*g, jg.at("offset").get<std::uint32_t>(), jg.at("size").get<std::uint32_t>()});
    }
    m.layout.total_dim = j.at("total_dim").get<std::uint32_t>();
    if (m.layout.total_dim != m.final_classifier.dim())
      throw BundleError("bundle layout/classifier dimension mismatch");
    return m;
  } catch (const json::exception& e) {
    throw BundleError(std::string("corrupted bundle: ") + e.what());
  }
}

}  // namespace wespad
