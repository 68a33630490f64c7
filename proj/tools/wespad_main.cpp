#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wespad/eval.hpp"
#include "wespad/fixtures.hpp"
#include "wespad/manifest.hpp"
#include "wespad/model.hpp"

using namespace wespad;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct CommonIo {
  std::string posts_path;
  std::string posts_format = "jsonl";
  std::string embeddings_path;
  std::string embeddings_format = "glove-text";
  bool restrict_vocab = false;
  std::string trees_path;
  ConllColumns conll;
  std::string config_path;
  int folds = 10;
  std::optional<std::uint64_t> fold_seed;
  int jobs = static_cast<int>(std::thread::hardware_concurrency());

  // config overrides
  std::optional<double> alpha, alpha2, l2;
  std::optional<int> k, k2, min_support, min_size;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> features;  // comma list replacing the toggle set
  bool per_class_mining = false;
  bool context_distorted = false;
};

void add_config_options(CLI::App* cmd, CommonIo& io) {
  cmd->add_option("--config", io.config_path, "JSON config file (flags override its values)");
  cmd->add_option("--alpha", io.alpha, "noisy-region threshold, regular space");
  cmd->add_option("--alpha2", io.alpha2, "noisy-region threshold, distorted space");
  cmd->add_option("--k", io.k, "partition count, regular space");
  cmd->add_option("--k2", io.k2, "partition count, distorted space");
  cmd->add_option("--l2", io.l2, "L2 strength for all logistic regressions");
  cmd->add_option("--min-support", io.min_support, "subtree mining minimum document support");
  cmd->add_option("--min-size", io.min_size, "subtree mining minimum node count");
  cmd->add_option("--seed", io.seed, "master seed");
  cmd->add_option("--features", io.features,
                  "comma list of enabled feature groups (lex_feats,syn_feats,we_partitioning,"
                  "we_distortion,context_prev,context_next,raw_centroid)");
  cmd->add_flag("--per-class-mining", io.per_class_mining,
                "mine subtrees per class and merge the pattern sets");
  cmd->add_flag("--context-distorted", io.context_distorted,
                "context features use the distorted space");
}

void add_posts_options(CLI::App* cmd, CommonIo& io, bool required = true) {
  auto* opt = cmd->add_option("--posts", io.posts_path, "labeled posts file");
  if (required) opt->required();
  cmd->add_option("--format", io.posts_format, "posts format: jsonl or tsv")
      ->check(CLI::IsMember({"jsonl", "tsv"}));
}

void add_embedding_options(CLI::App* cmd, CommonIo& io) {
  const char* env = std::getenv("WESPAD_EMBEDDINGS");
  if (env) io.embeddings_path = env;
  auto* opt = cmd->add_option("--embeddings", io.embeddings_path,
                              "pretrained embeddings file (env WESPAD_EMBEDDINGS)");
  if (!env) opt->required();
  cmd->add_option("--embeddings-format", io.embeddings_format,
                  "word2vec-binary, word2vec-text, or glove-text");
  cmd->add_flag("--restrict-vocab", io.restrict_vocab,
                "load only words occurring in the posts (saves memory)");
}

void add_tree_options(CLI::App* cmd, CommonIo& io) {
  cmd->add_option("--trees", io.trees_path, "CoNLL dependency trees keyed by \"# id = ...\"");
  cmd->add_option("--conll-id-col", io.conll.id_col, "node-id column (default 0)");
  cmd->add_option("--conll-form-col", io.conll.form_col, "form column (default 1)");
  cmd->add_option("--conll-head-col", io.conll.head_col, "head column (default 6)");
}

void add_cv_options(CLI::App* cmd, CommonIo& io) {
  cmd->add_option("--folds", io.folds, "fold count")->check(CLI::PositiveNumber);
  cmd->add_option("--fold-seed", io.fold_seed, "fold assignment seed (default: --seed)");
  cmd->add_option("--jobs", io.jobs, "max concurrent fold evaluations");
}

std::vector<double> parse_double_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw InputError(std::string(what) + ": bad number \"" + item + "\"");
    }
  }
  if (out.empty()) throw InputError(std::string(what) + ": empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
  std::vector<int> out;
  for (double v : parse_double_list(s, what)) out.push_back(static_cast<int>(v));
  return out;
}

std::vector<std::string> parse_string_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

WespadConfig build_config(const CommonIo& io) {
  WespadConfig cfg;
  if (!io.config_path.empty()) {
    std::ifstream in(io.config_path);
    if (!in) throw InputError("cannot open config file: " + io.config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    cfg = config_from_json(buf.str());
  }
  if (io.alpha) cfg.alpha = *io.alpha;
  if (io.alpha2) cfg.alpha2 = *io.alpha2;
  if (io.k) cfg.k_partitions = *io.k;
  if (io.k2) cfg.k2_partitions = *io.k2;
  if (io.l2) cfg.l2 = *io.l2;
  if (io.min_support) cfg.min_support = *io.min_support;
  if (io.min_size) cfg.min_size = *io.min_size;
  if (io.seed) cfg.seed = *io.seed;
  if (io.per_class_mining) cfg.per_class_mining = true;
  if (io.context_distorted) cfg.context_distorted = true;
  if (io.features) {
    FeatureToggles t{false, false, false, false, false, false, false};
    for (const auto& name : parse_string_list(*io.features)) {
      const auto g = parse_feature_group(name);
      if (!g) throw InputError("--features: unknown group \"" + name + "\"");
      switch (*g) {
        case FeatureGroup::lex: t.lex_feats = true; break;
        case FeatureGroup::syn: t.syn_feats = true; break;
        case FeatureGroup::we_partitioning: t.we_partitioning = true; break;
        case FeatureGroup::we_distortion: t.we_distortion = true; break;
        case FeatureGroup::context_prev: t.context_prev = true; break;
        case FeatureGroup::context_next: t.context_next = true; break;
        case FeatureGroup::raw_centroid: t.raw_centroid = true; break;
      }
    }
    cfg.features = t;
  }
  cfg.validate();
  return cfg;
}

std::set<std::string> corpus_token_set(const Corpus& corpus) {
  std::set<std::string> words;
  for (const auto& p : corpus.posts()) {
    for (const auto& t : p.tokens) words.insert(t);
    for (const auto& ctx : {p.prev_text, p.next_text}) {
      if (!ctx) continue;
      for (const auto& t : tokenize(*ctx)) words.insert(t);
    }
  }
  return words;
}

struct LoadedInputs {
  Corpus corpus;
  std::shared_ptr<const EmbeddingTable> table;
  AttachStats tree_stats;
};

LoadedInputs load_inputs(const CommonIo& io, RunManifest& manifest) {
  LoadedInputs in;
  const auto fmt = io.posts_format == "tsv" ? PostsFormat::tsv : PostsFormat::jsonl;
  in.corpus = load_posts(io.posts_path, fmt);
  manifest.add_input("posts", io.posts_path);

  if (!io.trees_path.empty()) {
    const auto forests = load_conll(io.trees_path, io.conll);
    in.corpus = attach_trees(in.corpus, forests, &in.tree_stats);
    manifest.add_input("trees", io.trees_path);
    if (in.tree_stats.dropped_forests > 0)
      std::cerr << "warning: " << in.tree_stats.dropped_forests
                << " tree group(s) matched no post id\n";
  }

  const auto efmt = parse_embedding_format(io.embeddings_format);
  if (io.restrict_vocab) {
    const auto words = corpus_token_set(in.corpus);
    in.table = std::make_shared<EmbeddingTable>(load_embeddings(io.embeddings_path, efmt, &words));
  } else {
    in.table = std::make_shared<EmbeddingTable>(load_embeddings(io.embeddings_path, efmt));
  }
  manifest.add_input("embeddings", io.embeddings_path);
  return in;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open output file: " + path);
  out << content;
  if (!out) throw InputError("failed writing output file: " + path);
}

void finish_manifest(RunManifest& manifest, Clock::time_point start, const std::string& path) {
  manifest.timing_ms =
      std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  manifest.write(path);
}

std::string predictions_tsv(const CvReport& report) {
  std::ostringstream out;
  out << "fold\tid\tgold\tpredicted\tprobability\n";
  for (const auto& f : report.folds)
    for (const auto& p : f.predictions)
      out << f.fold << "\t" << p.id << "\t" << label_name(p.gold) << "\t"
          << label_name(p.predicted) << "\t" << format_double(p.probability) << "\n";
  return out.str();
}

int cmd_train(const CommonIo& io, const std::string& out_path) {
  const auto start = Clock::now();
  RunManifest manifest;
  manifest.command = "train";
  const WespadConfig cfg = build_config(io);
  manifest.seed = cfg.seed;
  manifest.config_json = config_to_json(cfg);

  const LoadedInputs in = load_inputs(io, manifest);
  const WespadModel model = fit_wespad(in.corpus, cfg, in.table);
  save_bundle(model, out_path);
  manifest.outputs = {out_path};
  finish_manifest(manifest, start, out_path + ".manifest.json");
  std::cerr << "wrote " << out_path << " (dim " << model.layout.total_dim << ")\n";
  return 0;
}

int cmd_predict(const CommonIo& io, const std::string& bundle_path, const std::string& out_path) {
  const auto start = Clock::now();
  RunManifest manifest;
  manifest.command = "predict";

  const auto fmt = io.posts_format == "tsv" ? PostsFormat::tsv : PostsFormat::jsonl;
  Corpus corpus = load_posts(io.posts_path, fmt);
  manifest.add_input("posts", io.posts_path);
  if (!io.trees_path.empty()) {
    corpus = attach_trees(corpus, load_conll(io.trees_path, io.conll));
    manifest.add_input("trees", io.trees_path);
  }
  const auto efmt = parse_embedding_format(io.embeddings_format);
  auto table = std::make_shared<EmbeddingTable>(load_embeddings(io.embeddings_path, efmt));
  manifest.add_input("embeddings", io.embeddings_path);
  manifest.add_input("bundle", bundle_path);

  const WespadModel model = load_bundle(bundle_path, table);
  manifest.seed = model.config.seed;
  manifest.config_json = config_to_json(model.config);

  std::ostringstream lines;
  for (const auto& p : corpus.posts()) {
    const Prediction pred = predict(model, p);
    lines << R"({"id": )" << nlohmann::json(p.id).dump() << R"(, "label": ")"
          << label_name(pred.label) << R"(", "probability": )" << format_double(pred.probability)
          << "}\n";
  }
  if (out_path == "-") {
    std::cout << lines.str();
  } else {
    write_text(out_path, lines.str());
    manifest.outputs = {out_path};
    finish_manifest(manifest, start, out_path + ".manifest.json");
  }
  return 0;
}

FoldPlan make_folds(const CommonIo& io, const Corpus& corpus, const WespadConfig& cfg) {
  return stratified_folds(corpus, io.folds, io.fold_seed.value_or(cfg.seed));
}

int cmd_cv(const CommonIo& io, const std::string& baseline, const std::string& out_dir,
           bool dump_predictions) {
  const auto start = Clock::now();
  RunManifest manifest;
  manifest.command = "cv";
  const WespadConfig base = build_config(io);
  manifest.seed = base.seed;

  const LoadedInputs in = load_inputs(io, manifest);
  const FoldPlan folds = make_folds(io, in.corpus, base);
  manifest.fold_plan_hash = hex64(folds.hash());

  const auto kind = parse_baseline(baseline);
  if (!kind) throw InputError("unknown --baseline: " + baseline);
  const WespadConfig cfg = baseline_config(*kind, base);
  manifest.config_json = config_to_json(cfg);

  CvRunOptions options;
  options.jobs = io.jobs;
  CvReport report =
      cross_validate(in.corpus, cfg, GridSpec::single(cfg), folds, in.table, options);
  report.method = baseline_name(*kind);

  fs::create_directories(out_dir);
  const std::string tsv_path = (fs::path(out_dir) / "cv_report.tsv").string();
  const std::string json_path = (fs::path(out_dir) / "cv_report.json").string();
  write_text(tsv_path, report_to_tsv(report));
  write_text(json_path, report_to_json(report));
  manifest.outputs = {tsv_path, json_path};
  if (dump_predictions) {
    const std::string pred_path = (fs::path(out_dir) / "cv_predictions.tsv").string();
    write_text(pred_path, predictions_tsv(report));
    manifest.outputs.push_back(pred_path);
  }
  finish_manifest(manifest, start, (fs::path(out_dir) / "cv.manifest.json").string());
  std::cout << report_to_tsv(report);
  return 0;
}

int cmd_grid(const CommonIo& io, const std::string& alphas, const std::string& ks, bool no_tie,
             const std::string& out_dir) {
  const auto start = Clock::now();
  RunManifest manifest;
  manifest.command = "grid";
  const WespadConfig cfg = build_config(io);
  manifest.seed = cfg.seed;
  manifest.config_json = config_to_json(cfg);

  const LoadedInputs in = load_inputs(io, manifest);
  const FoldPlan folds = make_folds(io, in.corpus, cfg);
  manifest.fold_plan_hash = hex64(folds.hash());

  GridSpec grid;
  grid.alphas = parse_double_list(alphas, "--alphas");
  grid.ks = parse_int_list(ks, "--ks");
  grid.tie_alpha = !no_tie;
  grid.tie_k = !no_tie;

  CvRunOptions options;
  options.jobs = io.jobs;
  const CvReport report = cross_validate(in.corpus, cfg, grid, folds, in.table, options);

  fs::create_directories(out_dir);
  const std::string tsv_path = (fs::path(out_dir) / "grid_report.tsv").string();
  const std::string json_path = (fs::path(out_dir) / "grid_report.json").string();
  write_text(tsv_path, report_to_tsv(report));
  write_text(json_path, report_to_json(report));
  manifest.outputs = {tsv_path, json_path};
  finish_manifest(manifest, start, (fs::path(out_dir) / "grid.manifest.json").string());
  std::cout << report_to_tsv(report);
  return 0;
}

int cmd_ablate(const CommonIo& io, const std::string& groups, const std::string& out_dir) {
  const auto start = Clock::now();
  RunManifest manifest;
  manifest.command = "ablate";
  const WespadConfig cfg = build_config(io);
  manifest.seed = cfg.seed;
  manifest.config_json = config_to_json(cfg);

  const LoadedInputs in = load_inputs(io, manifest);
  const FoldPlan folds = make_folds(io, in.corpus, cfg);
  manifest.fold_plan_hash = hex64(folds.hash());

  const auto rows = ablate(in.corpus, folds, in.table, cfg, parse_string_list(groups), io.jobs);

  fs::create_directories(out_dir);
  const std::string path = (fs::path(out_dir) / "ablation.tsv").string();
  write_text(path, "# fold_plan_hash=" + hex64(folds.hash()) + "\n" + ablation_to_tsv(rows));
  manifest.outputs = {path};
  finish_manifest(manifest, start, (fs::path(out_dir) / "ablate.manifest.json").string());
  std::cout << ablation_to_tsv(rows);
  return 0;
}

int cmd_sweep_k(const CommonIo& io, const std::string& ks, double alpha,
                const std::string& out_dir) {
  const auto start = Clock::now();
  RunManifest manifest;
  manifest.command = "sweep-k";
  const WespadConfig cfg = build_config(io);
  manifest.seed = cfg.seed;
  manifest.config_json = config_to_json(cfg);

  const LoadedInputs in = load_inputs(io, manifest);
  const FoldPlan folds = make_folds(io, in.corpus, cfg);
  manifest.fold_plan_hash = hex64(folds.hash());

  const auto rows =
      partition_sweep(in.corpus, folds, in.table, cfg, parse_int_list(ks, "--ks"), alpha, io.jobs);

  fs::create_directories(out_dir);
  const std::string path = (fs::path(out_dir) / "sweep_k.csv").string();
  write_text(path, "# fold_plan_hash=" + hex64(folds.hash()) + "\n" + sweep_k_to_csv(rows));
  manifest.outputs = {path};
  finish_manifest(manifest, start, (fs::path(out_dir) / "sweep_k.manifest.json").string());
  std::cout << sweep_k_to_csv(rows);
  return 0;
}

int cmd_sweep_pos(const CommonIo& io, const std::string& fractions, const std::string& baselines,
                  const std::string& out_dir) {
  const auto start = Clock::now();
  RunManifest manifest;
  manifest.command = "sweep-pos";
  const WespadConfig cfg = build_config(io);
  manifest.seed = cfg.seed;
  manifest.config_json = config_to_json(cfg);

  const LoadedInputs in = load_inputs(io, manifest);
  const FoldPlan folds = make_folds(io, in.corpus, cfg);
  manifest.fold_plan_hash = hex64(folds.hash());

  std::vector<BaselineKind> kinds;
  for (const auto& name : parse_string_list(baselines)) {
    const auto k = parse_baseline(name);
    if (!k) throw InputError("unknown baseline in --baselines: " + name);
    kinds.push_back(*k);
  }
  const auto rows = positive_fraction_sweep(in.corpus, folds, in.table,
                                            parse_double_list(fractions, "--fractions"), kinds,
                                            cfg, cfg.seed, io.jobs);

  fs::create_directories(out_dir);
  const std::string path = (fs::path(out_dir) / "sweep_pos.csv").string();
  write_text(path, "# fold_plan_hash=" + hex64(folds.hash()) + "\n" + sweep_pos_to_csv(rows));
  manifest.outputs = {path};
  finish_manifest(manifest, start, (fs::path(out_dir) / "sweep_pos.manifest.json").string());
  std::cout << sweep_pos_to_csv(rows);
  return 0;
}

int cmd_mine(const CommonIo& io, int min_support, int min_size, const std::string& out_path) {
  const auto start = Clock::now();
  RunManifest manifest;
  manifest.command = "mine";

  const auto forests = load_conll(io.trees_path, io.conll);
  manifest.add_input("trees", io.trees_path);
  std::vector<DependencyTree> trees;
  for (const auto& [id, forest] : forests)
    for (const auto& s : forest->sentences) trees.push_back(s);

  const auto patterns = mine_frequent_subtrees(trees, min_support, min_size);
  std::ostringstream out;
  out << "pattern\tsize\tsupport\n";
  for (const auto& p : patterns)
    out << p.display() << "\t" << p.size << "\t" << p.support << "\n";

  if (out_path == "-") {
    std::cout << out.str();
  } else {
    write_text(out_path, out.str());
    manifest.outputs = {out_path};
    finish_manifest(manifest, start, out_path + ".manifest.json");
  }
  std::cerr << "mined " << patterns.size() << " pattern(s) from " << trees.size()
            << " tree(s)\n";
  return 0;
}

int cmd_gen_fixture(const std::string& kind_name, std::uint64_t seed,
                    const std::string& out_dir) {
  const auto start = Clock::now();
  const auto kind = parse_fixture_kind(kind_name);
  if (!kind) throw InputError("unknown --kind: " + kind_name);

  const Fixture fx = gen_fixture(*kind, seed);
  write_fixture(fx, out_dir);
  write_text((fs::path(out_dir) / "config.json").string(),
             config_to_json(fixture_config(*kind, seed)) + "\n");

  RunManifest manifest;
  manifest.command = "gen-fixture";
  manifest.seed = seed;
  manifest.outputs = {(fs::path(out_dir) / "posts.jsonl").string(),
                      (fs::path(out_dir) / "embeddings.txt").string(),
                      (fs::path(out_dir) / "config.json").string()};
  if (!fx.forests.empty())
    manifest.outputs.push_back((fs::path(out_dir) / "trees.conll").string());
  finish_manifest(manifest, start, (fs::path(out_dir) / "gen_fixture.manifest.json").string());
  std::cerr << "wrote fixture \"" << kind_name << "\" (" << fx.corpus.size() << " posts, "
            << fx.table->size() << " words) under " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WESPAD personal-health-mention classifier"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  CommonIo io;

  auto* train = app.add_subcommand("train", "fit a model and write a bundle");
  std::string train_out = "model.wespad.json";
  add_posts_options(train, io);
  add_embedding_options(train, io);
  add_tree_options(train, io);
  add_config_options(train, io);
  train->add_option("--out", train_out, "bundle output path");

  auto* predict = app.add_subcommand("predict", "label posts with a trained bundle");
  std::string bundle_path, predict_out = "-";
  add_posts_options(predict, io);
  add_embedding_options(predict, io);
  add_tree_options(predict, io);
  predict->add_option("--bundle", bundle_path, "model bundle")->required();
  predict->add_option("--out", predict_out, "output JSONL path (default stdout)");

  auto* cv = app.add_subcommand("cv", "fixed-hyperparameter cross-validation");
  std::string cv_baseline = "wespad", cv_out = ".";
  bool cv_dump_predictions = false;
  add_posts_options(cv, io);
  add_embedding_options(cv, io);
  add_tree_options(cv, io);
  add_config_options(cv, io);
  add_cv_options(cv, io);
  cv->add_option("--baseline", cv_baseline, "me_lex, me_cen, me_lex_emb, me_lex_cen, or wespad");
  cv->add_option("--out-dir", cv_out, "report directory");
  cv->add_flag("--dump-predictions", cv_dump_predictions, "also write per-post predictions");

  auto* grid = app.add_subcommand("grid", "grid-search cross-validation");
  std::string grid_alphas = "0.05,0.15,0.3", grid_ks = "3,4,5", grid_out = ".";
  bool grid_no_tie = false;
  add_posts_options(grid, io);
  add_embedding_options(grid, io);
  add_tree_options(grid, io);
  add_config_options(grid, io);
  add_cv_options(grid, io);
  grid->add_option("--alphas", grid_alphas, "alpha grid (comma list)");
  grid->add_option("--ks", grid_ks, "K grid (comma list)");
  grid->add_flag("--no-tie", grid_no_tie, "search alpha2/K2 independently of alpha/K");
  grid->add_option("--out-dir", grid_out, "report directory");

  auto* ab = app.add_subcommand("ablate", "single-group feature ablation");
  std::string ab_groups =
      "we_distortion,we_partitioning,context_next,syn_feats,context_prev,context,lex_feats";
  std::string ab_out = ".";
  add_posts_options(ab, io);
  add_embedding_options(ab, io);
  add_tree_options(ab, io);
  add_config_options(ab, io);
  add_cv_options(ab, io);
  ab->add_option("--groups", ab_groups, "feature groups to remove one at a time");
  ab->add_option("--out-dir", ab_out, "report directory");

  auto* sk = app.add_subcommand("sweep-k", "partition-count sweep (K tied to K2)");
  std::string sk_ks = "1,2,3,4,5", sk_out = ".";
  double sk_alpha = 0.15;
  add_posts_options(sk, io);
  add_embedding_options(sk, io);
  add_tree_options(sk, io);
  add_config_options(sk, io);
  add_cv_options(sk, io);
  sk->add_option("--sweep-ks", sk_ks, "K values (comma list)");
  sk->add_option("--sweep-alpha", sk_alpha, "fixed alpha (= alpha2) for the sweep");
  sk->add_option("--out-dir", sk_out, "report directory");

  auto* sp = app.add_subcommand("sweep-pos", "positive-fraction sweep");
  std::string sp_fractions = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0";
  std::string sp_baselines = "me_lex,wespad", sp_out = ".";
  add_posts_options(sp, io);
  add_embedding_options(sp, io);
  add_tree_options(sp, io);
  add_config_options(sp, io);
  add_cv_options(sp, io);
  sp->add_option("--fractions", sp_fractions, "positive fractions (comma list)");
  sp->add_option("--baselines", sp_baselines, "methods to sweep (comma list)");
  sp->add_option("--out-dir", sp_out, "report directory");

  auto* mine = app.add_subcommand("mine", "mine frequent dependency subtrees");
  int mine_support = 10, mine_size = 2;
  std::string mine_out = "-";
  mine->add_option("--trees", io.trees_path, "CoNLL dependency trees")->required();
  mine->add_option("--conll-id-col", io.conll.id_col, "node-id column (default 0)");
  mine->add_option("--conll-form-col", io.conll.form_col, "form column (default 1)");
  mine->add_option("--conll-head-col", io.conll.head_col, "head column (default 6)");
  mine->add_option("--min-support", mine_support, "minimum document support");
  mine->add_option("--min-size", mine_size, "minimum pattern node count");
  mine->add_option("--out", mine_out, "output TSV (default stdout)");

  auto* gen = app.add_subcommand("gen-fixture", "write a seeded synthetic corpus");
  std::string gen_kind = "heldout-vocab", gen_out = "fixture";
  std::uint64_t gen_seed = 7;
  gen->add_option("--kind", gen_kind, "heldout-vocab, impure-cluster, or separable");
  gen->add_option("--seed", gen_seed, "fixture seed");
  gen->add_option("--out-dir", gen_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints the message / help text
    return code == 0 ? 0 : 2;     // every parse failure is an input error
  }

  try {
    if (train->parsed()) return cmd_train(io, train_out);
    if (predict->parsed()) return cmd_predict(io, bundle_path, predict_out);
    if (cv->parsed()) return cmd_cv(io, cv_baseline, cv_out, cv_dump_predictions);
    if (grid->parsed()) return cmd_grid(io, grid_alphas, grid_ks, grid_no_tie, grid_out);
    if (ab->parsed()) return cmd_ablate(io, ab_groups, ab_out);
    if (sk->parsed()) return cmd_sweep_k(io, sk_ks, sk_alpha, sk_out);
    if (sp->parsed()) return cmd_sweep_pos(io, sp_fractions, sp_baselines, sp_out);
    if (mine->parsed()) return cmd_mine(io, mine_support, mine_size, mine_out);
    if (gen->parsed()) return cmd_gen_fixture(gen_kind, gen_seed, gen_out);
  } catch (const BundleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const FitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
