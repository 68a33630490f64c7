#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "wespad/eval.hpp"
#include "wespad/fixtures.hpp"

using namespace wespad;

namespace {

std::vector<Label> labels_of(const std::string& s) {
  std::vector<Label> out;
  for (char c : s) out.push_back(c == '+' ? Label::positive : Label::negative);
  return out;
}

}  // namespace

TEST_CASE("positive_class_metrics on the named cases") {
  // tp=5, fp=0, fn=5 -> P=1, R=0.5, F1=2/3
  const Metrics m = positive_class_metrics(labels_of("+++++-----"), labels_of("++++++++++"));
  CHECK(m.tp == 5);
  CHECK(m.fp == 0);
  CHECK(m.fn == 5);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 0.5);
  CHECK(m.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  const Metrics perfect = positive_class_metrics(labels_of("++--"), labels_of("++--"));
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);

  const Metrics none = positive_class_metrics(labels_of("----"), labels_of("++--"));
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);

  CHECK_THROWS_AS(positive_class_metrics(labels_of("+"), labels_of("++")), InputError);
}

TEST_CASE("metrics identity f1 = 2PR/(P+R) holds on random counts") {
  Rng rng(7);
  for (int iter = 0; iter < 100; ++iter) {
    const Metrics m = Metrics::from_counts(rng.below(20), rng.below(20), rng.below(20),
                                           rng.below(20));
    if (m.precision + m.recall > 0)
      CHECK(m.f1 ==
            doctest::Approx(2 * m.precision * m.recall / (m.precision + m.recall)).epsilon(1e-12));
    else
      CHECK(m.f1 == 0.0);
  }
}

TEST_CASE("grid points are sorted with ties preferring smaller alpha then K") {
  GridSpec g;
  g.alphas = {0.3, 0.05, 0.15};
  g.ks = {5, 3, 4};
  const auto pts = g.points();
  REQUIRE(pts.size() == 9);
  CHECK(pts[0].alpha == 0.05);
  CHECK(pts[0].k == 3);
  CHECK(pts[0].alpha2 == 0.05);  // tied
  CHECK(pts[0].k2 == 3);
  CHECK(pts[8].alpha == 0.3);
  CHECK(pts[8].k == 5);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const bool ordered = pts[i - 1].alpha < pts[i].alpha ||
                         (pts[i - 1].alpha == pts[i].alpha && pts[i - 1].k < pts[i].k);
    CHECK(ordered);
  }

  GridSpec untied;
  untied.alphas = {0.1};
  untied.ks = {2};
  untied.tie_alpha = false;
  untied.alpha2s = {0.0, 0.2};
  CHECK(untied.points().size() == 2);

  GridSpec empty;
  empty.alphas = {};
  CHECK_THROWS_AS(empty.points(), InputError);
}

TEST_CASE("cross_validate on the separable fixture reaches near-perfect F1") {
  const Fixture fx = gen_fixture(FixtureKind::separable, 11);
  const WespadConfig cfg = fixture_config(FixtureKind::separable, 11);
  const FoldPlan folds = stratified_folds(fx.corpus, 10, 11);
  const CvReport r =
      cross_validate(fx.corpus, cfg, GridSpec::single(cfg), folds, fx.table, {1.0, 0, 2});
  CHECK(r.mean_f1 >= 0.95);
  CHECK(r.folds.size() == 10);
  CHECK(r.fold_plan_hash == folds.hash());
}

TEST_CASE("cross_validate: degenerate grid equals the explicit one-point grid and repeats") {
  const Fixture fx = gen_fixture(FixtureKind::separable, 13);
  const WespadConfig cfg = fixture_config(FixtureKind::separable, 13);
  const FoldPlan folds = stratified_folds(fx.corpus, 5, 13);

  GridSpec two_same;
  two_same.alphas = {cfg.alpha, cfg.alpha};  // duplicate point
  two_same.ks = {cfg.k_partitions};
  const CvReport a =
      cross_validate(fx.corpus, cfg, GridSpec::single(cfg), folds, fx.table, {1.0, 0, 2});
  const CvReport b = cross_validate(fx.corpus, cfg, two_same, folds, fx.table, {1.0, 0, 2});
  const CvReport c =
      cross_validate(fx.corpus, cfg, GridSpec::single(cfg), folds, fx.table, {1.0, 0, 1});

  CHECK(report_to_tsv(a) == report_to_tsv(c));  // jobs do not affect results
  REQUIRE(a.folds.size() == b.folds.size());
  for (std::size_t i = 0; i < a.folds.size(); ++i) {
    CHECK(a.folds[i].metrics.f1 == b.folds[i].metrics.f1);
    CHECK(a.folds[i].k == b.folds[i].k);
  }
}

TEST_CASE("grid search selects the working alpha on the separable fixture") {
  const Fixture fx = gen_fixture(FixtureKind::separable, 17);
  WespadConfig cfg = fixture_config(FixtureKind::separable, 17);
  const FoldPlan folds = stratified_folds(fx.corpus, 5, 17);
  GridSpec grid;
  grid.alphas = {0.05, 0.3};
  grid.ks = {2};
  const CvReport r = cross_validate(fx.corpus, cfg, grid, folds, fx.table, {1.0, 0, 2});
  for (const auto& f : r.folds) {
    CHECK((f.alpha == 0.05 || f.alpha == 0.3));
    CHECK(f.k == 2);
  }
  CHECK(r.mean_f1 >= 0.9);
}

TEST_CASE("run_baseline: me_lex hits F1=1 when a token determines the label") {
  std::vector<Post> posts;
  Rng rng(19);
  for (int i = 0; i < 40; ++i) {
    const bool positive = i % 4 == 0;
    std::string text = positive ? "marker" : "blah";
    text += rng.unit() < 0.5 ? " one" : " two";
    posts.push_back(oracle::make_post("t" + std::to_string(i), text,
                                      positive ? Label::positive : Label::negative));
  }
  const Corpus c = Corpus::from_posts(std::move(posts));
  auto table = std::make_shared<EmbeddingTable>(2, EmbeddingFormat::glove_text);
  table->insert("one", std::vector<double>{0.1, 0.2});
  const FoldPlan folds = stratified_folds(c, 5, 19);
  const CvReport r = run_baseline(c, BaselineKind::me_lex, folds, table, WespadConfig{}, 2);
  CHECK(r.mean_f1 == 1.0);
  CHECK(r.method == "me_lex");
}

TEST_CASE("baseline me_lex equals a config with every toggle off except lex") {
  const Fixture fx = gen_fixture(FixtureKind::separable, 53);
  const WespadConfig base = fixture_config(FixtureKind::separable, 53);
  const FoldPlan folds = stratified_folds(fx.corpus, 5, 53);

  const CvReport via_baseline = run_baseline(fx.corpus, BaselineKind::me_lex, folds, fx.table,
                                             base, 2);
  WespadConfig lex_only = base;
  lex_only.features = FeatureToggles{true, false, false, false, false, false, false};
  CvReport via_toggles = run_baseline(fx.corpus, BaselineKind::wespad_full, folds, fx.table,
                                      lex_only, 2);
  via_toggles.method = via_baseline.method;
  CHECK(report_to_tsv(via_baseline) == report_to_tsv(via_toggles));
}

TEST_CASE("run_baseline: me_cen separates class-separated centroids") {
  const Fixture fx = gen_fixture(FixtureKind::separable, 23);
  const FoldPlan folds = stratified_folds(fx.corpus, 5, 23);
  const CvReport r = run_baseline(fx.corpus, BaselineKind::me_cen, folds, fx.table,
                                  fixture_config(FixtureKind::separable, 23), 2);
  CHECK(r.mean_f1 >= 0.95);
}

TEST_CASE("me_lex_cen equals the manually configured lex + K=1 alpha=0 run exactly") {
  const Fixture fx = gen_fixture(FixtureKind::separable, 29);
  const WespadConfig base = fixture_config(FixtureKind::separable, 29);
  const FoldPlan folds = stratified_folds(fx.corpus, 5, 29);

  const CvReport via_baseline =
      run_baseline(fx.corpus, BaselineKind::me_lex_cen, folds, fx.table, base, 2);

  WespadConfig manual = base;
  manual.features = FeatureToggles{true, false, true, false, false, false, false};
  manual.alpha = 0.0;
  manual.k_partitions = 1;
  const CvReport via_config = cross_validate(fx.corpus, manual, GridSpec::single(manual), folds,
                                             fx.table, {1.0, 0, 2});

  REQUIRE(via_baseline.folds.size() == via_config.folds.size());
  for (std::size_t f = 0; f < via_baseline.folds.size(); ++f) {
    const auto& pa = via_baseline.folds[f].predictions;
    const auto& pb = via_config.folds[f].predictions;
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
      CHECK(pa[i].id == pb[i].id);
      CHECK(pa[i].predicted == pb[i].predicted);
      CHECK(pa[i].probability == pb[i].probability);  // bitwise
    }
  }
}

TEST_CASE("wespad beats me_lex on the held-out-vocabulary fixture") {
  const Fixture fx = gen_fixture(FixtureKind::heldout_vocab, 7);
  const WespadConfig cfg = fixture_config(FixtureKind::heldout_vocab, 7);
  const FoldPlan folds = stratified_folds(fx.corpus, 10, 7);
  const CvReport lex = run_baseline(fx.corpus, BaselineKind::me_lex, folds, fx.table, cfg, 4);
  const CvReport full =
      run_baseline(fx.corpus, BaselineKind::wespad_full, folds, fx.table, cfg, 4);
  CHECK(full.mean_f1 - lex.mean_f1 >= 0.10);
  const TTestResult t = paired_ttest(full.fold_f1s(), lex.fold_f1s());
  CHECK(t.significant_at_05);
}

TEST_CASE("ablate: removing a disabled group is a zero-delta row") {
  const Fixture fx = gen_fixture(FixtureKind::separable, 31);
  WespadConfig cfg = fixture_config(FixtureKind::separable, 31);  // syn/context off
  const FoldPlan folds = stratified_folds(fx.corpus, 5, 31);
  const auto rows =
      ablate(fx.corpus, folds, fx.table, cfg, {"syn_feats", "we_distortion"}, 2);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].removed == "none");
  CHECK(rows[1].removed == "syn_feats");
  CHECK(rows[1].delta_f1_pct == 0.0);
  CHECK(rows[1].mean_f1 == rows[0].mean_f1);
  const std::string tsv = ablation_to_tsv(rows);
  CHECK(tsv.find("syn_feats") != std::string::npos);
}

TEST_CASE("ablate: dropping both embedding groups falls back to the lex-only level") {
  // Engineered corpus: lexical features carry no generalizable signal (every
  // informative token is unique to its post), embeddings carry it all.
  Rng rng(37);
  auto table = std::make_shared<EmbeddingTable>(4, EmbeddingFormat::glove_text);
  std::vector<std::string> fillers;
  for (int i = 0; i < 10; ++i) {
    fillers.push_back("f" + std::to_string(i));
    table->insert(fillers.back(),
                  std::vector<double>{0.2 * rng.normal(), 0.2 * rng.normal(),
                                      0.2 * rng.normal(), 0.2 * rng.normal()});
  }
  std::vector<Post> posts;
  for (int i = 0; i < 120; ++i) {
    const bool positive = i % 3 == 0;
    const std::string unique = (positive ? "sig" : "bg") + std::to_string(i);
    table->insert(unique, std::vector<double>{positive ? 5.0 : -5.0, 0.3 * rng.normal(),
                                              0.3 * rng.normal(), 0.3 * rng.normal()});
    std::string text = unique;
    for (int w = 0; w < 3; ++w)
      text += " " + fillers[static_cast<std::size_t>(rng.below(fillers.size()))];
    posts.push_back(oracle::make_post("t" + std::to_string(i), text,
                                      positive ? Label::positive : Label::negative));
  }
  const Corpus c = Corpus::from_posts(std::move(posts));
  WespadConfig cfg;
  cfg.alpha = cfg.alpha2 = 0.15;
  cfg.k_partitions = cfg.k2_partitions = 2;
  cfg.features.syn_feats = false;
  cfg.features.context_prev = false;
  cfg.features.context_next = false;
  cfg.seed = 37;
  const FoldPlan folds = stratified_folds(c, 5, 37);

  const CvReport full = cross_validate(c, cfg, GridSpec::single(cfg), folds, table, {1.0, 0, 2});
  const CvReport lex_only =
      run_baseline(c, BaselineKind::me_lex, folds, table, cfg, 2);
  WespadConfig no_emb = cfg;
  no_emb.features.we_partitioning = false;
  no_emb.features.we_distortion = false;
  const CvReport stripped =
      cross_validate(c, no_emb, GridSpec::single(no_emb), folds, table, {1.0, 0, 2});

  CHECK(full.mean_f1 >= lex_only.mean_f1 + 0.3);           // embeddings carry the signal
  CHECK(std::fabs(stripped.mean_f1 - lex_only.mean_f1) <= 0.05);  // nothing left without them
}

TEST_CASE("partition_sweep: deterministic rows, error on K > points") {
  const Fixture fx = gen_fixture(FixtureKind::separable, 41);
  const WespadConfig cfg = fixture_config(FixtureKind::separable, 41);
  const FoldPlan folds = stratified_folds(fx.corpus, 5, 41);
  const auto a = partition_sweep(fx.corpus, folds, fx.table, cfg, {1, 2, 2}, 0.15, 2);
  REQUIRE(a.size() == 2);  // duplicate K collapses
  const auto b = partition_sweep(fx.corpus, folds, fx.table, cfg, {1, 2}, 0.15, 2);
  CHECK(a[0].mean_f1 == b[0].mean_f1);
  CHECK(a[1].mean_f1 == b[1].mean_f1);
  CHECK(sweep_k_to_csv(a).substr(0, 22) == "k,precision,recall,f1\n");

  CHECK_THROWS_AS(partition_sweep(fx.corpus, folds, fx.table, cfg, {100000}, 0.15, 2), FitError);
}

TEST_CASE("partition_sweep on the impure-cluster fixture shows the K trade-off") {
  const Fixture fx = gen_fixture(FixtureKind::impure_cluster, 1);
  const WespadConfig cfg = fixture_config(FixtureKind::impure_cluster, 1);
  const FoldPlan folds = stratified_folds(fx.corpus, 10, 1);
  const auto pts = partition_sweep(fx.corpus, folds, fx.table, cfg, {1, 4}, 0.05, 4);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].k == 1);
  CHECK(pts[1].k == 4);
  CHECK(pts[0].mean_recall >= pts[1].mean_recall);
  CHECK(pts[1].mean_precision >= pts[0].mean_precision);
}

TEST_CASE("positive_fraction_sweep: fraction 1.0 reproduces plain CV") {
  const Fixture fx = gen_fixture(FixtureKind::separable, 43);
  const WespadConfig cfg = fixture_config(FixtureKind::separable, 43);
  const FoldPlan folds = stratified_folds(fx.corpus, 5, 43);
  const auto rows = positive_fraction_sweep(fx.corpus, folds, fx.table, {1.0},
                                            {BaselineKind::me_lex}, cfg, 5, 2);
  REQUIRE(rows.size() == 1);
  const CvReport plain = run_baseline(fx.corpus, BaselineKind::me_lex, folds, fx.table, cfg, 2);
  CHECK(rows[0].mean_f1 == plain.mean_f1);

  const std::string csv = sweep_pos_to_csv(rows);
  CHECK(csv.find("fraction,me_lex_precision,me_lex_recall,me_lex_f1") == 0);
}

TEST_CASE("wespad degrades less than me_lex as the positive fraction drops") {
  const Fixture fx = gen_fixture(FixtureKind::heldout_vocab, 7);
  const WespadConfig cfg = fixture_config(FixtureKind::heldout_vocab, 7);
  const FoldPlan folds = stratified_folds(fx.corpus, 10, 7);
  const auto rows = positive_fraction_sweep(
      fx.corpus, folds, fx.table, {0.2, 1.0},
      {BaselineKind::me_lex, BaselineKind::wespad_full}, cfg, 7, 4);
  double lex_02 = -1, lex_10 = -1, w_02 = -1, w_10 = -1;
  for (const auto& r : rows) {
    if (r.method == "me_lex") (r.fraction == 0.2 ? lex_02 : lex_10) = r.mean_f1;
    if (r.method == "wespad") (r.fraction == 0.2 ? w_02 : w_10) = r.mean_f1;
  }
  REQUIRE(lex_02 >= 0);
  REQUIRE(w_02 >= 0);
  CHECK(w_10 - lex_10 >= 0.10);
  CHECK(w_02 - lex_02 >= w_10 - lex_10);  // the gap widens as positives shrink
}

TEST_CASE("paired t-test basics") {
  const std::vector<double> a{0.9, 0.8, 0.85, 0.95, 0.9};
  const std::vector<double> b{0.5, 0.4, 0.45, 0.55, 0.5};
  const TTestResult r = paired_ttest(a, b);
  CHECK(r.t > 0);
  CHECK(r.p_value < 0.001);
  CHECK(r.significant_at_05);
  CHECK(r.df == 4);

  const TTestResult same = paired_ttest(a, a);
  CHECK(same.p_value == 1.0);
  CHECK_FALSE(same.significant_at_05);

  CHECK_THROWS_AS(paired_ttest(std::vector<double>{1.0}, std::vector<double>{1.0}), InputError);
}

TEST_CASE("reports serialize deterministically") {
  const Fixture fx = gen_fixture(FixtureKind::separable, 47);
  const WespadConfig cfg = fixture_config(FixtureKind::separable, 47);
  const FoldPlan folds = stratified_folds(fx.corpus, 5, 47);
  const CvReport a =
      cross_validate(fx.corpus, cfg, GridSpec::single(cfg), folds, fx.table, {1.0, 0, 2});
  const CvReport b =
      cross_validate(fx.corpus, cfg, GridSpec::single(cfg), folds, fx.table, {1.0, 0, 3});
  CHECK(report_to_json(a) == report_to_json(b));
  CHECK(report_to_tsv(a) == report_to_tsv(b));
  CHECK(report_to_json(a).find("fold_plan_hash") != std::string::npos);
}
