#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wespad/corpus.hpp"
#include "wespad/model.hpp"

namespace wespad {

// Positive-class confusion counts and derived ratios. All 0/0 ratios are
// defined as 0.
struct Metrics {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;

  static Metrics from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);
};

Metrics positive_class_metrics(std::span<const Label> predictions, std::span<const Label> gold);

struct PredictionRow {
  std::string id;
  Label gold = Label::negative;
  Label predicted = Label::negative;
  double probability = 0.0;
};

struct FoldResult {
  int fold = 0;
  Metrics metrics;
  double alpha = 0.0, alpha2 = 0.0;  // chosen hyperparameters
  int k = 0, k2 = 0;
  double validation_f1 = 0.0;
  std::vector<PredictionRow> predictions;  // test fold, corpus order
};

struct CvReport {
  std::string method = "wespad";
  std::vector<FoldResult> folds;
  // Arithmetic means of the per-fold metrics (the primary numbers).
  double mean_precision = 0.0, mean_recall = 0.0, mean_f1 = 0.0;
  // Metrics over pooled counts, reported separately and never mixed in.
  Metrics pooled;
  std::uint64_t fold_plan_hash = 0;
  std::uint64_t seed = 0;
  std::string config_json;

  std::vector<double> fold_f1s() const;
};

// Hyperparameter grid. With tie_alpha/tie_k set (the default, as in the
// tuning protocol) alpha2 follows alpha and K2 follows K; otherwise the
// cross-product over alpha2s/k2s (defaulting to alphas/ks) is searched.
struct GridSpec {
  std::vector<double> alphas{0.05, 0.15, 0.3};
  std::vector<int> ks{3, 4, 5};
  bool tie_alpha = true;
  bool tie_k = true;
  std::vector<double> alpha2s;  // when !tie_alpha; empty = alphas
  std::vector<int> k2s;         // when !tie_k; empty = ks

  struct Point {
    double alpha = 0.0, alpha2 = 0.0;
    int k = 1, k2 = 1;
  };
  // Sorted by (alpha, k, alpha2, k2); throws InputError when empty.
  std::vector<Point> points() const;

  // Degenerate grid holding exactly the configuration's hyperparameters.
  static GridSpec single(const WespadConfig& config);
};

struct CvRunOptions {
  double positive_fraction = 1.0;     // applied to training folds only
  std::uint64_t subsample_seed = 0;   // mixed with the fold index
  int jobs = 1;                       // concurrent fold evaluations
};

// Rotating-fold protocol: round r tests on fold r, validates on fold
// (r+1) mod k, and trains on the remaining k-2 folds. The grid point with
// the best validation positive-class F1 is chosen per round (ties prefer
// smaller alpha, then smaller K); the fitted training-folds model is then
// evaluated on the test fold. Deterministic for fixed inputs and seeds,
// independent of jobs.
CvReport cross_validate(const Corpus& corpus, const WespadConfig& config, const GridSpec& grid,
                        const FoldPlan& folds, std::shared_ptr<const EmbeddingTable> table,
                        const CvRunOptions& options = {});

enum class BaselineKind { me_lex, me_cen, me_lex_emb, me_lex_cen, wespad_full };
const char* baseline_name(BaselineKind b);
std::optional<BaselineKind> parse_baseline(const std::string& name);

// Feature-layout configuration of each baseline:
//   me_lex      unigrams/bigrams only
//   me_cen      raw centroid components only
//   me_lex_emb  unigrams/bigrams + raw centroid components
//   me_lex_cen  unigrams/bigrams + unpartitioned (K=1) flags at alpha=0
//   wespad_full every WESPAD group on, raw centroids off
WespadConfig baseline_config(BaselineKind b, const WespadConfig& base);

// Cross-validation of a baseline at the base configuration's fixed
// hyperparameters (degenerate grid).
CvReport run_baseline(const Corpus& corpus, BaselineKind baseline, const FoldPlan& folds,
                      std::shared_ptr<const EmbeddingTable> table, const WespadConfig& base = {},
                      int jobs = 1);

struct AblationRow {
  std::string removed;  // feature-group name, "context", or "none" (full model)
  double mean_f1 = 0.0, mean_precision = 0.0, mean_recall = 0.0;
  double delta_f1_pct = 0.0;  // percent change vs the full model
  std::vector<double> fold_f1s;
};

// One CV run per single-group removal on identical folds and seeds. "context"
// removes context_prev and context_next together. Groups disabled in the
// configuration produce a zero-delta row without refitting.
std::vector<AblationRow> ablate(const Corpus& corpus, const FoldPlan& folds,
                                std::shared_ptr<const EmbeddingTable> table,
                                const WespadConfig& config, const std::vector<std::string>& groups,
                                int jobs = 1);

struct PartitionSweepPoint {
  int k = 0;
  double mean_precision = 0.0, mean_recall = 0.0, mean_f1 = 0.0;
};

// One CV run per K with K2 tied to K and alpha = alpha2 fixed.
std::vector<PartitionSweepPoint> partition_sweep(const Corpus& corpus, const FoldPlan& folds,
                                                 std::shared_ptr<const EmbeddingTable> table,
                                                 const WespadConfig& config,
                                                 const std::vector<int>& ks, double alpha,
                                                 int jobs = 1);

struct PosFractionPoint {
  double fraction = 1.0;
  std::string method;
  double mean_f1 = 0.0, mean_precision = 0.0, mean_recall = 0.0;
  std::vector<double> fold_f1s;
};

// Training folds are subsampled to each positive fraction (test folds are
// untouched); the fold plan and subsample seeds are shared across baselines.
std::vector<PosFractionPoint> positive_fraction_sweep(
    const Corpus& corpus, const FoldPlan& folds, std::shared_ptr<const EmbeddingTable> table,
    const std::vector<double>& fractions, const std::vector<BaselineKind>& baselines,
    const WespadConfig& base, std::uint64_t subsample_seed, int jobs = 1);

struct TTestResult {
  double t = 0.0;
  double p_value = 1.0;
  int df = 0;
  bool significant_at_05 = false;
};

// Two-sided paired t-test over per-fold scores.
TTestResult paired_ttest(std::span<const double> a, std::span<const double> b);

// Report serialization (byte-stable for fixed inputs).
std::string report_to_json(const CvReport& report);
std::string report_to_tsv(const CvReport& report);
std::string ablation_to_tsv(std::span<const AblationRow> rows);
std::string sweep_k_to_csv(std::span<const PartitionSweepPoint> points);
std::string sweep_pos_to_csv(std::span<const PosFractionPoint> points);

}  // namespace wespad
