#include "wespad/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

namespace wespad {

using json = nlohmann::json;

Metrics Metrics::from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                    : 0.0;
  return m;
}

Metrics positive_class_metrics(std::span<const Label> predictions, std::span<const Label> gold) {
  if (predictions.size() != gold.size())
    throw InputError("positive_class_metrics: length mismatch");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool p = predictions[i] == Label::positive;
    const bool g = gold[i] == Label::positive;
    if (p && g)
      ++tp;
    else if (p && !g)
      ++fp;
    else if (!p && g)
      ++fn;
    else
      ++tn;
  }
  return Metrics::from_counts(tp, fp, fn, tn);
}

std::vector<double> CvReport::fold_f1s() const {
  std::vector<double> out;
  out.reserve(folds.size());
  for (const auto& f : folds) out.push_back(f.metrics.f1);
  return out;
}

std::vector<GridSpec::Point> GridSpec::points() const {
  if (alphas.empty() || ks.empty()) throw InputError("GridSpec: empty grid");
  std::vector<double> a2 = tie_alpha ? std::vector<double>{} : (alpha2s.empty() ? alphas : alpha2s);
  std::vector<int> kk2 = tie_k ? std::vector<int>{} : (k2s.empty() ? ks : k2s);
  std::vector<Point> pts;
  for (double a : alphas) {
    const std::vector<double> a2s_here = tie_alpha ? std::vector<double>{a} : a2;
    for (int k : ks) {
      const std::vector<int> k2s_here = tie_k ? std::vector<int>{k} : kk2;
      for (double aa2 : a2s_here)
        for (int k2v : k2s_here) pts.push_back({a, aa2, k, k2v});
    }
  }
  std::sort(pts.begin(), pts.end(), [](const Point& x, const Point& y) {
    if (x.alpha != y.alpha) return x.alpha < y.alpha;
    if (x.k != y.k) return x.k < y.k;
    if (x.alpha2 != y.alpha2) return x.alpha2 < y.alpha2;
    return x.k2 < y.k2;
  });
  return pts;
}

GridSpec GridSpec::single(const WespadConfig& config) {
  GridSpec g;
  g.alphas = {config.alpha};
  g.ks = {config.k_partitions};
  g.tie_alpha = false;
  g.tie_k = false;
  g.alpha2s = {config.alpha2};
  g.k2s = {config.k2_partitions};
  return g;
}

namespace {

struct FoldSplit {
  std::vector<std::string> train_ids, val_ids, test_ids;
};

FoldSplit split_fold(const Corpus& corpus, const FoldPlan& folds, int round) {
  FoldSplit s;
  const int val_fold = (round + 1) % folds.k;
  for (const auto& post : corpus.posts()) {
    const auto it = folds.assignment.find(post.id);
    if (it == folds.assignment.end())
      throw InputError("cross_validate: post " + post.id + " missing from the fold plan");
    if (it->second == round)
      s.test_ids.push_back(post.id);
    else if (it->second == val_fold)
      s.val_ids.push_back(post.id);
    else
      s.train_ids.push_back(post.id);
  }
  return s;
}

Metrics evaluate_posts(const WespadModel& model, const Corpus& corpus,
                       const std::vector<std::string>& ids,
                       std::vector<PredictionRow>* rows_out) {
  std::unordered_map<std::string, const Post*> by_id;
  for (const auto& p : corpus.posts()) by_id.emplace(p.id, &p);
  std::vector<Label> preds, gold;
  preds.reserve(ids.size());
  gold.reserve(ids.size());
  for (const auto& id : ids) {
    const Post* p = by_id.at(id);
    const auto pr = predict(model, *p);
    preds.push_back(pr.label);
    gold.push_back(p->label);
    if (rows_out) rows_out->push_back({id, p->label, pr.label, pr.probability});
  }
  return positive_class_metrics(preds, gold);
}

void run_parallel(int jobs, int n, const std::function<void(int)>& work) {
  if (jobs < 1) jobs = 1;
  jobs = std::min(jobs, n);
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(jobs));
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      while (!failed.load()) {
        const int i = next.fetch_add(1);
        if (i >= n) break;
        try {
          work(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true);
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

CvReport cross_validate(const Corpus& corpus, const WespadConfig& config, const GridSpec& grid,
                        const FoldPlan& folds, std::shared_ptr<const EmbeddingTable> table,
                        const CvRunOptions& options) {
  config.validate();
  const auto points = grid.points();
  if (folds.k < 2) throw InputError("cross_validate: fold plan must have k >= 2");

  CvReport report;
  report.fold_plan_hash = folds.hash();
  report.seed = config.seed;
  report.config_json = config_to_json(config);
  report.folds.resize(static_cast<std::size_t>(folds.k));

  run_parallel(options.jobs, folds.k, [&](int round) {
    const FoldSplit split = split_fold(corpus, folds, round);
    Corpus train = subcorpus(corpus, split.train_ids);
    if (options.positive_fraction < 1.0) {
      train = subsample_positives(train, options.positive_fraction,
                                  mix_seed(options.subsample_seed, static_cast<std::uint64_t>(round)));
    }

    // Grid search on the validation fold; candidates are ordered so that
    // ties keep the smaller alpha, then the smaller K.
    std::optional<WespadModel> best_model;
    GridSpec::Point best_point;
    double best_f1 = -1.0;
    for (const auto& pt : points) {
      WespadConfig cfg = config;
      cfg.alpha = pt.alpha;
      cfg.alpha2 = pt.alpha2;
      cfg.k_partitions = pt.k;
      cfg.k2_partitions = pt.k2;
      WespadModel model = fit_wespad(train, cfg, table);
      const double val_f1 =
          points.size() == 1 ? 0.0 : evaluate_posts(model, corpus, split.val_ids, nullptr).f1;
      if (val_f1 > best_f1) {
        best_f1 = val_f1;
        best_point = pt;
        best_model = std::move(model);
      }
    }

    FoldResult result;
    result.fold = round;
    result.alpha = best_point.alpha;
    result.alpha2 = best_point.alpha2;
    result.k = best_point.k;
    result.k2 = best_point.k2;
    result.validation_f1 = std::max(best_f1, 0.0);
    result.metrics = evaluate_posts(*best_model, corpus, split.test_ids, &result.predictions);
    report.folds[static_cast<std::size_t>(round)] = std::move(result);
  });

  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (const auto& f : report.folds) {
    report.mean_precision += f.metrics.precision;
    report.mean_recall += f.metrics.recall;
    report.mean_f1 += f.metrics.f1;
    tp += f.metrics.tp;
    fp += f.metrics.fp;
    fn += f.metrics.fn;
    tn += f.metrics.tn;
  }
  const double inv = 1.0 / static_cast<double>(folds.k);
  report.mean_precision *= inv;
  report.mean_recall *= inv;
  report.mean_f1 *= inv;
  report.pooled = Metrics::from_counts(tp, fp, fn, tn);
  return report;
}

const char* baseline_name(BaselineKind b) {
  switch (b) {
    case BaselineKind::me_lex: return "me_lex";
    case BaselineKind::me_cen: return "me_cen";
    case BaselineKind::me_lex_emb: return "me_lex_emb";
    case BaselineKind::me_lex_cen: return "me_lex_cen";
    case BaselineKind::wespad_full: return "wespad";
  }
  return "?";
}

std::optional<BaselineKind> parse_baseline(const std::string& name) {
  for (BaselineKind b : {BaselineKind::me_lex, BaselineKind::me_cen, BaselineKind::me_lex_emb,
                         BaselineKind::me_lex_cen, BaselineKind::wespad_full}) {
    if (name == baseline_name(b)) return b;
  }
  return std::nullopt;
}

WespadConfig baseline_config(BaselineKind b, const WespadConfig& base) {
  WespadConfig c = base;
  if (b == BaselineKind::wespad_full) return c;  // the configuration as given
  c.features = FeatureToggles{false, false, false, false, false, false, false};
  switch (b) {
    case BaselineKind::me_lex:
      c.features.lex_feats = true;
      break;
    case BaselineKind::me_cen:
      c.features.raw_centroid = true;
      break;
    case BaselineKind::me_lex_emb:
      c.features.lex_feats = true;
      c.features.raw_centroid = true;
      break;
    case BaselineKind::me_lex_cen:
      c.features.lex_feats = true;
      c.features.we_partitioning = true;
      c.alpha = 0.0;
      c.k_partitions = 1;
      break;
    case BaselineKind::wespad_full:
      break;
  }
  return c;
}

CvReport run_baseline(const Corpus& corpus, BaselineKind baseline, const FoldPlan& folds,
                      std::shared_ptr<const EmbeddingTable> table, const WespadConfig& base,
                      int jobs) {
  const WespadConfig cfg = baseline_config(baseline, base);
  CvRunOptions options;
  options.jobs = jobs;
  CvReport report = cross_validate(corpus, cfg, GridSpec::single(cfg), folds, std::move(table),
                                   options);
  report.method = baseline_name(baseline);
  return report;
}

std::vector<AblationRow> ablate(const Corpus& corpus, const FoldPlan& folds,
                                std::shared_ptr<const EmbeddingTable> table,
                                const WespadConfig& config, const std::vector<std::string>& groups,
                                int jobs) {
  CvRunOptions options;
  options.jobs = jobs;
  const CvReport full =
      cross_validate(corpus, config, GridSpec::single(config), folds, table, options);

  std::vector<AblationRow> rows;
  AblationRow full_row;
  full_row.removed = "none";
  full_row.mean_f1 = full.mean_f1;
  full_row.mean_precision = full.mean_precision;
  full_row.mean_recall = full.mean_recall;
  full_row.delta_f1_pct = 0.0;
  full_row.fold_f1s = full.fold_f1s();
  rows.push_back(std::move(full_row));

  for (const auto& name : groups) {
    WespadConfig cfg = config;
    bool known = true;
    bool changed = false;
    if (name == "context") {
      changed = cfg.features.context_prev || cfg.features.context_next;
      cfg.features.context_prev = false;
      cfg.features.context_next = false;
    } else if (auto g = parse_feature_group(name)) {
      auto& f = cfg.features;
      switch (*g) {
        case FeatureGroup::lex: changed = f.lex_feats; f.lex_feats = false; break;
        case FeatureGroup::syn: changed = f.syn_feats; f.syn_feats = false; break;
        case FeatureGroup::we_partitioning:
          changed = f.we_partitioning;
          f.we_partitioning = false;
          break;
        case FeatureGroup::we_distortion:
          changed = f.we_distortion;
          f.we_distortion = false;
          break;
        case FeatureGroup::context_prev: changed = f.context_prev; f.context_prev = false; break;
        case FeatureGroup::context_next: changed = f.context_next; f.context_next = false; break;
        case FeatureGroup::raw_centroid: changed = f.raw_centroid; f.raw_centroid = false; break;
      }
    } else {
      known = false;
    }
    if (!known) throw InputError("ablate: unknown feature group \"" + name + "\"");

    AblationRow row;
    row.removed = name;
    if (!changed) {
      // Group already disabled: removal is a no-op.
      row.mean_f1 = full.mean_f1;
      row.mean_precision = full.mean_precision;
      row.mean_recall = full.mean_recall;
      row.fold_f1s = full.fold_f1s();
    } else {
      const CvReport r = cross_validate(corpus, cfg, GridSpec::single(cfg), folds, table, options);
      row.mean_f1 = r.mean_f1;
      row.mean_precision = r.mean_precision;
      row.mean_recall = r.mean_recall;
      row.fold_f1s = r.fold_f1s();
    }
    row.delta_f1_pct =
        full.mean_f1 > 0 ? 100.0 * (row.mean_f1 - full.mean_f1) / full.mean_f1 : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<PartitionSweepPoint> partition_sweep(const Corpus& corpus, const FoldPlan& folds,
                                                 std::shared_ptr<const EmbeddingTable> table,
                                                 const WespadConfig& config,
                                                 const std::vector<int>& ks, double alpha,
                                                 int jobs) {
  if (ks.empty()) throw InputError("partition_sweep: no K values");
  std::vector<int> sorted_ks = ks;
  std::sort(sorted_ks.begin(), sorted_ks.end());
  sorted_ks.erase(std::unique(sorted_ks.begin(), sorted_ks.end()), sorted_ks.end());

  CvRunOptions options;
  options.jobs = jobs;
  std::vector<PartitionSweepPoint> out;
  for (int k : sorted_ks) {
    WespadConfig cfg = config;
    cfg.alpha = alpha;
    cfg.alpha2 = alpha;
    cfg.k_partitions = k;
    cfg.k2_partitions = k;
    const CvReport r = cross_validate(corpus, cfg, GridSpec::single(cfg), folds, table, options);
    out.push_back({k, r.mean_precision, r.mean_recall, r.mean_f1});
  }
  return out;
}

std::vector<PosFractionPoint> positive_fraction_sweep(
    const Corpus& corpus, const FoldPlan& folds, std::shared_ptr<const EmbeddingTable> table,
    const std::vector<double>& fractions, const std::vector<BaselineKind>& baselines,
    const WespadConfig& base, std::uint64_t subsample_seed, int jobs) {
  if (fractions.empty()) throw InputError("positive_fraction_sweep: no fractions");
  if (baselines.empty()) throw InputError("positive_fraction_sweep: no baselines");
  std::vector<double> fr = fractions;
  std::sort(fr.begin(), fr.end());
  fr.erase(std::unique(fr.begin(), fr.end()), fr.end());

  std::vector<PosFractionPoint> out;
  for (double fraction : fr) {
    if (!(fraction > 0.0) || fraction > 1.0)
      throw InputError("positive_fraction_sweep: fractions must be in (0, 1]");
    for (BaselineKind b : baselines) {
      const WespadConfig cfg = baseline_config(b, base);
      CvRunOptions options;
      options.jobs = jobs;
      options.positive_fraction = fraction;
      options.subsample_seed = subsample_seed;
      const CvReport r =
          cross_validate(corpus, cfg, GridSpec::single(cfg), folds, table, options);
      PosFractionPoint pt;
      pt.fraction = fraction;
      pt.method = baseline_name(b);
      pt.mean_f1 = r.mean_f1;
      pt.mean_precision = r.mean_precision;
      pt.mean_recall = r.mean_recall;
      pt.fold_f1s = r.fold_f1s();
      out.push_back(std::move(pt));
    }
  }
  return out;
}

TTestResult paired_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw InputError("paired_ttest: need n >= 2 pairs");
  const std::size_t n = a.size();
  double mean = 0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double var = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(n - 1);

  TTestResult r;
  r.df = static_cast<int>(n - 1);
  if (var <= 0.0) {
    r.t = mean == 0.0 ? 0.0 : std::numeric_limits<double>::infinity() * (mean > 0 ? 1 : -1);
    r.p_value = mean == 0.0 ? 1.0 : 0.0;
  } else {
    r.t = mean / std::sqrt(var / static_cast<double>(n));
    boost::math::students_t dist(static_cast<double>(r.df));
    r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t)));
  }
  r.significant_at_05 = r.p_value < 0.05;
  return r;
}

namespace {

json metrics_to_json(const Metrics& m) {
  return json{{"tp", m.tp},        {"fp", m.fp},
              {"fn", m.fn},        {"tn", m.tn},
              {"precision", m.precision}, {"recall", m.recall},
              {"f1", m.f1}};
}

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string report_to_json(const CvReport& report) {
  json j;
  j["method"] = report.method;
  j["fold_plan_hash"] = hex64(report.fold_plan_hash);
  j["seed"] = report.seed;
  j["config"] = json::parse(report.config_json);
  j["mean"] = json{{"precision", report.mean_precision},
                   {"recall", report.mean_recall},
                   {"f1", report.mean_f1}};
  j["pooled"] = metrics_to_json(report.pooled);
  json folds = json::array();
  for (const auto& f : report.folds) {
    folds.push_back(json{{"fold", f.fold},
                         {"metrics", metrics_to_json(f.metrics)},
                         {"alpha", f.alpha},
                         {"alpha2", f.alpha2},
                         {"k", f.k},
                         {"k2", f.k2},
                         {"validation_f1", f.validation_f1}});
  }
  j["folds"] = folds;
  return j.dump(1);
}

std::string report_to_tsv(const CvReport& report) {
  std::ostringstream out;
  out << "# method=" << report.method << "\tfold_plan_hash=" << hex64(report.fold_plan_hash)
      << "\tseed=" << report.seed << "\n";
  out << "row\tfold\tprecision\trecall\tf1\ttp\tfp\tfn\ttn\talpha\tk\talpha2\tk2\n";
  for (const auto& f : report.folds) {
    out << "fold\t" << f.fold << "\t" << fmt6(f.metrics.precision) << "\t"
        << fmt6(f.metrics.recall) << "\t" << fmt6(f.metrics.f1) << "\t" << f.metrics.tp << "\t"
        << f.metrics.fp << "\t" << f.metrics.fn << "\t" << f.metrics.tn << "\t"
        << format_double(f.alpha) << "\t" << f.k << "\t" << format_double(f.alpha2) << "\t"
        << f.k2 << "\n";
  }
  out << "mean\t-\t" << fmt6(report.mean_precision) << "\t" << fmt6(report.mean_recall) << "\t"
      << fmt6(report.mean_f1) << "\t-\t-\t-\t-\t-\t-\t-\t-\n";
  out << "pooled\t-\t" << fmt6(report.pooled.precision) << "\t" << fmt6(report.pooled.recall)
      << "\t" << fmt6(report.pooled.f1) << "\t" << report.pooled.tp << "\t" << report.pooled.fp
      << "\t" << report.pooled.fn << "\t" << report.pooled.tn << "\t-\t-\t-\t-\n";
  return out.str();
}

std::string ablation_to_tsv(std::span<const AblationRow> rows) {
  std::ostringstream out;
  out << "removed\tf1\tdelta_f1_pct\tprecision\trecall\n";
  for (const auto& r : rows) {
    out << r.removed << "\t" << fmt6(r.mean_f1) << "\t";
    char d[32];
    std::snprintf(d, sizeof(d), "%+.1f", r.delta_f1_pct);
    out << d << "\t" << fmt6(r.mean_precision) << "\t" << fmt6(r.mean_recall) << "\n";
  }
  return out.str();
}

std::string sweep_k_to_csv(std::span<const PartitionSweepPoint> points) {
  std::ostringstream out;
  out << "k,precision,recall,f1\n";
  for (const auto& p : points)
    out << p.k << "," << fmt6(p.mean_precision) << "," << fmt6(p.mean_recall) << ","
        << fmt6(p.mean_f1) << "\n";
  return out.str();
}

std::string sweep_pos_to_csv(std::span<const PosFractionPoint> points) {
  // One row per fraction, P/R/F1 columns per method (methods in first-seen order).
  std::vector<std::string> methods;
  std::vector<double> fractions;
  for (const auto& p : points) {
    if (std::find(methods.begin(), methods.end(), p.method) == methods.end())
      methods.push_back(p.method);
    if (std::find(fractions.begin(), fractions.end(), p.fraction) == fractions.end())
      fractions.push_back(p.fraction);
  }
  std::sort(fractions.begin(), fractions.end());
  std::ostringstream out;
  out << "fraction";
  for (const auto& m : methods) out << "," << m << "_precision," << m << "_recall," << m << "_f1";
  out << "\n";
  for (double fr : fractions) {
    out << format_double(fr);
    for (const auto& m : methods) {
      const PosFractionPoint* found = nullptr;
      for (const auto& p : points)
        if (p.fraction == fr && p.method == m) {
          found = &p;
          break;
        }
      if (found)
        out << "," << fmt6(found->mean_precision) << "," << fmt6(found->mean_recall) << ","
            << fmt6(found->mean_f1);
      else
        out << ",,,";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace wespad
