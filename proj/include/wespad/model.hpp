#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wespad/corpus.hpp"
#include "wespad/embeddings.hpp"
#include "wespad/ig.hpp"
#include "wespad/learners.hpp"
#include "wespad/treebank.hpp"

namespace wespad {

enum class EmbeddingSpace { regular, distorted };

// One embedding-space view: a global centroid classifier (the probability of
// the positive class) plus a k-way partition of the space. Emits 2k binary
// features; PFlag_j fires when the classifier is confidently positive and the
// vector falls in partition j, NFlag_j likewise for negative. Inside the
// noisy band (|p - 0.5| < alpha) no flag fires.
struct RegionFlagModel {
  double alpha = 0.0;
  EmbeddingSpace space = EmbeddingSpace::regular;
  int k_slots = 1;      // partition count for the feature layout
  bool fitted = false;  // false when no usable training vectors existed
  LinearModel centroid_classifier;
  PartitionModel partitioner;
};

// Flag slot for probability p in partition j of k: [0,k) = PFlag_j,
// [k,2k) = NFlag_j, -1 = no flag. Both boundaries are inclusive
// (PFlag iff p >= 0.5+alpha, NFlag iff p <= 0.5-alpha); in the single
// overlapping case (alpha = 0, p = 0.5 exactly) PFlag wins, matching the
// positive tie rule of predict().
int flag_slot(double p, double alpha, int partition, int k);

// Fits the classifier and the partitioner on the same vectors. Vectors
// flagged empty are excluded; if none remain the model is returned unfitted
// and emits all-zero flags.
RegionFlagModel fit_region_model(const std::vector<CentroidVector>& vectors,
                                 const std::vector<int>& labels, double alpha, int k,
                                 std::uint64_t seed, EmbeddingSpace space,
                                 const LogregConfig& logreg = {});

// 2k binary features for a post vector (all zero for empty vectors or an
// unfitted model). At most one feature is ever set.
std::vector<std::uint8_t> region_flags(const RegionFlagModel& model, const CentroidVector& v);

struct FeatureToggles {
  bool lex_feats = true;
  bool syn_feats = true;
  bool we_partitioning = true;
  bool we_distortion = true;
  bool context_prev = true;
  bool context_next = true;
  bool raw_centroid = false;  // dense centroid components (ME+cen style baselines)
};

struct WespadConfig {
  double alpha = 0.15;
  double alpha2 = 0.15;
  int k_partitions = 3;
  int k2_partitions = 3;
  double l2 = 1.0;
  FeatureToggles features;
  int min_support = 10;
  int min_size = 2;
  bool per_class_mining = false;   // mine subtrees per class and merge
  bool context_distorted = false;  // context features in the distorted space
  std::uint64_t seed = 0;

  void validate() const;  // throws InputError
};

enum class FeatureGroup {
  lex,
  syn,
  we_partitioning,
  we_distortion,
  context_prev,
  context_next,
  raw_centroid,
};
const char* feature_group_name(FeatureGroup g);
std::optional<FeatureGroup> parse_feature_group(const std::string& name);

// Disjoint index ranges per enabled feature group, in a fixed order.
struct FeatureLayout {
  struct GroupSpan {
    FeatureGroup group;
    std::uint32_t offset = 0;
    std::uint32_t size = 0;
  };
  std::vector<GroupSpan> groups;
  std::uint32_t total_dim = 0;

  const GroupSpan* find(FeatureGroup g) const;
};

// Everything fitted on one training split, plus the embedding table the
// features are computed against. Immutable once fitted; featurize/predict
// are pure and safe to call concurrently.
struct WespadModel {
  WespadConfig config;
  NgramVocab vocab;
  std::vector<SubtreePattern> patterns;
  IGWeights ig;
  RegionFlagModel regular_region;
  RegionFlagModel distorted_region;
  RegionFlagModel prev_region;
  RegionFlagModel next_region;
  LinearModel final_classifier;
  FeatureLayout layout;
  std::shared_ptr<const EmbeddingTable> table;
  std::shared_ptr<const NeighborIndex> neighbors;  // train vocab present in table
};

// Fits, in order: n-gram vocabulary, subtree patterns (posts without trees
// are skipped), IG weights, the regular-space region model (alpha, K) on
// post centroids, the distorted-space model (alpha2, K2) on IG-weighted
// centroids, prev/next context models on context-text centroids labeled with
// the anchor post's label, and the final classifier over the assembled
// vectors. Disabled groups are omitted from the layout entirely.
WespadModel fit_wespad(const Corpus& train, const WespadConfig& config,
                       std::shared_ptr<const EmbeddingTable> table);

SparseVector featurize(const Post& post, const WespadModel& model);

struct Prediction {
  Label label = Label::negative;
  double probability = 0.0;
};

// probability >= 0.5 predicts positive (boundary inclusive).
Prediction predict(const WespadModel& model, const Post& post);

// Versioned JSON bundle with every fitted component and the embedding-file
// digest; the table itself is not embedded (pass the same table when
// loading). Serialization is lossless for doubles and byte-stable.
void save_bundle(const WespadModel& model, const std::string& path);
std::string bundle_to_string(const WespadModel& model);
WespadModel load_bundle(const std::string& path, std::shared_ptr<const EmbeddingTable> table);

// Flat JSON used both for config files and inside bundles/manifests.
std::string config_to_json(const WespadConfig& config);
WespadConfig config_from_json(const std::string& text);  // throws InputError

}  // namespace wespad
