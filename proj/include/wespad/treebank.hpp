#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wespad/common.hpp"

namespace wespad {

// One dependency-parsed sentence. Nodes are in token order; ROOT is the
// unique node with head == -1. Child order (= token order) is significant.
struct DependencyTree {
  struct Node {
    std::string form;  // lowercased token
    int head = -1;     // node index, or -1 for ROOT
  };
  std::vector<Node> nodes;
  int root = -1;
  std::vector<std::vector<int>> children;  // ascending node index per parent

  static DependencyTree build(std::vector<Node> nodes, const std::string& where);
  std::size_t size() const { return nodes.size(); }
};

struct DependencyForest {
  std::string post_id;
  std::vector<DependencyTree> sentences;
};

struct ConllColumns {
  int id_col = 0;    // 1-based node index
  int form_col = 1;  // surface form
  int head_col = 6;  // head node index, 0 = ROOT
};

// CoNLL-X-style reader. Blank lines separate sentences; a comment line
// "# id = <post_id>" opens the block group of a post. Forms are lowercased.
// Throws InputError on malformed trees (cycles, missing/multiple ROOT).
std::map<std::string, std::shared_ptr<const DependencyForest>> load_conll(
    const std::string& path, const ConllColumns& columns = {});

// Ordered labeled subtree pattern in preorder (depth, form) encoding;
// depth of node i+1 is at most depth of node i plus one.
struct SubtreePattern {
  std::vector<std::pair<int, std::string>> nodes;
  int size = 0;
  int support = 0;
  std::uint32_t feature_index = 0;
  std::vector<std::size_t> supporting_trees;  // indices into the mining input

  std::string display() const;  // e.g. "has(grandpa,alzheimer's)"
};

// Complete set of induced ordered subtree patterns (parent-child edges and
// sibling order preserved, labels equal) with document support >= min_support
// and node count >= min_size. Support counts distinct trees, not occurrences.
// Enumeration is by rightmost extension, so each pattern is visited once;
// feature indices are assigned over the result sorted by (size, encoding).
std::vector<SubtreePattern> mine_frequent_subtrees(std::span<const DependencyTree> trees,
                                                   int min_support = 10, int min_size = 2);

// True iff the pattern embeds into the tree as an induced ordered subtree.
bool contains(const DependencyTree& tree, const SubtreePattern& pattern);

// Feature indices of all patterns contained in any sentence of the forest.
// Null forest -> empty set.
std::vector<std::uint32_t> subtree_features(const DependencyForest* forest,
                                            std::span<const SubtreePattern> patterns);

}  // namespace wespad
