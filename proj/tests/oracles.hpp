// Test-only reference implementations, kept independent of the library code
// paths they check.
#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wespad/common.hpp"
#include "wespad/corpus.hpp"
#include "wespad/learners.hpp"
#include "wespad/treebank.hpp"

namespace oracle {

using Encoding = std::vector<std::pair<int, std::string>>;

// All induced ordered subtrees rooted at v, as preorder (depth, form)
// encodings. Children may be dropped (any subsequence), but every kept child
// contributes a whole rooted sub-encoding shifted one level down.
inline std::vector<Encoding> rooted_subtrees(const wespad::DependencyTree& tree, int v) {
  Encoding base{{0, tree.nodes[static_cast<std::size_t>(v)].form}};
  std::vector<Encoding> combos{{}};  // concatenated child encodings so far
  for (int c : tree.children[static_cast<std::size_t>(v)]) {
    const auto subs = rooted_subtrees(tree, c);
    std::vector<Encoding> next = combos;  // skip this child
    for (const auto& combo : combos) {
      for (const auto& sub : subs) {
        Encoding e = combo;
        for (const auto& [d, f] : sub) e.emplace_back(d + 1, f);
        next.push_back(std::move(e));
      }
    }
    combos = std::move(next);
  }
  std::vector<Encoding> out;
  out.reserve(combos.size());
  for (const auto& combo : combos) {
    Encoding e = base;
    e.insert(e.end(), combo.begin(), combo.end());
    out.push_back(std::move(e));
  }
  return out;
}

inline std::set<Encoding> all_subtrees(const wespad::DependencyTree& tree) {
  std::set<Encoding> out;
  for (int v = 0; v < static_cast<int>(tree.size()); ++v)
    for (auto& e : rooted_subtrees(tree, v)) out.insert(std::move(e));
  return out;
}

struct MinedPattern {
  int support = 0;
  std::vector<std::size_t> trees;
};

// Exhaustive miner: enumerate every induced ordered subtree of every tree,
// count document support, filter.
inline std::map<Encoding, MinedPattern> brute_force_mine(
    std::span<const wespad::DependencyTree> trees, int min_support, int min_size) {
  std::map<Encoding, MinedPattern> counts;
  for (std::size_t t = 0; t < trees.size(); ++t) {
    for (const auto& enc : all_subtrees(trees[t])) {
      auto& e = counts[enc];
      ++e.support;
      e.trees.push_back(t);
    }
  }
  std::map<Encoding, MinedPattern> out;
  for (auto& [enc, info] : counts) {
    if (info.support >= min_support && static_cast<int>(enc.size()) >= min_size)
      out.emplace(enc, std::move(info));
  }
  return out;
}

// Random tree over a small alphabet: nodes appear in index order, parents
// drawn over previously attached nodes in a shuffled attach order so head
// links point in both directions.
inline wespad::DependencyTree random_tree(wespad::Rng& rng, int max_nodes,
                                          const std::vector<std::string>& alphabet) {
  const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_nodes)));
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(order);
  std::vector<wespad::DependencyTree::Node> nodes(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    nodes[static_cast<std::size_t>(i)].form =
        alphabet[static_cast<std::size_t>(rng.below(alphabet.size()))];
  nodes[static_cast<std::size_t>(order[0])].head = -1;
  for (int i = 1; i < n; ++i) {
    const int parent = order[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i)))];
    nodes[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])].head = parent;
  }
  return wespad::DependencyTree::build(std::move(nodes), "random_tree");
}

// Plain gradient descent on the same objective, step bounded by the Lipschitz
// constant. Slow but independent of the L-BFGS path.
inline std::pair<std::vector<double>, double> gd_logreg(
    std::span<const wespad::SparseVector> rows, std::span<const int> labels, std::uint32_t dim,
    double l2, int iters = 200000) {
  double lipschitz = l2;
  for (const auto& r : rows) {
    double n2 = 1.0;  // bias column
    for (const auto& [i, v] : r.entries) n2 += v * v;
    lipschitz += 0.25 * n2;
  }
  const double step = 1.0 / lipschitz;
  std::vector<double> w(dim, 0.0), g(dim, 0.0);
  double b = 0.0, gb = 0.0;
  for (int it = 0; it < iters; ++it) {
    wespad::logreg_gradient(rows, labels, w, b, l2, g, gb);
    double gnorm = gb * gb;
    for (double x : g) gnorm += x * x;
    if (gnorm < 1e-18) break;
    for (std::uint32_t j = 0; j < dim; ++j) w[j] -= step * g[j];
    b -= step * gb;
  }
  return {w, b};
}

// Bias-only optimum of n*softplus(b) with l2/2 b^2 on all-negative data,
// solved by bisection on the stationarity condition n*sigmoid(b) + l2*b = 0.
inline double bias_only_optimum_all_negative(std::size_t n, double l2) {
  double lo = -60.0, hi = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double v = static_cast<double>(n) * wespad::sigmoid(mid) + l2 * mid;
    if (v > 0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

inline wespad::Post make_post(std::string id, std::string text, wespad::Label label) {
  wespad::Post p;
  p.id = std::move(id);
  p.text = std::move(text);
  p.tokens = wespad::tokenize(p.text);
  p.label = label;
  return p;
}

// Tree from a parent vector (-1 = root) and per-node labels.
inline wespad::DependencyTree tree_from(const std::vector<int>& parents,
                                        const std::vector<std::string>& labels) {
  std::vector<wespad::DependencyTree::Node> nodes(parents.size());
  for (std::size_t i = 0; i < parents.size(); ++i) {
    nodes[i].form = labels[i];
    nodes[i].head = parents[i];
  }
  return wespad::DependencyTree::build(std::move(nodes), "tree_from");
}

}  // namespace oracle
