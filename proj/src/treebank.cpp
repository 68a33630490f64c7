#include "wespad/treebank.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace wespad {

DependencyTree DependencyTree::build(std::vector<Node> raw, const std::string& where) {
  DependencyTree t;
  t.nodes = std::move(raw);
  const int n = static_cast<int>(t.nodes.size());
  if (n == 0) throw InputError(where + ": empty dependency tree");
  t.children.assign(static_cast<std::size_t>(n), {});
  for (int i = 0; i < n; ++i) {
    const int h = t.nodes[static_cast<std::size_t>(i)].head;
    if (h == -1) {
      if (t.root != -1) throw InputError(where + ": multiple ROOT-headed nodes");
      t.root = i;
    } else if (h < 0 || h >= n) {
      throw InputError(where + ": head index out of range");
    } else {
      t.children[static_cast<std::size_t>(h)].push_back(i);
    }
  }
  if (t.root == -1) throw InputError(where + ": no ROOT-headed node (head cycle?)");
  // Cycle check: every node must reach the root in at most n steps.
  for (int i = 0; i < n; ++i) {
    int v = i, steps = 0;
    while (v != t.root) {
      v = t.nodes[static_cast<std::size_t>(v)].head;
      if (++steps > n) throw InputError(where + ": cycle detected in head links");
    }
  }
  return t;
}

namespace {

std::string lowercase_ascii(std::string s) {
  for (auto& c : s) {
    const auto uc = static_cast<unsigned char>(c);
    if (uc < 0x80) c = static_cast<char>(std::tolower(uc));
  }
  return s;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> cols;
  std::istringstream ss(line);
  std::string c;
  while (ss >> c) cols.push_back(c);
  return cols;
}

// Whole-string decimal integer, so CoNLL-U extras like "1-2" or "3.1" are
// rejected (and their lines skipped) rather than misparsed.
bool parse_int_strict(const std::string& s, int& out) {
  if (s.empty()) return false;
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
    if (v < 0) return false;
  }
  out = v;
  return true;
}

}  // namespace

std::map<std::string, std::shared_ptr<const DependencyForest>> load_conll(
    const std::string& path, const ConllColumns& columns) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open CoNLL file: " + path);

  std::map<std::string, std::shared_ptr<const DependencyForest>> out;
  std::string current_id;
  bool have_id = false;
  std::vector<DependencyForest> forests;
  std::map<std::string, std::size_t> forest_index;

  std::vector<DependencyTree::Node> block;
  std::size_t block_start_line = 0;

  auto flush_block = [&](std::size_t lineno) {
    if (block.empty()) return;
    if (!have_id)
      throw InputError(path + ":" + std::to_string(block_start_line) +
                       ": dependency block before any \"# id = ...\" line");
    const std::string where = path + ":" + std::to_string(block_start_line) + " (post " +
                              current_id + ")";
    forests[forest_index.at(current_id)].sentences.push_back(
        DependencyTree::build(std::move(block), where));
    block.clear();
    (void)lineno;
  };

  std::string line;
  std::size_t lineno = 0;
  int expected_id = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush_block(lineno);
      expected_id = 1;
      continue;
    }
    if (line[0] == '#') {
      std::string rest = line.substr(1);
      const auto eq = rest.find('=');
      std::string key = eq == std::string::npos ? rest : rest.substr(0, eq);
      key.erase(std::remove_if(key.begin(), key.end(),
                               [](unsigned char c) { return std::isspace(c); }),
                key.end());
      if (key == "id" && eq != std::string::npos) {
        flush_block(lineno);
        expected_id = 1;
        std::string value = rest.substr(eq + 1);
        const auto b = value.find_first_not_of(" \t");
        const auto e = value.find_last_not_of(" \t");
        if (b == std::string::npos)
          throw InputError(path + ":" + std::to_string(lineno) + ": empty post id");
        value = value.substr(b, e - b + 1);
        if (forest_index.count(value))
          throw InputError(path + ":" + std::to_string(lineno) +
                           ": duplicate tree group for post id " + value);
        forest_index[value] = forests.size();
        forests.push_back(DependencyForest{value, {}});
        current_id = value;
        have_id = true;
      }
      continue;
    }
    const auto cols = split_ws(line);
    const auto need = static_cast<std::size_t>(
        std::max({columns.id_col, columns.form_col, columns.head_col}) + 1);
    if (cols.size() < need)
      throw InputError(path + ":" + std::to_string(lineno) + ": expected at least " +
                       std::to_string(need) + " columns");
    int node_id = 0, head = 0;
    if (!parse_int_strict(cols[static_cast<std::size_t>(columns.id_col)], node_id)) {
      continue;  // CoNLL-U multiword/empty-node lines
    }
    if (!parse_int_strict(cols[static_cast<std::size_t>(columns.head_col)], head))
      throw InputError(path + ":" + std::to_string(lineno) + ": non-integer head column");
    if (block.empty()) block_start_line = lineno;
    if (node_id != expected_id)
      throw InputError(path + ":" + std::to_string(lineno) + ": node ids must run 1..n (got " +
                       std::to_string(node_id) + ", expected " + std::to_string(expected_id) +
                       ")");
    ++expected_id;
    DependencyTree::Node node;
    node.form = lowercase_ascii(cols[static_cast<std::size_t>(columns.form_col)]);
    node.head = head - 1;  // 0 (ROOT) -> -1
    block.push_back(std::move(node));
  }
  flush_block(lineno + 1);

  for (auto& f : forests) {
    if (f.sentences.empty()) continue;  // header without blocks: drop
    const std::string id = f.post_id;
    out[id] = std::make_shared<DependencyForest>(std::move(f));
  }
  return out;
}

std::string SubtreePattern::display() const {
  std::string s;
  int prev_depth = -1;
  for (const auto& [depth, form] : nodes) {
    if (depth > prev_depth) {
      if (prev_depth >= 0) s += "(";
    } else {
      for (int d = prev_depth; d > depth; --d) s += ")";
      s += ",";
    }
    s += form;
    prev_depth = depth;
  }
  for (int d = prev_depth; d > 0; --d) s += ")";
  return s;
}

namespace {

// Mining-side view of a data tree.
struct MineTree {
  std::vector<int> label;                  // interned form ids
  std::vector<int> parent;                 // -1 for root
  std::vector<std::vector<int>> children;  // sibling (token) order
  std::vector<int> child_pos;              // index of node within parent's children
};

struct Occurrence {
  std::uint32_t tree;
  int node;  // data node matched to the pattern's rightmost leaf
  bool operator<(const Occurrence& o) const {
    return tree != o.tree ? tree < o.tree : node < o.node;
  }
  bool operator==(const Occurrence& o) const = default;
};

int doc_support(const std::vector<Occurrence>& occs) {
  int s = 0;
  std::uint32_t prev = UINT32_MAX;
  for (const auto& o : occs) {
    if (o.tree != prev) {
      ++s;
      prev = o.tree;
    }
  }
  return s;
}

std::vector<std::size_t> doc_list(const std::vector<Occurrence>& occs) {
  std::vector<std::size_t> docs;
  std::uint32_t prev = UINT32_MAX;
  for (const auto& o : occs) {
    if (o.tree != prev) {
      docs.push_back(o.tree);
      prev = o.tree;
    }
  }
  return docs;
}

struct Miner {
  std::span<const DependencyTree> input;
  std::vector<MineTree> trees;
  std::vector<std::string> forms;                 // intern id -> form
  std::map<std::string, int> form_ids;            // form -> intern id
  int min_support;
  int min_size;
  std::vector<SubtreePattern> result;

  int ancestor(const MineTree& t, int v, int levels) const {
    while (levels-- > 0) v = t.parent[static_cast<std::size_t>(v)];
    return v;
  }

  void emit(const std::vector<std::pair<int, int>>& pattern,
            const std::vector<Occurrence>& occs) {
    SubtreePattern p;
    p.size = static_cast<int>(pattern.size());
    p.support = doc_support(occs);
    p.supporting_trees = doc_list(occs);
    p.nodes.reserve(pattern.size());
    for (const auto& [d, l] : pattern)
      p.nodes.emplace_back(d, forms[static_cast<std::size_t>(l)]);
    result.push_back(std::move(p));
  }

  void grow(std::vector<std::pair<int, int>>& pattern, const std::vector<Occurrence>& occs) {
    if (static_cast<int>(pattern.size()) >= min_size) emit(pattern, occs);

    // Extensions keyed by (new node depth, label id). The pattern's rightmost
    // path node at depth q is matched by the (m-q)-th ancestor of the
    // rightmost-leaf occurrence because embeddings preserve parent-child
    // edges.
    const int m = pattern.back().first;
    std::map<std::pair<int, int>, std::vector<Occurrence>> ext;
    for (const auto& occ : occs) {
      const MineTree& t = trees[occ.tree];
      for (int a = 0; a <= m; ++a) {
        const int u = ancestor(t, occ.node, a);
        std::size_t first_pos = 0;
        if (a > 0) {
          const int prev_child = ancestor(t, occ.node, a - 1);
          first_pos = static_cast<std::size_t>(t.child_pos[static_cast<std::size_t>(prev_child)]) + 1;
        }
        const auto& kids = t.children[static_cast<std::size_t>(u)];
        for (std::size_t ci = first_pos; ci < kids.size(); ++ci) {
          const int c = kids[ci];
          ext[{m - a + 1, t.label[static_cast<std::size_t>(c)]}].push_back({occ.tree, c});
        }
      }
    }
    for (auto& [key, list] : ext) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
      if (doc_support(list) < min_support) continue;
      pattern.push_back(key);
      grow(pattern, list);
      pattern.pop_back();
    }
  }
};

}  // namespace

std::vector<SubtreePattern> mine_frequent_subtrees(std::span<const DependencyTree> trees,
                                                   int min_support, int min_size) {
  if (min_support < 1 || min_size < 1)
    throw InputError("mine_frequent_subtrees: min_support and min_size must be >= 1");

  Miner miner;
  miner.input = trees;
  miner.min_support = min_support;
  miner.min_size = min_size;
  miner.trees.reserve(trees.size());
  for (const auto& dt : trees) {
    MineTree mt;
    const auto n = dt.nodes.size();
    mt.label.resize(n);
    mt.parent.resize(n);
    mt.children = dt.children;
    mt.child_pos.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& form = dt.nodes[i].form;
      auto it = miner.form_ids.find(form);
      if (it == miner.form_ids.end()) {
        it = miner.form_ids.emplace(form, static_cast<int>(miner.forms.size())).first;
        miner.forms.push_back(form);
      }
      mt.label[i] = it->second;
      mt.parent[i] = dt.nodes[i].head;
    }
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t ci = 0; ci < mt.children[p].size(); ++ci)
        mt.child_pos[static_cast<std::size_t>(mt.children[p][ci])] = static_cast<int>(ci);
    miner.trees.push_back(std::move(mt));
  }

  // Single-node seeds, in label order.
  std::map<int, std::vector<Occurrence>> seeds;
  for (std::uint32_t ti = 0; ti < miner.trees.size(); ++ti) {
    const auto& t = miner.trees[ti];
    for (std::size_t v = 0; v < t.label.size(); ++v)
      seeds[t.label[v]].push_back({ti, static_cast<int>(v)});
  }
  // Deterministic order: by form string, not intern id.
  std::vector<int> seed_labels;
  for (const auto& [l, occs] : seeds) seed_labels.push_back(l);
  std::sort(seed_labels.begin(), seed_labels.end(), [&](int a, int b) {
    return miner.forms[static_cast<std::size_t>(a)] < miner.forms[static_cast<std::size_t>(b)];
  });
  for (int l : seed_labels) {
    const auto& occs = seeds.at(l);
    if (doc_support(occs) < min_support) continue;
    std::vector<std::pair<int, int>> pattern{{0, l}};
    miner.grow(pattern, occs);
  }

  std::sort(miner.result.begin(), miner.result.end(),
            [](const SubtreePattern& a, const SubtreePattern& b) {
              if (a.size != b.size) return a.size < b.size;
              return a.nodes < b.nodes;
            });
  for (std::size_t i = 0; i < miner.result.size(); ++i)
    miner.result[i].feature_index = static_cast<std::uint32_t>(i);
  return miner.result;
}

namespace {

// Pattern in tree form for matching.
struct PatternTree {
  std::vector<std::string> label;
  std::vector<std::vector<int>> children;
};

PatternTree pattern_tree(const SubtreePattern& p) {
  PatternTree t;
  t.label.reserve(p.nodes.size());
  t.children.assign(p.nodes.size(), {});
  std::vector<int> stack;  // node index per depth on the current path
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    const auto& [depth, form] = p.nodes[i];
    t.label.push_back(form);
    if (i == 0) {
      if (depth != 0) throw InputError("SubtreePattern: first node must have depth 0");
      stack = {0};
      continue;
    }
    if (depth < 1 || depth > static_cast<int>(stack.size()))
      throw InputError("SubtreePattern: invalid depth sequence");
    stack.resize(static_cast<std::size_t>(depth));
    t.children[static_cast<std::size_t>(stack.back())].push_back(static_cast<int>(i));
    stack.push_back(static_cast<int>(i));
  }
  return t;
}

struct Matcher {
  const DependencyTree* tree;
  const PatternTree* pat;
  std::vector<signed char> memo;  // -1 unknown, 0 no, 1 yes

  bool match(int pu, int dv) {
    auto& m = memo[static_cast<std::size_t>(pu) * tree->size() + static_cast<std::size_t>(dv)];
    if (m != -1) return m == 1;
    bool ok = false;
    if (pat->label[static_cast<std::size_t>(pu)] == tree->nodes[static_cast<std::size_t>(dv)].form) {
      const auto& pc = pat->children[static_cast<std::size_t>(pu)];
      const auto& dc = tree->children[static_cast<std::size_t>(dv)];
      if (pc.empty()) {
        ok = true;
      } else if (pc.size() <= dc.size()) {
        // Order-preserving injective matching of pattern children into data
        // children (gaps allowed): LCS-style DP.
        const std::size_t a = pc.size(), b = dc.size();
        std::vector<char> dp(b + 1, 1);  // dp[j] for i = 0
        for (std::size_t i = 1; i <= a; ++i) {
          std::vector<char> next(b + 1, 0);
          for (std::size_t j = 1; j <= b; ++j) {
            next[j] = next[j - 1] ||
                      (dp[j - 1] && match(pc[i - 1], dc[j - 1]));
          }
          dp.swap(next);
        }
        ok = dp[b] != 0;
      }
    }
    m = ok ? 1 : 0;
    return ok;
  }
};

}  // namespace

bool contains(const DependencyTree& tree, const SubtreePattern& pattern) {
  if (pattern.nodes.empty() || tree.size() == 0) return false;
  const PatternTree pt = pattern_tree(pattern);
  Matcher m{&tree, &pt, {}};
  m.memo.assign(pt.label.size() * tree.size(), -1);
  for (std::size_t dv = 0; dv < tree.size(); ++dv)
    if (m.match(0, static_cast<int>(dv))) return true;
  return false;
}

std::vector<std::uint32_t> subtree_features(const DependencyForest* forest,
                                            std::span<const SubtreePattern> patterns) {
  std::vector<std::uint32_t> out;
  if (!forest || forest->sentences.empty() || patterns.empty()) return out;
  // Cheap prefilter: a pattern can only match a sentence containing all its
  // forms.
  std::vector<std::unordered_set<std::string>> sentence_forms;
  sentence_forms.reserve(forest->sentences.size());
  for (const auto& s : forest->sentences) {
    std::unordered_set<std::string> forms;
    for (const auto& n : s.nodes) forms.insert(n.form);
    sentence_forms.push_back(std::move(forms));
  }
  for (const auto& p : patterns) {
    for (std::size_t si = 0; si < forest->sentences.size(); ++si) {
      bool all = true;
      for (const auto& [d, form] : p.nodes) {
        if (!sentence_forms[si].count(form)) {
          all = false;
          break;
        }
      }
      if (all && contains(forest->sentences[si], p)) {
        out.push_back(p.feature_index);
        break;
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace wespad
