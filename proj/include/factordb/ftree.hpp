#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "factordb/query.hpp"

namespace factordb {

// A rooted unordered forest over a query's attribute classes. Inner nodes
// carry a class id, leaf nodes a symbol id. A reduced tree has no symbol
// nodes. Stored as an arena with parent links; `roots` lists the top-level
// nodes.
struct FTree {
  struct Node {
    int cls = -1;     // class id, or -1 for a symbol leaf
    int symbol = -1;  // symbol id, or -1 for an inner node
    int parent = -1;
    std::vector<int> children;

    bool is_leaf() const { return symbol >= 0; }
  };

  std::vector<Node> nodes;
  std::vector<int> roots;

  bool reduced() const;
  int depth(int node) const;
  // Inclusive ancestor test: a node is an ancestor of itself.
  bool is_ancestor(int anc, int node) const;
  // class id -> node index (-1 when the class has no node).
  std::vector<int> class_nodes(int n_classes) const;
  // symbol id -> leaf node index (-1 when absent).
  std::vector<int> symbol_leaves(int n_symbols) const;
};

// The classes on the root path of a symbol's leaf, split into those the
// symbol uses (relevant) and the rest. All vectors hold ascending class ids.
struct NodeSets {
  std::vector<int> path;
  std::vector<int> relevant;
  std::vector<int> nonrelevant;
};

NodeSets node_sets(const FTree& t, const Query& q, const AttrClasses& cl,
                   int symbol);

// Full trees: every class has exactly one node, every symbol exactly one
// leaf, and each symbol's relevant classes all lie on its leaf's root path.
// Reduced trees: every class has exactly one node and no symbol has relevant
// nodes in sibling subtrees.
bool is_valid(const FTree& t, const Query& q, const AttrClasses& cl);

// Hangs each symbol's leaf under its deepest relevant node (at root level
// when the symbol has no relevant class). The input must be reduced & valid.
FTree attach_leaves(const FTree& rt, const Query& q, const AttrClasses& cl);

struct IterStats {
  size_t yielded = 0;
  size_t worker_calls = 0;
  size_t max_call_gap = 0;  // worker calls between consecutive yields
};

// Per-symbol bitmask of the classes it owns, indexed by symbol.
std::vector<uint64_t> relevance_masks(const Query& q, const AttrClasses& cl);

// Connected components of class_set, where two classes are connected when
// some symbol owns both. Returned masks are ordered by lowest class id.
std::vector<uint64_t> class_components(uint64_t class_set,
                                       const std::vector<uint64_t>& rel_masks);

// Classes of class_set not dominated under the root-preference order:
// A beats B when A's owner set strictly contains B's, or the owner sets are
// equal and A's canonical name is lexicographically larger.
std::vector<int> maximal_classes(uint64_t class_set, const AttrClasses& cl);

// Streams every valid reduced tree exactly once. The callback returning false
// stops the enumeration. Forests are built over the classes of q; queries
// with more than 64 classes are rejected.
IterStats for_each_reduced_ftree(const Query& q, const AttrClasses& cl,
                                 const std::function<bool(const FTree&)>& fn);

// Streams the pruned search space: within a connected component only
// >-maximal classes are tried as roots (A > B iff A's owner set strictly
// contains B's, or they are equal and A's canonical name is larger);
// separate components always become separate trees.
IterStats for_each_reduced_ftree_pruned(
    const Query& q, const AttrClasses& cl,
    const std::function<bool(const FTree&)>& fn);

// Order-independent printable form; equal strings iff equal unordered
// forests.
std::string canonical_form(const FTree& t, const Query& q,
                           const AttrClasses& cl);

// JSON form: an array of root nodes, inner nodes as
// {"class": ["Sym.col", ...], "children": [...]}, leaves as
// {"leaf": "Sym"}. from_json accepts reduced or full trees; class attribute
// lists must exactly match the query's classes.
nlohmann::json ftree_to_json(const FTree& t, const Query& q,
                             const AttrClasses& cl);
FTree ftree_from_json(const nlohmann::json& j, const Query& q,
                      const AttrClasses& cl);

}  // namespace factordb
