#include "factordb/ftree.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "factordb/errors.hpp"

namespace factordb {

bool FTree::reduced() const {
  for (const Node& n : nodes)
    if (n.is_leaf()) return false;
  return true;
}

int FTree::depth(int node) const {
  int d = 0;
  for (int p = nodes[node].parent; p >= 0; p = nodes[p].parent) ++d;
  return d;
}

bool FTree::is_ancestor(int anc, int node) const {
  for (int p = node; p >= 0; p = nodes[p].parent)
    if (p == anc) return true;
  return false;
}

std::vector<int> FTree::class_nodes(int n_classes) const {
  std::vector<int> out(n_classes, -1);
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].cls >= 0 && out[nodes[i].cls] < 0)
      out[nodes[i].cls] = static_cast<int>(i);
  return out;
}

std::vector<int> FTree::symbol_leaves(int n_symbols) const {
  std::vector<int> out(n_symbols, -1);
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].is_leaf() && out[nodes[i].symbol] < 0)
      out[nodes[i].symbol] = static_cast<int>(i);
  return out;
}

NodeSets node_sets(const FTree& t, const Query& q, const AttrClasses& cl,
                   int symbol) {
  std::vector<int> leaves = t.symbol_leaves(q.symbols.size());
  if (leaves[symbol] < 0)
    throw SchemaError("tree has no leaf for symbol '" +
                      q.symbols[symbol].name + "'");
  NodeSets out;
  for (int p = t.nodes[leaves[symbol]].parent; p >= 0; p = t.nodes[p].parent)
    if (t.nodes[p].cls >= 0) out.path.push_back(t.nodes[p].cls);
  std::sort(out.path.begin(), out.path.end());
  for (int c : out.path)
    (cl.owns(c, symbol) ? out.relevant : out.nonrelevant).push_back(c);
  return out;
}

bool is_valid(const FTree& t, const Query& q, const AttrClasses& cl) {
  std::vector<int> class_count(cl.count(), 0);
  std::vector<int> leaf_count(q.symbols.size(), 0);
  for (size_t i = 0; i < t.nodes.size(); ++i) {
    const FTree::Node& n = t.nodes[i];
    if (n.is_leaf()) {
      if (!n.children.empty()) return false;
      ++leaf_count[n.symbol];
    } else {
      if (n.cls < 0 || n.cls >= cl.count()) return false;
      ++class_count[n.cls];
    }
  }
  for (int c : class_count)
    if (c != 1) return false;

  std::vector<int> cnode = t.class_nodes(cl.count());
  bool full = !t.reduced();
  if (full) {
    for (int c : leaf_count)
      if (c != 1) return false;
    std::vector<int> leaves = t.symbol_leaves(q.symbols.size());
    for (size_t s = 0; s < q.symbols.size(); ++s)
      for (int c = 0; c < cl.count(); ++c)
        if (cl.owns(c, static_cast<int>(s)) &&
            !t.is_ancestor(cnode[c], leaves[s]))
          return false;
    return true;
  }

  // Reduced: no symbol may have relevant nodes in sibling subtrees.
  for (size_t s = 0; s < q.symbols.size(); ++s) {
    std::vector<int> rel;
    for (int c = 0; c < cl.count(); ++c)
      if (cl.owns(c, static_cast<int>(s))) rel.push_back(cnode[c]);
    for (size_t i = 0; i < rel.size(); ++i)
      for (size_t j = i + 1; j < rel.size(); ++j)
        if (!t.is_ancestor(rel[i], rel[j]) && !t.is_ancestor(rel[j], rel[i]))
          return false;
  }
  return true;
}

FTree attach_leaves(const FTree& rt, const Query& q, const AttrClasses& cl) {
  FTree t = rt;
  std::vector<int> cnode = t.class_nodes(cl.count());
  for (size_t s = 0; s < q.symbols.size(); ++s) {
    int best = -1, best_depth = -1;
    for (int c = 0; c < cl.count(); ++c) {
      if (!cl.owns(c, static_cast<int>(s))) continue;
      int d = t.depth(cnode[c]);
      if (d > best_depth) {
        best = cnode[c];
        best_depth = d;
      }
    }
    int idx = static_cast<int>(t.nodes.size());
    FTree::Node leaf;
    leaf.symbol = static_cast<int>(s);
    leaf.parent = best;
    t.nodes.push_back(leaf);
    if (best < 0)
      t.roots.push_back(idx);
    else
      t.nodes[best].children.push_back(idx);
  }
  return t;
}

std::vector<uint64_t> relevance_masks(const Query& q, const AttrClasses& cl) {
  std::vector<uint64_t> out;
  for (size_t s = 0; s < q.symbols.size(); ++s) {
    uint64_t m = 0;
    for (int c = 0; c < cl.count(); ++c)
      if (cl.owns(c, static_cast<int>(s))) m |= uint64_t{1} << c;
    out.push_back(m);
  }
  return out;
}

std::vector<uint64_t> class_components(uint64_t S,
                                       const std::vector<uint64_t>& rel_masks) {
  std::vector<int> ids;
  for (int c = 0; c < 64; ++c)
    if ((S >> c) & 1u) ids.push_back(c);
  std::vector<int> parent(ids.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto pos_of = [&](int cls) {
    return static_cast<int>(std::lower_bound(ids.begin(), ids.end(), cls) -
                            ids.begin());
  };
  for (uint64_t m : rel_masks) {
    uint64_t rm = m & S;
    if (rm == 0) continue;
    int first = pos_of(__builtin_ctzll(rm));
    for (int c = 0; c < 64; ++c)
      if ((rm >> c) & 1u) parent[find(pos_of(c))] = find(first);
  }
  std::map<int, uint64_t> groups;
  for (size_t i = 0; i < ids.size(); ++i)
    groups[find(static_cast<int>(i))] |= uint64_t{1} << ids[i];
  std::vector<uint64_t> out;
  for (auto& [_, m] : groups) out.push_back(m);
  std::sort(out.begin(), out.end(), [](uint64_t a, uint64_t b) {
    return __builtin_ctzll(a) < __builtin_ctzll(b);
  });
  return out;
}

namespace {

// a > b: a's owner set strictly contains b's, with the canonical name as
// tie-break on equal owner sets so equal classes still compare.
bool class_greater(const AttrClasses& cl, int a, int b) {
  uint64_t ra = cl.owners[a], rb = cl.owners[b];
  if (ra == rb) return cl.canonical[a] > cl.canonical[b];
  return (ra & rb) == rb;
}

}  // namespace

std::vector<int> maximal_classes(uint64_t S, const AttrClasses& cl) {
  std::vector<int> out;
  for (int a = 0; a < 64; ++a) {
    if (!((S >> a) & 1u)) continue;
    bool dominated = false;
    for (int b = 0; b < 64 && !dominated; ++b)
      if (b != a && ((S >> b) & 1u) && class_greater(cl, b, a))
        dominated = true;
    if (!dominated) out.push_back(a);
  }
  return out;
}

namespace {

class Enumerator {
 public:
  Enumerator(const Query& q, const AttrClasses& cl,
             const std::function<bool(const FTree&)>& fn)
      : cl_(cl), fn_(fn) {
    if (cl.count() > 64)
      throw ResourceLimitError("more than 64 attribute classes");
    rel_mask_ = relevance_masks(q, cl);
    full_ = cl.count() == 64 ? ~uint64_t{0}
                             : (uint64_t{1} << cl.count()) - 1;
  }

  IterStats run_all() {
    forests(full_, -1, [&] { return yield(); });
    return stats_;
  }

  IterStats run_pruned() {
    pruned(full_, -1, [&] { return yield(); });
    return stats_;
  }

 private:
  using Cont = const std::function<bool()>&;

  bool yield() {
    ++stats_.yielded;
    stats_.max_call_gap = std::max(stats_.max_call_gap, gap_);
    gap_ = 0;
    return fn_(builder_);
  }

  void enter() {
    ++stats_.worker_calls;
    ++gap_;
  }

  int place(int cls, int parent) {
    int idx = static_cast<int>(builder_.nodes.size());
    FTree::Node n;
    n.cls = cls;
    n.parent = parent;
    builder_.nodes.push_back(n);
    if (parent < 0)
      builder_.roots.push_back(idx);
    else
      builder_.nodes[parent].children.push_back(idx);
    return idx;
  }

  void unplace(int idx) {
    int parent = builder_.nodes[idx].parent;
    if (parent < 0)
      builder_.roots.pop_back();
    else
      builder_.nodes[parent].children.pop_back();
    builder_.nodes.pop_back();
  }

  // All reduced forests over S, planted under `parent`.
  bool forests(uint64_t S, int parent, Cont k) {
    enter();
    if (S == 0) return k();
    if (!tree_over(S, parent, k)) return false;
    std::vector<uint64_t> comps = class_components(S, rel_mask_);
    if (comps.size() >= 2) {
      std::vector<uint64_t> groups;
      return partitions(comps, 0, groups, parent, k);
    }
    return true;
  }

  // Single trees over S: every class may be the root.
  bool tree_over(uint64_t S, int parent, Cont k) {
    enter();
    for (int c = 0; c < 64; ++c) {
      if (!((S >> c) & 1u)) continue;
      int idx = place(c, parent);
      bool keep = forests(S & ~(uint64_t{1} << c), idx, k);
      unplace(idx);
      if (!keep) return false;
    }
    return true;
  }

  // Unordered partitions of the components into >= 2 groups; each group
  // contributes exactly one tree, so every multi-tree forest arises from the
  // unique partition given by its trees' class sets.
  bool partitions(const std::vector<uint64_t>& comps, size_t idx,
                  std::vector<uint64_t>& groups, int parent, Cont k) {
    enter();
    if (idx == comps.size()) {
      if (groups.size() < 2) return true;
      return chain(groups, 0, parent, k);
    }
    for (size_t g = 0; g <= groups.size(); ++g) {
      if (g == groups.size()) {
        groups.push_back(comps[idx]);
        bool keep = partitions(comps, idx + 1, groups, parent, k);
        groups.pop_back();
        if (!keep) return false;
      } else {
        uint64_t saved = groups[g];
        groups[g] |= comps[idx];
        bool keep = partitions(comps, idx + 1, groups, parent, k);
        groups[g] = saved;
        if (!keep) return false;
      }
    }
    return true;
  }

  bool chain(const std::vector<uint64_t>& groups, size_t i, int parent,
             Cont k) {
    enter();
    if (i == groups.size()) return k();
    return tree_over(groups[i], parent,
                     [&] { return chain(groups, i + 1, parent, k); });
  }

  bool pruned(uint64_t S, int parent, Cont k) {
    enter();
    if (S == 0) return k();
    std::vector<uint64_t> comps = class_components(S, rel_mask_);
    if (comps.size() == 1) {
      for (int c : maximal_classes(S, cl_)) {
        int idx = place(c, parent);
        bool keep = pruned(S & ~(uint64_t{1} << c), idx, k);
        unplace(idx);
        if (!keep) return false;
      }
      return true;
    }
    return pruned_chain(comps, 0, parent, k);
  }

  bool pruned_chain(const std::vector<uint64_t>& comps, size_t i, int parent,
                    Cont k) {
    enter();
    if (i == comps.size()) return k();
    return pruned(comps[i], parent,
                  [&] { return pruned_chain(comps, i + 1, parent, k); });
  }

  const AttrClasses& cl_;
  const std::function<bool(const FTree&)>& fn_;
  std::vector<uint64_t> rel_mask_;
  uint64_t full_ = 0;
  FTree builder_;
  IterStats stats_;
  size_t gap_ = 0;
};

}  // namespace

IterStats for_each_reduced_ftree(const Query& q, const AttrClasses& cl,
                                 const std::function<bool(const FTree&)>& fn) {
  return Enumerator(q, cl, fn).run_all();
}

IterStats for_each_reduced_ftree_pruned(
    const Query& q, const AttrClasses& cl,
    const std::function<bool(const FTree&)>& fn) {
  return Enumerator(q, cl, fn).run_pruned();
}

namespace {

std::string canon_node(const FTree& t, const Query& q, const AttrClasses& cl,
                       int idx) {
  const FTree::Node& n = t.nodes[idx];
  std::string label =
      n.is_leaf() ? "@" + q.symbols[n.symbol].name : cl.canonical[n.cls];
  if (n.children.empty()) return label;
  std::vector<std::string> kids;
  for (int c : n.children) kids.push_back(canon_node(t, q, cl, c));
  std::sort(kids.begin(), kids.end());
  label += '(';
  for (size_t i = 0; i < kids.size(); ++i) {
    if (i) label += ',';
    label += kids[i];
  }
  label += ')';
  return label;
}

}  // namespace

std::string canonical_form(const FTree& t, const Query& q,
                           const AttrClasses& cl) {
  std::vector<std::string> parts;
  for (int r : t.roots) parts.push_back(canon_node(t, q, cl, r));
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ';';
    out += parts[i];
  }
  return out;
}

namespace {

nlohmann::json node_to_json(const FTree& t, const Query& q,
                            const AttrClasses& cl, int idx) {
  const FTree::Node& n = t.nodes[idx];
  nlohmann::json j;
  if (n.is_leaf()) {
    j["leaf"] = q.symbols[n.symbol].name;
    return j;
  }
  nlohmann::json attrs = nlohmann::json::array();
  for (int a : cl.members[n.cls]) attrs.push_back(q.qualified_name(a));
  j["class"] = std::move(attrs);
  nlohmann::json kids = nlohmann::json::array();
  for (int c : n.children) kids.push_back(node_to_json(t, q, cl, c));
  j["children"] = std::move(kids);
  return j;
}

int node_from_json(const nlohmann::json& j, const Query& q,
                   const AttrClasses& cl, FTree& t, int parent) {
  int idx = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  t.nodes[idx].parent = parent;
  if (j.contains("leaf")) {
    int s = q.symbol_index(j.at("leaf").get<std::string>());
    if (s < 0)
      throw SchemaError("plan leaf '" + j.at("leaf").get<std::string>() +
                        "' is not a query symbol");
    t.nodes[idx].symbol = s;
    return idx;
  }
  std::set<std::string> names;
  for (const auto& a : j.at("class")) names.insert(a.get<std::string>());
  int cls = -1;
  for (int c = 0; c < cl.count(); ++c) {
    std::set<std::string> have;
    for (int a : cl.members[c]) have.insert(q.qualified_name(a));
    if (have == names) {
      cls = c;
      break;
    }
  }
  if (cls < 0) {
    std::string got;
    for (const std::string& n : names) got += (got.empty() ? "" : ",") + n;
    throw SchemaError("plan class {" + got +
                      "} does not match any attribute class of the query");
  }
  t.nodes[idx].cls = cls;
  if (j.contains("children"))
    for (const auto& c : j.at("children")) {
      int child = node_from_json(c, q, cl, t, idx);
      t.nodes[idx].children.push_back(child);
    }
  return idx;
}

}  // namespace

nlohmann::json ftree_to_json(const FTree& t, const Query& q,
                             const AttrClasses& cl) {
  nlohmann::json j = nlohmann::json::array();
  for (int r : t.roots) j.push_back(node_to_json(t, q, cl, r));
  return j;
}

FTree ftree_from_json(const nlohmann::json& j, const Query& q,
                      const AttrClasses& cl) {
  if (!j.is_array()) throw SchemaError("plan must be a JSON array of roots");
  FTree t;
  for (const auto& root : j) t.roots.push_back(node_from_json(root, q, cl, t, -1));
  return t;
}

}  // namespace factordb
