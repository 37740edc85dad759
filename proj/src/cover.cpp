#include "factordb/cover.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <optional>

#include "factordb/errors.hpp"

namespace factordb {

CoverHypergraph class_set_hypergraph(const Query& q, const AttrClasses& cl,
                                     uint64_t class_set) {
  CoverHypergraph h;
  std::vector<int> pos(cl.count(), -1);
  for (int c = 0; c < cl.count(); ++c)
    if ((class_set >> c) & 1u) {
      pos[c] = static_cast<int>(h.vertices.size());
      h.vertices.push_back(c);
    }
  std::vector<uint64_t> rel = relevance_masks(q, cl);
  for (size_t s = 0; s < q.symbols.size(); ++s) {
    uint64_t m = rel[s] & class_set;
    if (m == 0) continue;
    std::vector<int> edge;
    for (int c = 0; c < cl.count(); ++c)
      if ((m >> c) & 1u) edge.push_back(pos[c]);
    h.edge_symbols.push_back(static_cast<int>(s));
    h.edges.push_back(std::move(edge));
  }
  return h;
}

CoverHypergraph restricted_query(const Query& q, const AttrClasses& cl,
                                 const FTree& t, int symbol) {
  NodeSets ns = node_sets(t, q, cl, symbol);
  uint64_t mask = 0;
  for (int c : ns.nonrelevant) mask |= uint64_t{1} << c;
  return class_set_hypergraph(q, cl, mask);
}

namespace {

// Dense tableau over exact rationals: rows are equality constraints with
// nonnegative right-hand sides, basis columns are kept as identity.
struct Tableau {
  std::vector<std::vector<Rational>> a;
  std::vector<Rational> b;
  std::vector<int> basis;
};

void pivot(Tableau& t, int row, int col) {
  size_t n = t.a[row].size();
  Rational p = t.a[row][col];
  for (size_t j = 0; j < n; ++j) t.a[row][j] = t.a[row][j] / p;
  t.b[row] = t.b[row] / p;
  for (size_t i = 0; i < t.a.size(); ++i) {
    if (static_cast<int>(i) == row) continue;
    Rational f = t.a[i][col];
    if (f == Rational(0)) continue;
    for (size_t j = 0; j < n; ++j)
      t.a[i][j] = t.a[i][j] - f * t.a[row][j];
    t.b[i] = t.b[i] - f * t.b[row];
  }
  t.basis[row] = col;
}

// Minimises c over the tableau with Bland's rule. Columns at enter_limit or
// beyond never enter the basis (used to lock out phase-1 artificials).
Rational optimise(Tableau& t, const std::vector<Rational>& c,
                  int enter_limit) {
  const int m = static_cast<int>(t.b.size());
  for (;;) {
    int enter = -1;
    for (int j = 0; j < enter_limit && enter < 0; ++j) {
      Rational r = c[j];
      for (int i = 0; i < m; ++i)
        if (c[t.basis[i]] != Rational(0))
          r = r - c[t.basis[i]] * t.a[i][j];
      if (r < Rational(0)) enter = j;
    }
    if (enter < 0) break;
    int leave = -1;
    Rational best_ratio(0);
    for (int i = 0; i < m; ++i) {
      if (!(t.a[i][enter] > Rational(0))) continue;
      Rational ratio = t.b[i] / t.a[i][enter];
      if (leave < 0 || ratio < best_ratio ||
          (ratio == best_ratio && t.basis[i] < t.basis[leave])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (leave < 0) throw IntegrityError("cover program is unbounded");
    pivot(t, leave, enter);
  }
  Rational cost(0);
  for (int i = 0; i < m; ++i)
    if (c[t.basis[i]] != Rational(0)) cost = cost + c[t.basis[i]] * t.b[i];
  return cost;
}

}  // namespace

LPSolution rho_star(const CoverHypergraph& h) {
  const int nv = static_cast<int>(h.vertices.size());
  const int ne = static_cast<int>(h.edges.size());
  if (nv == 0) return {Rational(0), std::vector<Rational>(ne, Rational(0))};

  // Columns: x_e | surplus per vertex | artificial per vertex.
  Tableau t;
  t.a.assign(nv, std::vector<Rational>(ne + 2 * nv, Rational(0)));
  t.b.assign(nv, Rational(1));
  t.basis.resize(nv);
  for (int e = 0; e < ne; ++e)
    for (int v : h.edges[e]) t.a[v][e] = Rational(1);
  for (int v = 0; v < nv; ++v) {
    t.a[v][ne + v] = Rational(-1);
    t.a[v][ne + nv + v] = Rational(1);
    t.basis[v] = ne + nv + v;
  }

  std::vector<Rational> c1(ne + 2 * nv, Rational(0));
  for (int v = 0; v < nv; ++v) c1[ne + nv + v] = Rational(1);
  if (optimise(t, c1, ne + nv) != Rational(0))
    throw IntegrityError("cover program is infeasible");
  for (int i = 0; i < nv; ++i) {
    if (t.basis[i] < ne + nv) continue;
    for (int j = 0; j < ne + nv; ++j)
      if (t.a[i][j] != Rational(0)) {
        pivot(t, i, j);
        break;
      }
  }

  std::vector<Rational> c2(ne + 2 * nv, Rational(0));
  for (int e = 0; e < ne; ++e) c2[e] = Rational(1);
  LPSolution out;
  out.cost = optimise(t, c2, ne + nv);
  out.weights.assign(ne, Rational(0));
  for (int i = 0; i < nv; ++i)
    if (t.basis[i] < ne) out.weights[t.basis[i]] = t.b[i];

  for (int e = 0; e < ne; ++e)
    if (out.weights[e] < Rational(0))
      throw IntegrityError("cover solver produced a negative weight");
  for (int v = 0; v < nv; ++v) {
    Rational sum(0);
    for (int e = 0; e < ne; ++e)
      if (std::find(h.edges[e].begin(), h.edges[e].end(), v) !=
          h.edges[e].end())
        sum = sum + out.weights[e];
    if (sum < Rational(1))
      throw IntegrityError("cover solver produced an infeasible cover");
  }
  return out;
}

LPSolution dual_max_independent(const CoverHypergraph& h) {
  const int nv = static_cast<int>(h.vertices.size());
  const int ne = static_cast<int>(h.edges.size());
  if (nv == 0) return {Rational(0), {}};
  if (ne == 0)
    throw IntegrityError("vertex without a covering edge");

  // Columns: y_v | slack per edge; the slack basis is feasible outright.
  Tableau t;
  t.a.assign(ne, std::vector<Rational>(nv + ne, Rational(0)));
  t.b.assign(ne, Rational(1));
  t.basis.resize(ne);
  for (int e = 0; e < ne; ++e) {
    for (int v : h.edges[e]) t.a[e][v] = Rational(1);
    t.a[e][nv + e] = Rational(1);
    t.basis[e] = nv + e;
  }
  std::vector<Rational> c(nv + ne, Rational(0));
  for (int v = 0; v < nv; ++v) c[v] = Rational(-1);

  LPSolution out;
  out.cost = Rational(0) - optimise(t, c, nv + ne);
  out.weights.assign(nv, Rational(0));
  for (int e = 0; e < ne; ++e)
    if (t.basis[e] < nv) out.weights[t.basis[e]] = t.b[e];

  for (int v = 0; v < nv; ++v)
    if (out.weights[v] < Rational(0))
      throw IntegrityError("independent-set solver produced a negative weight");
  for (int e = 0; e < ne; ++e) {
    Rational sum(0);
    for (int v : h.edges[e]) sum = sum + out.weights[v];
    if (sum > Rational(1))
      throw IntegrityError("independent-set solver exceeded an edge budget");
  }
  return out;
}

std::vector<Rational> per_symbol_rho(const Query& q, const AttrClasses& cl,
                                     const FTree& t) {
  FTree attached;
  const FTree* use = &t;
  if (t.reduced()) {
    attached = attach_leaves(t, q, cl);
    use = &attached;
  }
  std::vector<Rational> out;
  for (size_t s = 0; s < q.symbols.size(); ++s)
    out.push_back(
        rho_star(restricted_query(q, cl, *use, static_cast<int>(s))).cost);
  return out;
}

Rational f_of_tree(const Query& q, const AttrClasses& cl, const FTree& t) {
  Rational f(0);
  for (const Rational& r : per_symbol_rho(q, cl, t))
    if (r > f) f = r;
  return f;
}

namespace {

// Depth-first search over the pruned tree space. While a tree is being
// built, each symbol's non-relevant set only grows along the path to its
// deepest placed relevant node, and the cover cost is monotone in that set,
// so the running maximum of the per-symbol costs is a sound lower bound for
// every completion of the current partial tree. Branches whose bound
// strictly exceeds the best complete tree are cut; ties survive, which keeps
// the canonical-form tie-break exact.
class PlanSearch {
 public:
  PlanSearch(const Query& q, const AttrClasses& cl) : q_(q), cl_(cl) {
    if (cl.count() > 64)
      throw ResourceLimitError("more than 64 attribute classes");
    rel_ = relevance_masks(q, cl);
    full_ =
        cl.count() == 64 ? ~uint64_t{0} : (uint64_t{1} << cl.count()) - 1;
    nr_.assign(q_.symbols.size(), 0);
  }

  QueryPlan run() {
    search(full_, -1, [&] { complete(); });
    QueryPlan plan;
    plan.f = best_f_;
    plan.tree = attach_leaves(best_tree_, q_, cl_);
    plan.symbol_rho = per_symbol_rho(q_, cl_, plan.tree);
    plan.trees_considered = considered_;
    return plan;
  }

 private:
  using Cont = const std::function<void()>&;

  void search(uint64_t S, int parent, Cont k) {
    if (S == 0) {
      k();
      return;
    }
    std::vector<uint64_t> comps = class_components(S, rel_);
    if (comps.size() == 1) {
      for (int c : maximal_classes(S, cl_))
        descend(c, S, parent, k);
      return;
    }
    chain(comps, 0, parent, k);
  }

  void chain(const std::vector<uint64_t>& comps, size_t i, int parent,
             Cont k) {
    if (i == comps.size()) {
      k();
      return;
    }
    search(comps[i], parent, [&] { chain(comps, i + 1, parent, k); });
  }

  void descend(int c, uint64_t S, int parent, Cont k) {
    uint64_t path = (parent < 0 ? 0 : path_mask_[parent]) | uint64_t{1} << c;
    Rational saved_lb = lb_;
    std::vector<std::pair<int, uint64_t>> undo;
    for (size_t s = 0; s < rel_.size(); ++s) {
      if (!((rel_[s] >> c) & 1u)) continue;
      undo.emplace_back(static_cast<int>(s), nr_[s]);
      nr_[s] = path & ~rel_[s];
      Rational r = rho_cached(nr_[s]);
      if (r > lb_) lb_ = r;
    }
    if (!have_best_ || !(lb_ > best_f_)) {
      int idx = static_cast<int>(tree_.nodes.size());
      FTree::Node node;
      node.cls = c;
      node.parent = parent;
      tree_.nodes.push_back(node);
      if (parent < 0)
        tree_.roots.push_back(idx);
      else
        tree_.nodes[parent].children.push_back(idx);
      path_mask_.push_back(path);
      search(S & ~(uint64_t{1} << c), idx, k);
      path_mask_.pop_back();
      if (parent < 0)
        tree_.roots.pop_back();
      else
        tree_.nodes[parent].children.pop_back();
      tree_.nodes.pop_back();
    }
    for (auto& [s, old] : undo) nr_[s] = old;
    lb_ = saved_lb;
  }

  void complete() {
    ++considered_;
    if (have_best_ && lb_ > best_f_) return;
    std::string canon = canonical_form(tree_, q_, cl_);
    if (!have_best_ || lb_ < best_f_ ||
        (lb_ == best_f_ && canon < best_canon_)) {
      have_best_ = true;
      best_f_ = lb_;
      best_canon_ = std::move(canon);
      best_tree_ = tree_;
    }
  }

  Rational rho_cached(uint64_t mask) {
    if (mask == 0) return Rational(0);
    auto it = memo_.find(mask);
    if (it != memo_.end()) return it->second;
    std::vector<uint64_t> comps = class_components(mask, rel_);
    Rational total(0);
    if (comps.size() == 1) {
      total = rho_star(class_set_hypergraph(q_, cl_, mask)).cost;
    } else {
      for (uint64_t m : comps) total = total + rho_cached(m);
    }
    memo_.emplace(mask, total);
    return total;
  }

  const Query& q_;
  const AttrClasses& cl_;
  std::vector<uint64_t> rel_;
  uint64_t full_ = 0;
  std::vector<uint64_t> nr_;
  std::vector<uint64_t> path_mask_;
  FTree tree_;
  Rational lb_{0};
  bool have_best_ = false;
  Rational best_f_{0};
  std::string best_canon_;
  FTree best_tree_;
  size_t considered_ = 0;
  std::map<uint64_t, Rational> memo_;
};

}  // namespace

QueryPlan f_of_query(const Query& q, const AttrClasses& cl) {
  return PlanSearch(q, cl).run();
}

}  // namespace factordb
