#include "factordb/gen.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "factordb/cover.hpp"
#include "factordb/errors.hpp"

namespace factordb {

SortedDatabase sort_for_tree(const Database& db, const Query& q,
                             const AttrClasses& cl, const FTree& t) {
  std::vector<int> cnode = t.class_nodes(cl.count());
  SortedDatabase out;
  for (size_t s = 0; s < q.symbols.size(); ++s) {
    const Relation& rel = relation_for_symbol(db, q, static_cast<int>(s));
    SortedSymbol sym;
    sym.rows = rel.rows;

    std::vector<std::pair<int, int>> keyed;  // (depth, class id)
    for (int c = 0; c < cl.count(); ++c)
      if (cl.owns(c, static_cast<int>(s)))
        keyed.emplace_back(t.depth(cnode[c]), c);
    std::sort(keyed.begin(), keyed.end());

    for (auto [depth, c] : keyed) {
      (void)depth;
      for (int a : cl.members[c]) {
        if (q.attrs[a].symbol != static_cast<int>(s)) continue;
        int col = rel.column_index(q.attrs[a].column);
        if (col < 0)
          throw SchemaError("relation '" + rel.name + "' has no column '" +
                            q.attrs[a].column + "'");
        sym.key_columns.push_back(col);
        sym.key_classes.push_back(c);
      }
    }

    std::stable_sort(sym.rows.begin(), sym.rows.end(),
                     [&](const Row& x, const Row& y) {
                       for (int col : sym.key_columns) {
                         if (x.tuple[col] < y.tuple[col]) return true;
                         if (y.tuple[col] < x.tuple[col]) return false;
                       }
                       return false;
                     });
    out.symbols.push_back(std::move(sym));
  }
  return out;
}

namespace {

std::vector<Signature> make_signatures(const Query& q) {
  std::set<int> head(q.head.begin(), q.head.end());
  std::vector<Signature> out;
  for (size_t s = 0; s < q.symbols.size(); ++s) {
    Signature sig;
    sig.name = q.symbols[s].name;
    for (int a : q.symbols[s].attrs)
      if (head.count(a)) sig.schema.push_back(q.attrs[a].column);
    out.push_back(std::move(sig));
  }
  return out;
}

// Per symbol: the relation column indexes kept in leaf tuples (head order).
std::vector<std::vector<int>> head_columns(const Query& q,
                                           const Database& db) {
  std::set<int> head(q.head.begin(), q.head.end());
  std::vector<std::vector<int>> out(q.symbols.size());
  for (size_t s = 0; s < q.symbols.size(); ++s) {
    const Relation& rel = relation_for_symbol(db, q, static_cast<int>(s));
    for (int a : q.symbols[s].attrs) {
      if (!head.count(a)) continue;
      int col = rel.column_index(q.attrs[a].column);
      if (col < 0)
        throw SchemaError("relation '" + rel.name + "' has no column '" +
                          q.attrs[a].column + "'");
      out[s].push_back(col);
    }
  }
  return out;
}

Tuple project(const Tuple& t, const std::vector<int>& cols) {
  Tuple out;
  out.reserve(cols.size());
  for (int c : cols) out.push_back(t[c]);
  return out;
}

using Range = std::pair<size_t, size_t>;

class Gen2 {
 public:
  Gen2(const FTree& t, const Query& q, const AttrClasses& cl,
       const Database& db, GenStats* stats)
      : t_(t), q_(q), stats_(stats), sdb_(sort_for_tree(db, q, cl, t)),
        head_cols_(head_columns(q, db)) {
    // Key positions of each class within each owning symbol's key sequence.
    key_pos_.assign(cl.count(), {});
    for (size_t s = 0; s < sdb_.symbols.size(); ++s) {
      const SortedSymbol& sym = sdb_.symbols[s];
      for (size_t k = 0; k < sym.key_classes.size(); ++k)
        key_pos_[sym.key_classes[k]].emplace_back(static_cast<int>(s),
                                                  static_cast<int>(k));
    }
  }

  FRep run() {
    std::vector<Range> ranges;
    for (const SortedSymbol& sym : sdb_.symbols)
      ranges.emplace_back(0, sym.rows.size());
    std::vector<FExpr> parts;
    for (int r : t_.roots) parts.push_back(node(r, ranges));
    FRep rep;
    rep.root = make_prod(std::move(parts));
    rep.signatures = make_signatures(q_);
    return rep;
  }

 private:
  FExpr leaf_sum(int symbol, const Range& range) {
    const SortedSymbol& sym = sdb_.symbols[symbol];
    std::vector<FExpr> terms;
    for (size_t i = range.first; i < range.second; ++i) {
      terms.push_back(make_leaf(sym.rows[i].id,
                                project(sym.rows[i].tuple,
                                        head_cols_[symbol]),
                                symbol));
      if (stats_) ++stats_->leaf_terms;
    }
    return make_sum(std::move(terms));
  }

  // First row in [range) whose column value is not below v.
  size_t lower(int symbol, int col, const Range& range, const Value& v) {
    const auto& rows = sdb_.symbols[symbol].rows;
    size_t lo = range.first, hi = range.second;
    while (lo < hi) {
      size_t mid = (lo + hi) / 2;
      if (rows[mid].tuple[col] < v)
        lo = mid + 1;
      else
        hi = mid;
    }
    if (stats_) ++stats_->merge_steps;
    return lo;
  }

  // First row in [range) whose column value is above v.
  size_t upper(int symbol, int col, const Range& range, const Value& v) {
    const auto& rows = sdb_.symbols[symbol].rows;
    size_t lo = range.first, hi = range.second;
    while (lo < hi) {
      size_t mid = (lo + hi) / 2;
      if (v < rows[mid].tuple[col])
        hi = mid;
      else
        lo = mid + 1;
    }
    if (stats_) ++stats_->merge_steps;
    return lo;
  }

  FExpr node(int idx, const std::vector<Range>& ranges) {
    const FTree::Node& n = t_.nodes[idx];
    if (n.is_leaf()) return leaf_sum(n.symbol, ranges[n.symbol]);

    const auto& occs = key_pos_[n.cls];  // (symbol, key position), sorted
    std::vector<int> owners;
    for (auto [s, k] : occs)
      if (owners.empty() || owners.back() != s) owners.push_back(s);

    std::vector<Range> frontier;  // per owner, remaining range
    for (int s : owners) frontier.push_back(ranges[s]);

    std::vector<FExpr> groups;
    for (;;) {
      bool empty = false;
      for (const Range& r : frontier)
        if (r.first >= r.second) empty = true;
      if (empty) break;

      // Align every owner's first key column on a common value.
      const Value* max_v = nullptr;
      for (size_t i = 0; i < owners.size(); ++i) {
        int col = sdb_.symbols[owners[i]]
                      .key_columns[first_pos(owners[i], n.cls)];
        const Value& v = sdb_.symbols[owners[i]].rows[frontier[i].first]
                             .tuple[col];
        if (!max_v || *max_v < v) max_v = &v;
      }
      Value v = *max_v;
      bool aligned = true;
      for (size_t i = 0; i < owners.size(); ++i) {
        int col = sdb_.symbols[owners[i]]
                      .key_columns[first_pos(owners[i], n.cls)];
        const Value& have =
            sdb_.symbols[owners[i]].rows[frontier[i].first].tuple[col];
        if (have < v) {
          frontier[i].first = lower(owners[i], col, frontier[i], v);
          aligned = false;
        }
      }
      if (!aligned) continue;

      // Blocks of the shared value, narrowed by any further columns the
      // class has in the same symbol (all must equal the value too).
      std::vector<Range> blocks(frontier);
      std::vector<Range> subranges;
      bool viable = true;
      for (size_t i = 0; i < owners.size(); ++i) {
        int s = owners[i];
        Range r = frontier[i];
        r.second = upper(s, sdb_.symbols[s].key_columns[first_pos(s, n.cls)],
                         r, v);
        blocks[i] = r;
        for (size_t k = first_pos(s, n.cls) + 1;
             k < sdb_.symbols[s].key_classes.size() &&
             sdb_.symbols[s].key_classes[k] == n.cls;
             ++k) {
          int col = sdb_.symbols[s].key_columns[k];
          r.first = lower(s, col, r, v);
          r.second = upper(s, col, r, v);
        }
        if (r.first >= r.second) viable = false;
        subranges.push_back(r);
      }

      if (viable) {
        if (stats_) {
          ++stats_->value_groups;
          if (stats_->trace) stats_->events.emplace_back(n.cls, v);
        }
        std::vector<Range> next(ranges);
        for (size_t i = 0; i < owners.size(); ++i)
          next[owners[i]] = subranges[i];
        std::vector<FExpr> parts;
        for (int child : n.children) parts.push_back(node(child, next));
        groups.push_back(make_prod(std::move(parts)));
      }
      for (size_t i = 0; i < owners.size(); ++i)
        frontier[i].first = blocks[i].second;
    }
    return make_sum(std::move(groups));
  }

  size_t first_pos(int symbol, int cls) const {
    const SortedSymbol& sym = sdb_.symbols[symbol];
    for (size_t k = 0; k < sym.key_classes.size(); ++k)
      if (sym.key_classes[k] == cls) return k;
    throw IntegrityError("class has no key column in an owning symbol");
  }

  const FTree& t_;
  const Query& q_;
  GenStats* stats_;
  SortedDatabase sdb_;
  std::vector<std::vector<int>> head_cols_;
  std::vector<std::vector<std::pair<int, int>>> key_pos_;
};

class GenNaive {
 public:
  GenNaive(const FTree& t, const Query& q, const AttrClasses& cl,
           const Database& db)
      : t_(t), q_(q), cl_(cl), db_(db), head_cols_(head_columns(q, db)) {
    domains_.resize(cl.count());
    for (int c = 0; c < cl.count(); ++c) {
      std::set<Value> dom;
      for (int a : cl.members[c]) {
        int s = q.attrs[a].symbol;
        const Relation& rel = relation_for_symbol(db, q, s);
        int col = rel.column_index(q.attrs[a].column);
        if (col < 0)
          throw SchemaError("relation '" + rel.name + "' has no column '" +
                            q.attrs[a].column + "'");
        for (const Row& row : rel.rows) dom.insert(row.tuple[col]);
      }
      domains_[c].assign(dom.begin(), dom.end());
    }
    assigned_.assign(cl.count(), -1);
  }

  FRep run() {
    std::vector<FExpr> parts;
    for (int r : t_.roots) parts.push_back(node(r));
    FRep rep;
    rep.root = make_prod(std::move(parts));
    rep.signatures = make_signatures(q_);
    return rep;
  }

 private:
  FExpr node(int idx) {
    const FTree::Node& n = t_.nodes[idx];
    if (n.is_leaf()) return leaf_sum(n.symbol);
    std::vector<FExpr> groups;
    for (size_t vi = 0; vi < domains_[n.cls].size(); ++vi) {
      assigned_[n.cls] = static_cast<int>(vi);
      std::vector<FExpr> parts;
      for (int child : n.children) parts.push_back(node(child));
      groups.push_back(make_prod(std::move(parts)));
    }
    assigned_[n.cls] = -1;
    return make_sum(std::move(groups));
  }

  FExpr leaf_sum(int symbol) {
    const Relation& rel = relation_for_symbol(db_, q_, symbol);
    std::vector<FExpr> terms;
    for (const Row& row : rel.rows) {
      bool ok = true;
      for (int a : q_.symbols[symbol].attrs) {
        int c = cl_.class_of[a];
        if (c < 0 || assigned_[c] < 0) continue;
        int col = rel.column_index(q_.attrs[a].column);
        const Value& want = domains_[c][assigned_[c]];
        if (!(row.tuple[col] == want)) {
          ok = false;
          break;
        }
      }
      if (ok)
        terms.push_back(make_leaf(row.id,
                                  project(row.tuple, head_cols_[symbol]),
                                  symbol));
    }
    return make_sum(std::move(terms));
  }

  const FTree& t_;
  const Query& q_;
  const AttrClasses& cl_;
  const Database& db_;
  std::vector<std::vector<int>> head_cols_;
  std::vector<std::vector<Value>> domains_;
  std::vector<int> assigned_;
};

}  // namespace

FRep gen2(const FTree& t, const Query& q, const AttrClasses& cl,
          const Database& db, GenStats* stats) {
  FTree full = t.reduced() ? attach_leaves(t, q, cl) : t;
  return Gen2(full, q, cl, db, stats).run();
}

FRep gen_naive(const FTree& t, const Query& q, const AttrClasses& cl,
               const Database& db) {
  FTree full = t.reduced() ? attach_leaves(t, q, cl) : t;
  return GenNaive(full, q, cl, db).run();
}

namespace {

FactoriseResult run_pipeline(const Query& q, const Database& db,
                             const nlohmann::json* tree_json) {
  ConstantSplit split = split_constants(q);
  FactoriseResult out;
  out.split_query = split.q_prime;
  out.classes = attribute_classes(split.q_prime);
  if (!split.satisfiable) {
    out.satisfiable = false;
    out.frep.root = make_sum({});
    out.frep.signatures = make_signatures(q);
    return out;
  }
  Database filtered = apply_constant_filter(db, q, split.filter);
  check_schema(filtered, out.split_query);
  if (tree_json) {
    FTree given = ftree_from_json(*tree_json, out.split_query, out.classes);
    out.tree = given.reduced()
                   ? attach_leaves(given, out.split_query, out.classes)
                   : given;
    if (!is_valid(out.tree, out.split_query, out.classes))
      throw SchemaError("the supplied tree is not valid for this query");
    out.f = f_of_tree(out.split_query, out.classes, out.tree);
  } else {
    QueryPlan plan = f_of_query(out.split_query, out.classes);
    out.tree = plan.tree;
    out.f = plan.f;
  }
  out.frep = gen2(out.tree, out.split_query, out.classes, filtered,
                  &out.stats);
  return out;
}

}  // namespace

FactoriseResult factorise(const Query& q, const Database& db) {
  return run_pipeline(q, db, nullptr);
}

FactoriseResult factorise_with_tree(const Query& q, const Database& db,
                                    const nlohmann::json& tree_json) {
  return run_pipeline(q, db, &tree_json);
}

}  // namespace factordb
