#include "factordb/bounds.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <utility>

#include "factordb/cover.hpp"
#include "factordb/errors.hpp"

namespace factordb {

namespace {

struct ColumnEq {
  int sa, ca, sb, cb;
};

struct ColumnConst {
  int s, c;
  Value v;
};

// Conditions grouped by the first nesting level at which both sides are
// bound. The join stays a plain nested loop; hoisting only skips branches
// every extension of which the innermost check would reject anyway.
struct JoinPlan {
  std::vector<const Relation*> rels;
  std::vector<std::vector<ColumnEq>> eqs;
  std::vector<std::vector<ColumnConst>> consts;
};

JoinPlan plan_join(const Query& q, const Database& db) {
  check_schema(db, q);
  size_t n = q.symbols.size();
  JoinPlan plan;
  plan.rels.resize(n);
  plan.eqs.resize(n);
  plan.consts.resize(n);
  for (size_t i = 0; i < n; ++i)
    plan.rels[i] = &relation_for_symbol(db, q, static_cast<int>(i));
  for (const auto& [a, b] : q.equalities) {
    const Attr& aa = q.attrs[a];
    const Attr& ab = q.attrs[b];
    ColumnEq e{aa.symbol, plan.rels[aa.symbol]->column_index(aa.column),
               ab.symbol, plan.rels[ab.symbol]->column_index(ab.column)};
    plan.eqs[std::max(aa.symbol, ab.symbol)].push_back(e);
  }
  for (const auto& [a, v] : q.constant_eqs) {
    const Attr& aa = q.attrs[a];
    plan.consts[aa.symbol].push_back(
        {aa.symbol, plan.rels[aa.symbol]->column_index(aa.column), v});
  }
  return plan;
}

// Nested-loop enumeration of all row combinations passing the conditions.
void enumerate_join(const JoinPlan& plan,
                    const std::function<void(const std::vector<const Row*>&)>& emit) {
  size_t n = plan.rels.size();
  std::vector<const Row*> current(n);
  std::function<void(size_t)> descend = [&](size_t level) {
    if (level == n) {
      emit(current);
      return;
    }
    for (const Row& row : plan.rels[level]->rows) {
      current[level] = &row;
      bool ok = true;
      for (const ColumnConst& c : plan.consts[level])
        if (row.tuple[c.c] != c.v) {
          ok = false;
          break;
        }
      for (const ColumnEq& e : plan.eqs[level])
        if (ok && current[e.sa]->tuple[e.ca] != current[e.sb]->tuple[e.cb]) {
          ok = false;
          break;
        }
      if (ok) descend(level + 1);
    }
  };
  descend(0);
}

std::vector<std::pair<int, int>> head_positions(const Query& q,
                                                const JoinPlan& plan) {
  std::vector<int> head = q.head;
  if (q.head_all) {
    head.clear();
    for (size_t a = 0; a < q.attrs.size(); ++a)
      head.push_back(static_cast<int>(a));
  } else {
    // Head is a set; output columns follow schema order, matching the
    // per-symbol projection used when building f-representations.
    std::sort(head.begin(), head.end());
    head.erase(std::unique(head.begin(), head.end()), head.end());
  }
  std::vector<std::pair<int, int>> cols;
  for (int a : head) {
    const Attr& at = q.attrs[a];
    cols.emplace_back(at.symbol, plan.rels[at.symbol]->column_index(at.column));
  }
  return cols;
}

}  // namespace

AnnotatedResult brute_force_eval(const Query& q, const Database& db,
                                 size_t limit) {
  JoinPlan plan = plan_join(q, db);
  std::vector<std::pair<int, int>> head = head_positions(q, plan);
  AnnotatedResult result;
  enumerate_join(plan, [&](const std::vector<const Row*>& rows) {
    if (result.rows.size() >= limit)
      throw ResourceLimitError("result bag exceeds " + std::to_string(limit) +
                               " rows");
    ResultRow out;
    for (const Row* r : rows) out.monomial.push_back(r->id);
    for (const auto& [s, c] : head) out.tuple.push_back(rows[s]->tuple[c]);
    result.rows.push_back(std::move(out));
  });
  return result;
}

size_t distinct_tuples(const AnnotatedResult& r) {
  std::vector<Tuple> tuples;
  tuples.reserve(r.rows.size());
  for (const ResultRow& row : r.rows) tuples.push_back(row.tuple);
  std::sort(tuples.begin(), tuples.end(), tuple_less);
  tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
  return tuples.size();
}

std::map<std::string, size_t> occurrence_counts(const Query& q, const FTree& t,
                                                const Database& db,
                                                size_t limit) {
  AttrClasses cl = attribute_classes(q);
  FTree full = t.reduced() ? attach_leaves(t, q, cl) : t;
  JoinPlan plan = plan_join(q, db);
  size_t n = q.symbols.size();

  // Per symbol: one (symbol, column) witness per non-relevant class. Any
  // member attribute works since the join equates the whole class.
  std::vector<std::vector<std::pair<int, int>>> nr_cols(n);
  for (size_t s = 0; s < n; ++s) {
    NodeSets ns = node_sets(full, q, cl, static_cast<int>(s));
    for (int c : ns.nonrelevant) {
      const Attr& at = q.attrs[cl.members[c][0]];
      nr_cols[s].emplace_back(at.symbol,
                              plan.rels[at.symbol]->column_index(at.column));
    }
  }

  auto cmp = [](const Tuple& a, const Tuple& b) { return tuple_less(a, b); };
  std::map<std::pair<size_t, std::string>,
           std::set<Tuple, decltype(cmp)>> seen;
  size_t emitted = 0;
  enumerate_join(plan, [&](const std::vector<const Row*>& rows) {
    if (++emitted > limit)
      throw ResourceLimitError("join exceeds " + std::to_string(limit) +
                               " rows");
    for (size_t s = 0; s < n; ++s) {
      Tuple key;
      for (const auto& [sym, col] : nr_cols[s])
        key.push_back(rows[sym]->tuple[col]);
      auto it = seen.find({s, rows[s]->id});
      if (it == seen.end())
        it = seen.emplace(std::make_pair(s, rows[s]->id),
                          std::set<Tuple, decltype(cmp)>(cmp)).first;
      it->second.insert(std::move(key));
    }
  });

  std::map<std::string, size_t> counts;
  for (const auto& [key, tuples] : seen) counts[key.second] += tuples.size();
  return counts;
}

size_t occurrence_oracle(const Query& q, const FTree& t, const Database& db,
                         const std::string& ident, size_t limit) {
  bool known = false;
  for (size_t s = 0; s < q.symbols.size() && !known; ++s)
    for (const Row& row : relation_for_symbol(db, q, static_cast<int>(s)).rows)
      if (row.id == ident) {
        known = true;
        break;
      }
  if (!known)
    throw SchemaError("identifier '" + ident +
                      "' is not a row of any relation the query reads");
  std::map<std::string, size_t> counts = occurrence_counts(q, t, db, limit);
  auto it = counts.find(ident);
  return it == counts.end() ? 0 : it->second;
}

namespace {

constexpr long kDomainBudgetLimit = 10000000;

// All rows of a full relation: one per assignment of the distinct classes
// appearing among the columns, every column carrying its class's value.
// Classes cycle with the first distinct class outermost, so rows come out
// in ascending tuple order once columns follow the class discovery order.
std::vector<Tuple> full_rows(const std::vector<int>& col_cls,
                             const std::vector<long>& dom) {
  std::vector<int> cls;
  for (int c : col_cls)
    if (std::find(cls.begin(), cls.end(), c) == cls.end()) cls.push_back(c);
  std::vector<Tuple> rows;
  std::vector<long> assign(cls.size(), 1);
  std::function<void(size_t)> descend = [&](size_t level) {
    if (level == cls.size()) {
      Tuple t;
      for (int c : col_cls) {
        size_t pos = std::find(cls.begin(), cls.end(), c) - cls.begin();
        t.push_back(Value::of_int(assign[pos]));
      }
      rows.push_back(std::move(t));
      return;
    }
    for (long v = 1; v <= dom[cls[level]]; ++v) {
      assign[level] = v;
      descend(level + 1);
    }
  };
  descend(0);
  return rows;
}

Relation relation_from_tuples(const std::string& name,
                              std::vector<std::string> columns,
                              std::vector<Tuple> tuples) {
  std::sort(tuples.begin(), tuples.end(), tuple_less);
  tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
  Relation rel;
  rel.name = name;
  rel.columns = std::move(columns);
  for (size_t i = 0; i < tuples.size(); ++i)
    rel.rows.push_back({name + "_" + std::to_string(i + 1),
                        std::move(tuples[i])});
  return rel;
}

// Column names and classes of one symbol, in schema order.
void symbol_columns(const Query& q, const AttrClasses& cl, int s,
                    std::vector<std::string>& cols, std::vector<int>& col_cls) {
  for (int a : q.symbols[s].attrs) {
    cols.push_back(q.attrs[a].column);
    col_cls.push_back(cl.class_of[a]);
  }
}

Database assemble_full_db(const Query& q, const AttrClasses& cl,
                          const std::vector<long>& dom) {
  std::map<std::string, std::vector<Tuple>> tuples;
  std::map<std::string, std::vector<std::string>> columns;
  std::vector<std::string> order;
  for (size_t s = 0; s < q.symbols.size(); ++s) {
    std::vector<std::string> cols;
    std::vector<int> col_cls;
    symbol_columns(q, cl, static_cast<int>(s), cols, col_cls);
    const std::string& base = q.symbols[s].base;
    auto it = columns.find(base);
    if (it == columns.end()) {
      columns[base] = cols;
      order.push_back(base);
    } else if (it->second != cols) {
      throw SchemaError("relation '" + base +
                        "' is used with two different column lists");
    }
    std::vector<Tuple> rows = full_rows(col_cls, dom);
    auto& all = tuples[base];
    all.insert(all.end(), rows.begin(), rows.end());
  }
  Database db;
  for (const std::string& base : order)
    db.relations[base] = relation_from_tuples(base, columns[base],
                                              std::move(tuples[base]));
  return db;
}

}  // namespace

LowerBoundDb lower_bound_db(const Query& q, long long n) {
  if (n < 1) throw SchemaError("the domain budget must be positive");
  if (!q.constant_eqs.empty())
    throw SchemaError(
        "the dual-weight construction needs a constant-free query");
  AttrClasses cl = attribute_classes(q);
  uint64_t mask = cl.count() >= 64 ? ~0ull : (1ull << cl.count()) - 1;
  CoverHypergraph h = class_set_hypergraph(q, cl, mask);

  LowerBoundDb out;
  out.rho = rho_star(h).cost;
  out.y = dual_max_independent(h).weights;

  mpz_class d = 1;
  for (const Rational& w : out.y)
    mpz_lcm(d.get_mpz_t(), d.get_mpz_t(), w.den().get_mpz_t());
  unsigned long dl = d.get_ui();
  mpz_class k = ceil_root(mpz_class(static_cast<long>(n)), dl);
  out.n_used = int_pow(k, dl);
  if (out.n_used > kDomainBudgetLimit)
    throw ResourceLimitError("domain budget " + out.n_used.get_str() +
                             " exceeds the construction limit");

  std::vector<long> dom(cl.count(), 1);
  for (int c = 0; c < cl.count(); ++c) {
    Rational exp = Rational(d, mpz_class(1)) * out.y[c];
    mpz_class size = int_pow(k, exp.num().get_ui());
    dom[c] = size.get_si();
  }

  out.db = assemble_full_db(q, cl, dom);
  for (const auto& [name, rel] : out.db.relations) out.db_size += rel.rows.size();
  return out;
}

bool size_bound_holds(const Rational& rho, size_t db_size, size_t n_symbols,
                      size_t distinct) {
  mpz_class p = rho.num();
  mpz_class qq = rho.den();
  mpz_class lhs = int_pow(mpz_class(static_cast<unsigned long>(distinct)),
                          qq.get_ui()) *
                  int_pow(mpz_class(static_cast<unsigned long>(n_symbols)),
                          p.get_ui());
  mpz_class rhs = int_pow(mpz_class(static_cast<unsigned long>(db_size)),
                          p.get_ui());
  return lhs >= rhs;
}

Database witness_db_nonhierarchical(const Query& q, long long n) {
  if (n < 1) throw SchemaError("the domain size must be positive");
  if (!q.constant_eqs.empty())
    throw SchemaError("the witness construction needs a constant-free query");
  for (size_t i = 0; i < q.symbols.size(); ++i)
    for (size_t j = i + 1; j < q.symbols.size(); ++j)
      if (q.symbols[i].base == q.symbols[j].base)
        throw SchemaError("relation '" + q.symbols[i].base +
                          "' occurs twice; the witness construction needs "
                          "each relation once");
  AttrClasses cl = attribute_classes(q);
  int ca = -1, cb = -1;
  for (int a = 0; a < cl.count() && ca < 0; ++a)
    for (int b = a + 1; b < cl.count(); ++b) {
      uint64_t oa = cl.owners[a], ob = cl.owners[b];
      if ((oa & ob) && (oa & ~ob) && (ob & ~oa)) {
        ca = a;
        cb = b;
        break;
      }
    }
  if (ca < 0)
    throw SchemaError(
        "the query is hierarchical: no two attribute classes have "
        "overlapping, non-nested symbol sets");
  std::vector<long> dom(cl.count(), 1);
  dom[ca] = n;
  dom[cb] = n;
  return assemble_full_db(q, cl, dom);
}

namespace {

std::string rid(long long i) { return "r" + std::to_string(i); }
std::string tid(long long i) { return "t" + std::to_string(i); }
std::string sid(long long i, long long j) {
  return "s" + std::to_string(i) + "_" + std::to_string(j);
}

FExpr poly_leaf(std::string ident) { return make_leaf(std::move(ident)); }

}  // namespace

FRep build_pn_factorisation(long long n) {
  if (n < 1) throw SchemaError("n must be positive");
  auto wrap = [n](long long v) {
    v %= n;
    return v <= 0 ? v + n : v;
  };
  std::vector<FExpr> a_terms;
  for (long long i = 1; i <= n; ++i) {
    std::vector<FExpr> inner;
    for (long long j = 0; j <= n / 2 - 1; ++j) {
      long long m = wrap(i + j);
      inner.push_back(make_prod({poly_leaf(sid(i, m)), poly_leaf(tid(m))}));
    }
    a_terms.push_back(make_prod({poly_leaf(rid(i)), make_sum(std::move(inner))}));
  }
  std::vector<FExpr> b_terms;
  for (long long i = 1; i <= n; ++i) {
    std::vector<FExpr> inner;
    for (long long j = n / 2; j <= n - 1; ++j) {
      long long m = wrap(i - j);
      inner.push_back(make_prod({poly_leaf(rid(m)), poly_leaf(sid(m, i))}));
    }
    b_terms.push_back(make_prod({make_sum(std::move(inner)), poly_leaf(tid(i))}));
  }
  FRep rep;
  rep.root = make_sum({make_sum(std::move(a_terms)), make_sum(std::move(b_terms))});
  return rep;
}

FRep build_pn_direct(long long n) {
  if (n < 1) throw SchemaError("n must be positive");
  std::vector<FExpr> terms;
  for (long long i = 1; i <= n; ++i)
    for (long long j = 1; j <= n; ++j)
      terms.push_back(make_prod(
          {poly_leaf(rid(i)), poly_leaf(sid(i, j)), poly_leaf(tid(j))}));
  FRep rep;
  rep.root = make_sum(std::move(terms));
  return rep;
}

namespace {

FExpr crown_range(long long lo, long long hi) {
  long long count = hi - lo + 1;
  if (count <= 1) return make_sum({});
  if (count == 2)
    return make_sum({make_prod({poly_leaf(rid(lo)), poly_leaf(tid(hi))}),
                     make_prod({poly_leaf(rid(hi)), poly_leaf(tid(lo))})});
  long long mid = lo + (count + 1) / 2 - 1;
  std::vector<FExpr> t_front, r_front, t_back, r_back;
  for (long long i = lo; i <= mid; ++i) {
    t_front.push_back(poly_leaf(tid(i)));
    r_front.push_back(poly_leaf(rid(i)));
  }
  for (long long i = mid + 1; i <= hi; ++i) {
    t_back.push_back(poly_leaf(tid(i)));
    r_back.push_back(poly_leaf(rid(i)));
  }
  return make_sum({crown_range(lo, mid), crown_range(mid + 1, hi),
                   make_prod({make_sum(std::move(t_front)),
                              make_sum(std::move(r_back))}),
                   make_prod({make_sum(std::move(t_back)),
                              make_sum(std::move(r_front))})});
}

}  // namespace

FRep build_crown_factorisation(long long n) {
  if (n < 2) throw SchemaError("n must be at least 2");
  FRep rep;
  rep.root = crown_range(1, n);
  return rep;
}

FRep build_crown_direct(long long n) {
  if (n < 2) throw SchemaError("n must be at least 2");
  std::vector<FExpr> terms;
  for (long long i = 1; i <= n; ++i)
    for (long long j = 1; j <= n; ++j)
      if (i != j)
        terms.push_back(make_prod({poly_leaf(rid(i)), poly_leaf(tid(j))}));
  FRep rep;
  rep.root = make_sum(std::move(terms));
  return rep;
}

}  // namespace factordb
