#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "factordb/value.hpp"

namespace testsupport {

using namespace factordb;

std::string data_path(const std::string& rel) {
  return std::string(FACTORDB_TEST_DATA) + "/" + rel;
}

Query load_query(const std::string& fq_name) {
  return parse_query_file(data_path(fq_name));
}

Database load_db(const std::string& dir_name) {
  return load_database_dir(data_path(dir_name));
}

nlohmann::json load_tree(const std::string& json_name) {
  std::ifstream in(data_path("trees/" + json_name));
  return nlohmann::json::parse(in);
}

namespace {

std::string monomial_key(const Monomial& m) {
  std::vector<MonomialFactor> fs = m.factors;
  std::stable_sort(fs.begin(), fs.end(),
                   [](const MonomialFactor& a, const MonomialFactor& b) {
                     return a.signature < b.signature;
                   });
  std::string key;
  for (size_t i = 0; i < fs.size(); ++i) {
    if (i) key += '*';
    key += fs[i].ident;
  }
  key += '|';
  key += tuple_to_string(m.concat_tuple());
  return key;
}

}  // namespace

std::vector<std::string> expansion_bag(const FExpr& e, size_t limit) {
  std::vector<std::string> bag;
  for (const Monomial& m : flatten(e, limit)) bag.push_back(monomial_key(m));
  std::sort(bag.begin(), bag.end());
  return bag;
}

std::vector<std::string> oracle_bag(const AnnotatedResult& r) {
  std::vector<std::string> bag;
  for (const ResultRow& row : r.rows) {
    std::string key;
    for (size_t i = 0; i < row.monomial.size(); ++i) {
      if (i) key += '*';
      key += row.monomial[i];
    }
    key += '|';
    key += tuple_to_string(row.tuple);
    bag.push_back(std::move(key));
  }
  std::sort(bag.begin(), bag.end());
  return bag;
}

std::map<std::string, size_t> leaf_counts(const FExpr& e) {
  std::map<std::string, size_t> out;
  for (const auto& [key, n] : leaf_occurrences(e)) out[key.second] += n;
  return out;
}

bool within_power_bound(size_t lhs, size_t mult, size_t dsize,
                        const Rational& f, unsigned extra) {
  unsigned long p = f.num().get_ui();
  unsigned long q = f.den().get_ui();
  mpz_class left = int_pow(mpz_class(static_cast<unsigned long>(lhs)), q);
  mpz_class right = int_pow(mpz_class(static_cast<unsigned long>(mult)), q) *
                    int_pow(mpz_class(static_cast<unsigned long>(dsize)),
                            p + static_cast<unsigned long>(extra) * q);
  return left <= right;
}

namespace {

const char* kBaseNames[] = {"R", "S", "T", "U"};
const char* kColumnNames[] = {"a", "b", "c"};

size_t pick(std::mt19937& rng, size_t n) {
  return std::uniform_int_distribution<size_t>(0, n - 1)(rng);
}

}  // namespace

std::string random_query_text(std::mt19937& rng) {
  size_t n_sym = 2 + pick(rng, 3);
  std::vector<std::string> sym_names, sym_bases;
  std::vector<size_t> arity;
  for (size_t s = 0; s < n_sym; ++s) {
    sym_names.emplace_back(kBaseNames[s]);
    sym_bases.emplace_back(kBaseNames[s]);
    arity.push_back(1 + pick(rng, 3));
  }
  bool repeat = n_sym >= 2 && pick(rng, 4) == 0;
  if (repeat) {
    size_t dup = pick(rng, n_sym - 1);
    sym_names[n_sym - 1] = sym_bases[dup] + "2";
    sym_bases[n_sym - 1] = sym_bases[dup];
    arity[n_sym - 1] = arity[dup];
  }

  std::ostringstream out;
  std::set<std::string> declared;
  for (size_t s = 0; s < n_sym; ++s) {
    if (!declared.insert(sym_bases[s]).second) continue;
    out << "rel " << sym_bases[s] << "(";
    for (size_t c = 0; c < arity[s]; ++c)
      out << (c ? "," : "") << kColumnNames[c];
    out << ") ";
  }

  std::set<std::string> conds;
  size_t n_eq = 1 + pick(rng, 3);
  for (size_t i = 0; i < n_eq; ++i) {
    size_t s1 = pick(rng, n_sym);
    size_t s2 = pick(rng, n_sym);
    if (s1 == s2) continue;
    std::string lhs = sym_names[s1] + "." + kColumnNames[pick(rng, arity[s1])];
    std::string rhs = sym_names[s2] + "." + kColumnNames[pick(rng, arity[s2])];
    conds.insert(lhs + " = " + rhs);
  }

  out << "Q = pi[*] sel[";
  size_t i = 0;
  for (const std::string& c : conds) out << (i++ ? ", " : "") << c;
  out << "] (";
  for (size_t s = 0; s < n_sym; ++s) {
    if (s) out << " x ";
    out << sym_bases[s];
    if (sym_names[s] != sym_bases[s]) out << " as " << sym_names[s];
  }
  out << ")";
  return out.str();
}

std::string random_hierarchical_query_text(std::mt19937& rng) {
  size_t n_cls = 1 + pick(rng, 4);
  std::vector<int> parent(n_cls, -1);
  for (size_t c = 1; c < n_cls; ++c)
    parent[c] = static_cast<int>(pick(rng, c + 1)) - 1;

  size_t n_sym = 2 + pick(rng, 3);
  std::vector<std::vector<size_t>> owned(n_sym);
  for (size_t s = 0; s < n_sym; ++s) {
    int node = static_cast<int>(pick(rng, n_cls));
    std::vector<size_t> path;
    for (int v = node; v >= 0; v = parent[v]) path.push_back(v);
    std::sort(path.begin(), path.end());
    owned[s] = std::move(path);
  }

  std::ostringstream out;
  std::vector<bool> extra(n_sym);
  for (size_t s = 0; s < n_sym; ++s) {
    extra[s] = pick(rng, 3) == 0;
    out << "rel " << kBaseNames[s] << "(";
    bool first = true;
    for (size_t c : owned[s]) {
      out << (first ? "" : ",") << "c" << c;
      first = false;
    }
    if (extra[s]) out << (first ? "" : ",") << "p";
    out << ") ";
  }

  std::vector<std::string> conds;
  for (size_t c = 0; c < n_cls; ++c) {
    std::vector<size_t> owners;
    for (size_t s = 0; s < n_sym; ++s)
      if (std::count(owned[s].begin(), owned[s].end(), c)) owners.push_back(s);
    for (size_t i = 0; i + 1 < owners.size(); ++i)
      conds.push_back(std::string(kBaseNames[owners[i]]) + ".c" +
                      std::to_string(c) + " = " + kBaseNames[owners[i + 1]] +
                      ".c" + std::to_string(c));
  }

  out << "Q = pi[*] sel[";
  for (size_t i = 0; i < conds.size(); ++i) out << (i ? ", " : "") << conds[i];
  out << "] (";
  for (size_t s = 0; s < n_sym; ++s)
    out << (s ? " x " : "") << kBaseNames[s];
  out << ")";
  return out.str();
}

Database random_db(const Query& q, std::mt19937& rng, size_t max_rows,
                   int domain, bool allow_empty) {
  Database db;
  for (const QuerySymbol& sym : q.symbols) {
    if (db.has(sym.base)) continue;
    Relation rel;
    rel.name = sym.base;
    for (int a : sym.attrs) rel.columns.push_back(q.attrs[a].column);
    size_t rows = allow_empty ? pick(rng, max_rows + 1) : 1 + pick(rng, max_rows);
    for (size_t i = 0; i < rows; ++i) {
      Row row;
      row.id = rel.name + "_" + std::to_string(i + 1);
      for (size_t c = 0; c < rel.columns.size(); ++c)
        row.tuple.push_back(
            Value::of_int(1 + static_cast<int64_t>(pick(rng, domain))));
      rel.rows.push_back(std::move(row));
    }
    db.relations[rel.name] = std::move(rel);
  }
  return db;
}

namespace {

// Tracks both leaf budget and a cap on the expansion cardinality so fuzzed
// enumeration stays cheap.
FExpr random_node(std::mt19937& rng, size_t depth, size_t& budget,
                  size_t& expansion) {
  if (depth == 0 || budget <= 1 || pick(rng, 4) == 0) {
    budget = budget > 0 ? budget - 1 : 0;
    std::string ident = "x" + std::to_string(pick(rng, 12));
    if (pick(rng, 2) == 0)
      return make_leaf(ident,
                       Tuple{Value::of_int(static_cast<int64_t>(pick(rng, 9)))});
    return make_leaf(ident);
  }
  bool sum = pick(rng, 2) == 0;
  size_t n = sum ? 2 + pick(rng, 3) : 2 + pick(rng, 2);
  std::vector<FExpr> children;
  size_t total = sum ? 0 : 1;
  for (size_t i = 0; i < n && budget > 0; ++i) {
    size_t child_exp = 1;
    FExpr child = random_node(rng, depth - 1, budget, child_exp);
    if (!sum && !children.empty() && total * child_exp > 2000) break;
    children.push_back(std::move(child));
    if (sum)
      total += child_exp;
    else
      total *= child_exp;
  }
  expansion = std::max<size_t>(total, 1);
  return sum ? make_sum(std::move(children)) : make_prod(std::move(children));
}

}  // namespace

FExpr random_frep(std::mt19937& rng, size_t max_size) {
  size_t budget = 2 + pick(rng, max_size - 1);
  size_t expansion = 1;
  FExpr e = random_node(rng, 5, budget, expansion);
  return e;
}

}  // namespace testsupport
