#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "factordb/frep.hpp"
#include "factordb/ftree.hpp"
#include "factordb/query.hpp"
#include "factordb/rational.hpp"
#include "factordb/reldata.hpp"

namespace factordb {

// One expanded result row: the contributing row identifiers (one per symbol,
// in symbol order) and the projected head tuple.
struct ResultRow {
  std::vector<std::string> monomial;
  Tuple tuple;
};

// The query result as a bag, in nested-loop enumeration order (symbol 0
// outermost, stored row order within each symbol). No deduplication.
struct AnnotatedResult {
  std::vector<ResultRow> rows;
};

// Reference evaluation: nested loops over the symbols' relations, keeping the
// combinations that satisfy every equality and constant condition. Throws
// ResourceLimitError once the bag exceeds `limit` rows.
AnnotatedResult brute_force_eval(const Query& q, const Database& db,
                                 size_t limit = kDefaultMonomialLimit);

// Number of distinct projected tuples in the bag.
size_t distinct_tuples(const AnnotatedResult& r);

// How often each identifier must appear in the factorisation of the result
// over t: per symbol, the count of distinct value vectors over the symbol's
// non-relevant classes among join rows that use the identified tuple; aliases
// of one base relation contribute per alias. Identifiers joining to nothing
// are absent from the map.
std::map<std::string, size_t> occurrence_counts(
    const Query& q, const FTree& t, const Database& db,
    size_t limit = kDefaultMonomialLimit);

// Single-identifier variant. The identifier must exist in some relation the
// query reads, else SchemaError. Returns 0 when the row joins to nothing.
size_t occurrence_oracle(const Query& q, const FTree& t, const Database& db,
                         const std::string& ident,
                         size_t limit = kDefaultMonomialLimit);

// Database built from an optimal dual weighting y of the query's attribute
// classes: class A gets the domain {1..k^(d·y_A)} where d is the common
// denominator of the weights and k^d is the least d-th power >= the requested
// n, every relation is the full product over its classes' domains, and
// repeated base names are merged by set union. On such a database the result
// has at least (|D|/|Q|)^rho distinct tuples.
struct LowerBoundDb {
  Database db;
  mpz_class n_used;            // k^d, the domain budget actually used
  Rational rho;                // primal cover optimum of the whole query
  std::vector<Rational> y;     // dual weight per class
  size_t db_size = 0;          // total tuples over all relations
};

// Requires a constant-free query. n >= 1.
LowerBoundDb lower_bound_db(const Query& q, long long n);

// Exact check of distinct >= (db_size / n_symbols)^rho, both sides raised to
// the denominator of rho: distinct^den * n_symbols^num >= db_size^num.
bool size_bound_holds(const Rational& rho, size_t db_size, size_t n_symbols,
                      size_t distinct);

// Database family whose results defeat every factorisation tree: the first
// two attribute classes with overlapping, non-nested symbol sets get domains
// {1..n}, every other attribute the domain {1}, and all relations are full.
// Requires pairwise distinct base relations, no constants, and a
// non-hierarchical query; violations raise SchemaError naming the gap.
Database witness_db_nonhierarchical(const Query& q, long long n);

// Factorisations of p_n = sum_{i,j in [n]} r_i s_i_j t_j over polynomial
// leaves. The compact form splits p_n into two pieces whose inner indices
// cycle modulo n; its heaviest identifier occurs ceil(n/2)+1 times (n >= 2).
FRep build_pn_factorisation(long long n);

// The flat double sum, one monomial per (i, j).
FRep build_pn_direct(long long n);

// Factorisations of q_n = sum_{i != j in [n]} r_i t_j. The compact form
// splits the index range in half, handles the two cross blocks as products
// of plain sums and recurses into the halves, so no identifier occurs more
// than ceil(log2 n)+1 times. n >= 2.
FRep build_crown_factorisation(long long n);

// The flat sum over ordered pairs i != j.
FRep build_crown_direct(long long n);

}  // namespace factordb
