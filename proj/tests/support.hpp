#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "factordb/bounds.hpp"
#include "factordb/frep.hpp"
#include "factordb/ftree.hpp"
#include "factordb/query.hpp"
#include "factordb/rational.hpp"
#include "factordb/reldata.hpp"

namespace testsupport {

// Files under tests/data, addressed relative to that directory.
std::string data_path(const std::string& rel);
factordb::Query load_query(const std::string& fq_name);
factordb::Database load_db(const std::string& dir_name);
nlohmann::json load_tree(const std::string& json_name);

// Order-independent bag keys: "id1*id2*...|v1,v2,..." with identifiers in
// symbol order. Both sides sorted, so equal vectors mean equal bags.
std::vector<std::string> expansion_bag(const factordb::FExpr& e,
                                       size_t limit = 1'000'000);
std::vector<std::string> oracle_bag(const factordb::AnnotatedResult& r);

// Leaf occurrences aggregated by identifier across signatures.
std::map<std::string, size_t> leaf_counts(const factordb::FExpr& e);

// Exact check of lhs <= mult * dsize^(f + extra) for rational f = p/q:
// lhs^q <= mult^q * dsize^(p + extra*q).
bool within_power_bound(size_t lhs, size_t mult, size_t dsize,
                        const factordb::Rational& f, unsigned extra);

// Random constant-free query over bases R,S,T,U: 2..4 symbols, arities 1..3,
// 1..3 equality conditions across symbols; occasionally repeats a base via an
// alias. Returned as query text so the parser is on the tested path.
std::string random_query_text(std::mt19937& rng);

// Random non-repeating query that is hierarchical by construction: classes
// form a forest and each symbol owns exactly the classes on one root path.
std::string random_hierarchical_query_text(std::mt19937& rng);

// Random database for the query's base relations. Values are integers in
// [1, domain]; each relation gets 1..max_rows rows (0 allowed when
// allow_empty). Row ids are "<name>_<i>".
factordb::Database random_db(const factordb::Query& q, std::mt19937& rng,
                             size_t max_rows, int domain,
                             bool allow_empty = false);

// Random polynomial-leaf expression with at most max_size leaf occurrences
// and a bounded expansion, for enumeration fuzzing.
factordb::FExpr random_frep(std::mt19937& rng, size_t max_size);

}  // namespace testsupport
