#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <json.hpp>

#include "factordb/frep.hpp"
#include "factordb/ftree.hpp"
#include "factordb/query.hpp"
#include "factordb/rational.hpp"
#include "factordb/reldata.hpp"

namespace factordb {

// Rows of one symbol arranged for a tree: the key lists the symbol's columns
// ordered by the depth of their class node (root end first), columns of one
// class adjacent in ascending column order. Rows are sorted stably by that
// key under the Value order, so every condition accumulated along a path
// selects a contiguous range.
struct SortedSymbol {
  std::vector<Row> rows;
  std::vector<int> key_columns;  // column indexes into the relation
  std::vector<int> key_classes;  // class id per key column
};

struct SortedDatabase {
  std::vector<SortedSymbol> symbols;  // indexed by query symbol
};

SortedDatabase sort_for_tree(const Database& db, const Query& q,
                             const AttrClasses& cl, const FTree& t);

struct GenStats {
  bool trace = false;
  size_t value_groups = 0;  // (class, value) branches recursed into
  size_t leaf_terms = 0;    // identifiers emitted at leaves
  size_t merge_steps = 0;   // range advances while merging sorted ranges
  std::vector<std::pair<int, Value>> events;  // (class, value), trace only
};

// Range-merge factorisation. At each inner node the sorted ranges of the
// owning symbols are advanced together; only values present in every owning
// range (on all columns of the class) are branched into. Non-owning symbols
// keep their ranges. Leaves sum identifier<projected-tuple> over their range.
FRep gen2(const FTree& t, const Query& q, const AttrClasses& cl,
          const Database& db, GenStats* stats = nullptr);

// Reference implementation: iterates the full active domain of each class in
// ascending Value order and filters at the leaves; empty branches disappear
// through sum/product normalization.
FRep gen_naive(const FTree& t, const Query& q, const AttrClasses& cl,
               const Database& db);

struct FactoriseResult {
  FRep frep;
  FTree tree;          // tree over the constant-split query, leaves attached
  Rational f{0};       // f of that tree
  bool satisfiable = true;
  Query split_query;   // constant-split query the tree refers to
  AttrClasses classes; // its attribute classes
  GenStats stats;
};

// Full pipeline: split off constants, filter the database, pick the
// cost-optimal tree, run gen2. An unsatisfiable constant set yields an empty
// sum and satisfiable = false.
FactoriseResult factorise(const Query& q, const Database& db);

// Same pipeline with a caller-supplied tree (JSON form, reduced or full).
// The tree's classes must match the constant-split query.
FactoriseResult factorise_with_tree(const Query& q, const Database& db,
                                    const nlohmann::json& tree_json);

}  // namespace factordb
