#pragma once

#include <cstdint>
#include <vector>

#include "factordb/ftree.hpp"
#include "factordb/query.hpp"
#include "factordb/rational.hpp"

namespace factordb {

// Covering instance: vertices are attribute classes of a (sub)query, each
// edge is a symbol together with the vertex positions it owns. Symbols whose
// restriction to the vertex set is empty carry no constraint and are absent.
struct CoverHypergraph {
  std::vector<int> vertices;            // class ids, ascending
  std::vector<int> edge_symbols;        // symbol ids, one per edge
  std::vector<std::vector<int>> edges;  // vertex positions covered per edge
};

// Hypergraph over an explicit class set (bitmask over class ids).
CoverHypergraph class_set_hypergraph(const Query& q, const AttrClasses& cl,
                                     uint64_t class_set);

// Hypergraph of the query restricted to Non-relevant(symbol) in t.
// t must carry leaves (use attach_leaves on reduced trees first).
CoverHypergraph restricted_query(const Query& q, const AttrClasses& cl,
                                 const FTree& t, int symbol);

struct LPSolution {
  Rational cost;
  std::vector<Rational> weights;  // per edge (primal) or per vertex (dual)
};

// Minimal-cost fractional edge cover: min sum x_e subject to
// sum_{e covering v} x_e >= 1 for every vertex v, x >= 0. Exact rationals.
LPSolution rho_star(const CoverHypergraph& h);

// The dual: max sum y_v subject to sum_{v in e} y_v <= 1 per edge, y >= 0.
// Solved independently of rho_star; equal costs witness strong duality.
LPSolution dual_max_independent(const CoverHypergraph& h);

// max over symbols of rho_star of the symbol's non-relevant restriction.
// Accepts a reduced tree (leaves are attached internally).
Rational f_of_tree(const Query& q, const AttrClasses& cl, const FTree& t);

// rho_star cost of each symbol's non-relevant restriction, indexed by symbol.
std::vector<Rational> per_symbol_rho(const Query& q, const AttrClasses& cl,
                                     const FTree& t);

struct QueryPlan {
  Rational f;                       // minimal f over all trees
  FTree tree;                       // witnessing tree, leaves attached
  std::vector<Rational> symbol_rho; // per-symbol cover cost in that tree
  size_t trees_considered = 0;      // complete trees reached by the search
};

// Minimises f over the pruned tree space by branch-and-bound; among optimal
// trees the one with the least canonical form is returned.
QueryPlan f_of_query(const Query& q, const AttrClasses& cl);

}  // namespace factordb
