#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "factordb/reldata.hpp"
#include "factordb/value.hpp"

namespace factordb {

// One occurrence of a relation in the product. `name` is unique across the
// query (aliases make repeated relations distinct); `base` is the stored
// relation it reads from.
struct QuerySymbol {
  std::string name;
  std::string base;
  std::vector<int> attrs;  // global attribute ids, in schema order
};

// A query attribute: a column of one symbol. Attributes are globally unique
// (identified by symbol + column); the printable form is "Symbol.column".
struct Attr {
  int symbol;
  std::string column;
};

// A select-project-join query over a product of symbols: equality conditions
// between attributes or between an attribute and a constant, and a projection
// list. Projection keeps duplicates (bag semantics).
struct Query {
  std::vector<QuerySymbol> symbols;
  std::vector<Attr> attrs;
  std::vector<std::pair<int, int>> equalities;       // attr id = attr id
  std::vector<std::pair<int, Value>> constant_eqs;   // attr id = constant
  std::vector<int> head;                             // ascending attr ids
  bool head_all = false;
  // Attributes pinned to a constant by split_constants. They stay in the
  // schema and head but take part in no attribute class (class_of is -1).
  std::vector<int> constant_attrs;

  std::string qualified_name(int attr) const;
  int find_attr(int symbol, const std::string& column) const;  // -1 if absent
  int symbol_index(const std::string& name) const;             // -1 if absent
};

// Text form, whitespace insensitive:
//
//   rel Cust(ckey, name)                      -- optional schema declarations
//   Q = pi[ ckey, Ord.date ] sel[ Cust.ckey = Ord.ckey, Ord.okey = 3 ]
//       (Cust x Ord x Ord as O2)
//
// The head is either "*" (every attribute of every symbol) or a list of
// attribute references. References may be qualified ("Ord.date") or bare
// ("ckey"); a bare name resolves to the first symbol in product order that
// has a column of that name. A symbol's columns come from its declaration
// when present, otherwise from its qualified mentions in head and conditions
// (in order of first mention). Literals are integers or double-quoted
// strings.
Query parse_query(const std::string& text);
Query parse_query_file(const std::string& path);

// Equivalence classes of attributes under the query's equalities. Classes are
// ordered by canonical name (the lexicographically least qualified attribute
// name in the class).
struct AttrClasses {
  std::vector<std::vector<int>> members;  // class id -> sorted attr ids
  std::vector<int> class_of;              // attr id -> class id
  std::vector<uint64_t> owners;           // class id -> bitmask of symbols
  std::vector<std::string> canonical;     // class id -> canonical name

  int count() const { return static_cast<int>(members.size()); }
  bool owns(int cls, int symbol) const {
    return (owners[cls] >> symbol) & 1u;
  }
};

AttrClasses attribute_classes(const Query& q);

// True iff for every pair of classes, the symbol sets that use them are
// nested or disjoint.
bool is_hierarchical(const Query& q);

// Splitting off constants: every attribute transitively equated to a constant
// goes into the filter; the remaining query q_prime has those equalities
// removed and the pinned attributes marked constant (so they form no
// classes). satisfiable is false when one class is forced to two different
// constants (the query result is then empty on every database).
struct ConstantSplit {
  Query q_prime;
  std::vector<std::pair<int, Value>> filter;  // attr id -> forced value
  bool satisfiable = true;
};

ConstantSplit split_constants(const Query& q);

// Applies a constant filter, producing a database with one entry per query
// symbol (keyed by symbol name, so repeated relations are filtered
// independently). Identifiers are preserved.
Database apply_constant_filter(const Database& db, const Query& q,
                               const std::vector<std::pair<int, Value>>& filter);

// Resolves the relation a symbol reads from: an entry keyed by the symbol
// name wins (as produced by apply_constant_filter), else the base relation.
const Relation& relation_for_symbol(const Database& db, const Query& q,
                                    int symbol);

// Checks that every attribute of every symbol is a column of the relation the
// symbol reads from; throws SchemaError otherwise.
void check_schema(const Database& db, const Query& q);

// Maximum number of symbols sharing one base relation.
int multiplicity(const Query& q);

}  // namespace factordb
