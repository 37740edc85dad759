#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "factordb/value.hpp"

namespace factordb {

inline constexpr size_t kDefaultMonomialLimit = 1'000'000;

// One relation slot of an f-representation: the symbol it stands for and the
// schema of the tuples its leaves carry (the projected head attributes).
struct Signature {
  std::string name;
  std::vector<std::string> schema;
};

// A factorised expression: sums and products over identifier leaves. A leaf
// names one stored tuple; it carries the tuple's projected values unless the
// expression has been stripped down to its polynomial. `signature` indexes
// the signature table of the enclosing FRep (-1 when unknown, e.g. for
// parsed text).
//
// Normal form maintained by the constructors below: products are flattened
// (no product directly under a product), a product containing an empty sum
// collapses to the empty sum, sums drop empty-sum summands, and single-child
// sums/products collapse to the child. The empty sum denotes the empty
// result; the empty product is the neutral factor and only appears
// transiently.
struct FExpr {
  enum class Kind { Sum, Prod, Leaf };

  Kind kind = Kind::Sum;
  std::vector<FExpr> children;     // Sum / Prod
  std::string ident;               // Leaf
  std::optional<Tuple> tuple;      // Leaf; absent for polynomial leaves
  int signature = -1;              // Leaf

  bool is_empty_sum() const { return kind == Kind::Sum && children.empty(); }
};

struct FRep {
  FExpr root;
  std::vector<Signature> signatures;
};

FExpr make_leaf(std::string ident, std::optional<Tuple> tuple = std::nullopt,
                int signature = -1);
FExpr make_sum(std::vector<FExpr> children);
FExpr make_prod(std::vector<FExpr> children);

// Number of leaf occurrences.
size_t frep_size(const FExpr& e);

// Maximum number of occurrences of any one identifier.
size_t read_k(const FExpr& e);

// Occurrences per (signature, identifier).
std::map<std::pair<int, std::string>, size_t> leaf_occurrences(const FExpr& e);

// Copy with tuples stripped from all leaves.
FExpr polynomial(const FExpr& e);

// One expanded product of leaves. Factors are kept in expansion order;
// tuple concatenation orders them by signature (stable).
struct MonomialFactor {
  int signature = -1;
  std::string ident;
  std::optional<Tuple> tuple;
};

struct Monomial {
  std::vector<MonomialFactor> factors;

  Tuple concat_tuple() const;
  // Order-independent comparison key; includes tuple values for leaves that
  // carry them.
  std::string key() const;
};

// Full distributive expansion, in document order (for each sum, earlier
// summands first; for each product, the rightmost factor cycles fastest).
// Throws ResourceLimitError when more than `limit` monomials (including
// intermediate partial products) would be built.
std::vector<Monomial> flatten(const FExpr& e,
                              size_t limit = kDefaultMonomialLimit);

// Equality of the flattened expansions as multisets.
bool equivalent(const FExpr& a, const FExpr& b,
                size_t limit = kDefaultMonomialLimit);

// Text form:  sum := prod ("+" prod)* | "0" ; prod := atom ("*" atom)* | "1" ;
// atom := ident "<" values ">" | ident | "(" sum ")". Tupled leaves print as
// ident<v1,v2>, polynomial leaves as the bare identifier.
std::string to_text(const FExpr& e);

// to_text after recursively sorting sum and product children; two expressions
// are identical up to child order iff their canonical texts match.
std::string canonical_text(const FExpr& e);

// Parses the text form. Leaves get signature -1 unless a resolver is given.
FExpr parse_frep(const std::string& text);
FExpr parse_frep(const std::string& text, int (*resolve)(const std::string&));

// Checks the signature-cover discipline: a leaf covers its signature, product
// children cover disjoint sets, sum children cover equal sets (the empty sum
// is compatible with any set), and tuple arities match the table's schemas.
bool well_formed(const FRep& rep, std::string* why = nullptr);

// Streams the expansion tuple by tuple without materializing it: one pointer
// per sum (ordered by pre-order position), all pointers starting at the first
// summand, the last enabled sum advancing first. Yields exactly flatten(e) in
// order. step counters expose the work done per advance.
class TupleCursor {
 public:
  explicit TupleCursor(const FExpr& e);

  bool next(Monomial& out);
  size_t yielded() const { return yielded_; }
  size_t last_steps() const { return last_steps_; }
  size_t max_steps() const { return max_steps_; }

 private:
  struct SumState {
    const FExpr* node;
    size_t pointer = 0;
    bool enabled = false;
  };

  void scan(const FExpr* node, Monomial* out);
  const FExpr* root_;
  std::vector<SumState> sums_;             // pre-order
  std::map<const FExpr*, size_t> sum_index_;
  bool started_ = false;
  bool done_ = false;
  size_t steps_ = 0;
  size_t yielded_ = 0;
  size_t last_steps_ = 0;
  size_t max_steps_ = 0;
};

}  // namespace factordb
