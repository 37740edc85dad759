#include <doctest.h>

#include <random>
#include <set>
#include <string>
#include <vector>

#include "factordb/bounds.hpp"
#include "factordb/cover.hpp"
#include "factordb/errors.hpp"
#include "factordb/gen.hpp"
#include "support.hpp"

using namespace factordb;

namespace {

const char* kQw =
    "rel R(A) rel S(A, B) rel T(B) "
    "Q = pi[*] sel[R.A = S.A, S.B = T.B] (R x S x T)";

std::string monomial_key(const ResultRow& row) {
  std::string key;
  for (const auto& id : row.monomial) key += id;
  return key;
}

}  // namespace

TEST_CASE("nested-loop reference evaluation of the running example") {
  Query q = testsupport::load_query("intro.fq");
  Database db = testsupport::load_db("fig1");
  AnnotatedResult r = brute_force_eval(q, db);
  REQUIRE(r.rows.size() == 6);

  std::vector<std::string> keys;
  for (const auto& row : r.rows) keys.push_back(monomial_key(row));
  CHECK(keys == std::vector<std::string>{"c1o1i1", "c1o1i2", "c2o3i3",
                                         "c2o3i4", "c2o4i5", "c3o5i6"});
  CHECK(tuple_to_string(r.rows[0].tuple) == "1,Joe,1,1995,0.1");
  CHECK(distinct_tuples(r) == 6);

  CHECK_THROWS_AS(brute_force_eval(q, db, 3), ResourceLimitError);
}

TEST_CASE("the four-relation example expands to nine rows") {
  Query q = testsupport::load_query("ex51.fq");
  Database db = testsupport::load_db("db2");
  AnnotatedResult r = brute_force_eval(q, db);
  CHECK(r.rows.size() == 9);

  FactoriseResult res = factorise(q, db);
  CHECK(testsupport::expansion_bag(res.frep.root) ==
        testsupport::oracle_bag(r));

  AnnotatedResult empty =
      brute_force_eval(q, testsupport::load_db("empty51"));
  CHECK(empty.rows.empty());
  CHECK(distinct_tuples(empty) == 0);
}

TEST_CASE("occurrence counts against the factorised output") {
  Query q = testsupport::load_query("ex51.fq");
  AttrClasses cl = attribute_classes(q);
  Database db = testsupport::load_db("db2");
  FTree t = ftree_from_json(testsupport::load_tree("t1.json"), q, cl);
  if (t.reduced()) t = attach_leaves(t, q, cl);

  auto counts = occurrence_counts(q, t, db);
  CHECK(counts.size() == 13);
  CHECK(counts.at("u21") == 2);
  CHECK(counts.at("u22") == 2);
  CHECK(counts.at("u11") == 1);
  CHECK(counts.at("r111") == 1);
  CHECK(counts.at("t22") == 1);
  CHECK(counts.count("r221") == 0);  // joins nothing

  GenStats stats;
  FRep rep = gen2(t, q, cl, db, &stats);
  CHECK(testsupport::leaf_counts(rep.root) ==
        std::map<std::string, size_t>(counts.begin(), counts.end()));

  CHECK(occurrence_oracle(q, t, db, "u21") == 2);
  CHECK(occurrence_oracle(q, t, db, "r221") == 0);
  CHECK_THROWS_AS(occurrence_oracle(q, t, db, "zz9"), SchemaError);
}

TEST_CASE("a foreign-class-free tree needs every identifier once") {
  Query q = testsupport::load_query("ex41b.fq");
  AttrClasses cl = attribute_classes(q);
  std::mt19937 rng(3);
  Database db = testsupport::random_db(q, rng, 8, 3);
  QueryPlan plan = f_of_query(q, cl);
  REQUIRE(plan.f == Rational(0));
  for (const auto& [ident, count] : occurrence_counts(q, plan.tree, db)) {
    CAPTURE(ident);
    CHECK(count == 1);
  }
}

TEST_CASE("dual-weighted databases certify the size lower bound") {
  Query prod = parse_query("rel R(A) rel T(B) Q = pi[*] sel[] (R x T)");
  LowerBoundDb lb = lower_bound_db(prod, 4);
  CHECK(lb.rho == Rational(2));
  CHECK(lb.n_used == 4);
  CHECK(lb.db_size == 8);
  AnnotatedResult r = brute_force_eval(prod, lb.db);
  CHECK(distinct_tuples(r) == 16);
  CHECK(size_bound_holds(lb.rho, lb.db_size, prod.symbols.size(), 16));
  CHECK_FALSE(size_bound_holds(lb.rho, lb.db_size, prod.symbols.size(), 15));

  Query tri = parse_query(
      "rel R(A, B) rel S(B, C) rel T(A, C) "
      "Q = pi[*] sel[R.B = S.B, S.C = T.C, R.A = T.A] (R x S x T)");
  LowerBoundDb tlb = lower_bound_db(tri, 4);
  CHECK(tlb.rho == Rational(3, 2));
  CHECK(tlb.n_used == 4);
  for (const auto& [name, rel] : tlb.db.relations) CHECK(rel.rows.size() == 4);
  CHECK(distinct_tuples(brute_force_eval(tri, tlb.db)) == 8);
  CHECK(size_bound_holds(tlb.rho, tlb.db_size, 3, 8));

  Query single = parse_query("rel R(A) Q = pi[*] sel[] (R)");
  LowerBoundDb slb = lower_bound_db(single, 7);
  CHECK(slb.rho == Rational(1));
  CHECK(slb.db_size == 7);
  CHECK(distinct_tuples(brute_force_eval(single, slb.db)) == 7);

  // Requested sizes round up to a perfect power of the weight denominator.
  LowerBoundDb plb = lower_bound_db(prod, 5);
  CHECK(plb.n_used == 5);  // weights are integral, no rounding
  CHECK(lower_bound_db(tri, 5).n_used == 9);  // next square after 5

  Query c = parse_query("rel R(A, B) Q = pi[*] sel[R.A = 1] (R)");
  CHECK_THROWS_AS(lower_bound_db(c, 3), SchemaError);
}

TEST_CASE("witness databases defeat every tree of a non-hierarchical query") {
  Query qw = parse_query(kQw);
  AttrClasses cl = attribute_classes(qw);

  Database d2 = witness_db_nonhierarchical(qw, 2);
  CHECK(d2.at("R").rows.size() == 2);
  CHECK(d2.at("S").rows.size() == 4);
  CHECK(d2.at("T").rows.size() == 2);
  CHECK(brute_force_eval(qw, d2).rows.size() == 4);
  CHECK(brute_force_eval(qw, witness_db_nonhierarchical(qw, 1)).rows.size() ==
        1);

  for (long long n : {2, 3}) {
    CAPTURE(n);
    Database db = witness_db_nonhierarchical(qw, n);
    size_t best = SIZE_MAX;
    for_each_reduced_ftree(qw, cl, [&](const FTree& rt) {
      FTree t = attach_leaves(rt, qw, cl);
      FRep rep = gen2(t, qw, cl, db);
      best = std::min(best, read_k(rep.root));
      return true;
    });
    CHECK(best == static_cast<size_t>(n));
  }
}

TEST_CASE("witness database of the customer-order-item query") {
  Query q = testsupport::load_query("intro.fq");
  Database db = witness_db_nonhierarchical(q, 3);
  AnnotatedResult r = brute_force_eval(q, db);
  REQUIRE(r.rows.size() == 9);

  // Three customers, each with the same three order keys.
  std::map<std::string, size_t> per_customer;
  for (const auto& row : r.rows) ++per_customer[row.monomial[0]];
  CHECK(per_customer.size() == 3);
  for (const auto& [c, k] : per_customer) CHECK(k == 3);
}

TEST_CASE("witness construction rejects unsuitable queries") {
  CHECK_THROWS_AS(
      witness_db_nonhierarchical(testsupport::load_query("ex41b.fq"), 2),
      SchemaError);
  CHECK_THROWS_AS(
      witness_db_nonhierarchical(
          parse_query("rel R(A, B) Q = pi[*] sel[R.A = R2.B] (R x R as R2)"),
          2),
      SchemaError);
  CHECK_THROWS_AS(
      witness_db_nonhierarchical(
          parse_query("rel R(A) rel S(A, B) rel T(B) Q = pi[*] "
                      "sel[R.A = S.A, S.B = T.B, T.B = 1] (R x S x T)"),
          2),
      SchemaError);
  CHECK_THROWS_AS(lower_bound_db(parse_query(kQw), 0), SchemaError);
}

TEST_CASE("two-block factorisation of the complete bipartite pattern") {
  FRep one = build_pn_factorisation(1);
  CHECK(to_text(one.root) == "r1*s1_1*t1");
  CHECK(read_k(one.root) == 1);

  for (long long n = 2; n <= 8; ++n) {
    CAPTURE(n);
    FRep fact = build_pn_factorisation(n);
    FRep direct = build_pn_direct(n);
    CHECK(flatten(direct.root).size() == static_cast<size_t>(n * n));
    CHECK(equivalent(fact.root, direct.root));
    CHECK(read_k(direct.root) == static_cast<size_t>(n));
    CHECK(read_k(fact.root) == static_cast<size_t>((n + 1) / 2 + 1));
  }
}

TEST_CASE("recursive halving factorisation of the crown pattern") {
  for (long long n : {2, 3, 4, 5, 8, 13, 16, 27, 32}) {
    CAPTURE(n);
    FRep fact = build_crown_factorisation(n);
    FRep direct = build_crown_direct(n);
    CHECK(flatten(direct.root).size() == static_cast<size_t>(n * (n - 1)));
    CHECK(equivalent(fact.root, direct.root));
    CHECK(read_k(direct.root) == static_cast<size_t>(n - 1));

    size_t cap = 1;
    while ((1LL << (cap - 1)) < n) ++cap;
    CHECK(read_k(fact.root) <= cap);
  }
}
