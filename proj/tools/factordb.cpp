#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "factordb/bounds.hpp"
#include "factordb/cover.hpp"
#include "factordb/errors.hpp"
#include "factordb/frep.hpp"
#include "factordb/ftree.hpp"
#include "factordb/gen.hpp"
#include "factordb/query.hpp"
#include "factordb/rational.hpp"
#include "factordb/reldata.hpp"

namespace {

using nlohmann::json;

// Exit codes: 0 success, 2 unreadable input (syntax, schema, bad flags),
// 3 unsatisfiable constant conditions, 4 resource guard, 1 internal error.
constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kBadInput = 2;
constexpr int kUnsatisfiable = 3;
constexpr int kResource = 4;

struct Options {
  std::string query_file;
  std::string data_dir;
  std::string tree_file;
  std::string out_dir;
  std::string format = "text";
  size_t monomial_limit = factordb::kDefaultMonomialLimit;
  long long n = 0;
  long long limit = 0;
  bool all = false;
  bool pruned = false;
  bool stats = false;
  bool count_only = false;
  int verbose = 0;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw factordb::FormatError("cannot open '" + path + "'");
  return json::parse(in);
}

// lhs <= m^den * dsize^(num + extra*den), all exact.
bool within_power_bound(size_t lhs, int m, size_t dsize,
                        const factordb::Rational& f, unsigned extra) {
  unsigned long num = f.num().get_ui();
  unsigned long den = f.den().get_ui();
  mpz_class left =
      factordb::int_pow(mpz_class(static_cast<unsigned long>(lhs)), den);
  mpz_class right = factordb::int_pow(mpz_class(m), den) *
                    factordb::int_pow(
                        mpz_class(static_cast<unsigned long>(dsize)),
                        num + static_cast<unsigned long>(extra) * den);
  return left <= right;
}

json tree_json_of(const factordb::FactoriseResult& res) {
  return factordb::ftree_to_json(res.tree, res.split_query, res.classes);
}

std::string monomial_line(const factordb::Monomial& m) {
  std::vector<factordb::MonomialFactor> factors = m.factors;
  std::stable_sort(factors.begin(), factors.end(),
                   [](const factordb::MonomialFactor& a,
                      const factordb::MonomialFactor& b) {
                     return a.signature < b.signature;
                   });
  std::string line;
  for (size_t i = 0; i < factors.size(); ++i) {
    if (i) line += '*';
    line += factors[i].ident;
  }
  line += '\t';
  line += factordb::tuple_to_string(m.concat_tuple());
  return line;
}

int cmd_analyze(const Options& opt) {
  factordb::Query q = factordb::parse_query_file(opt.query_file);
  factordb::ConstantSplit split = factordb::split_constants(q);
  if (!split.satisfiable) {
    std::cerr << "factordb: the constant conditions contradict each other; "
                 "the result is empty on every database\n";
    return kUnsatisfiable;
  }
  factordb::AttrClasses cl = factordb::attribute_classes(split.q_prime);
  factordb::QueryPlan plan = factordb::f_of_query(split.q_prime, cl);
  json rho = json::object();
  for (size_t s = 0; s < split.q_prime.symbols.size(); ++s)
    rho[split.q_prime.symbols[s].name] = plan.symbol_rho[s].to_string();
  json out = {
      {"f_of_query", plan.f.to_string()},
      {"optimal_tree", factordb::ftree_to_json(plan.tree, split.q_prime, cl)},
      {"per_symbol_rho", rho},
      {"hierarchical", factordb::is_hierarchical(split.q_prime)},
      {"M", factordb::multiplicity(q)},
  };
  std::cout << out.dump(2) << "\n";
  if (opt.verbose)
    std::cerr << "factordb: considered " << plan.trees_considered
              << " trees\n";
  return kOk;
}

int cmd_plan(const Options& opt) {
  factordb::Query q = factordb::parse_query_file(opt.query_file);
  factordb::ConstantSplit split = factordb::split_constants(q);
  if (!split.satisfiable) {
    std::cerr << "factordb: the constant conditions contradict each other\n";
    return kUnsatisfiable;
  }
  const factordb::Query& qp = split.q_prime;
  factordb::AttrClasses cl = factordb::attribute_classes(qp);
  long long emitted = 0;
  auto emit = [&](const factordb::FTree& t) {
    json line = {{"tree", factordb::ftree_to_json(t, qp, cl)},
                 {"f", factordb::f_of_tree(qp, cl, t).to_string()}};
    std::cout << line.dump() << std::endl;
    ++emitted;
    return opt.limit == 0 || emitted < opt.limit;
  };
  factordb::IterStats st =
      opt.pruned ? factordb::for_each_reduced_ftree_pruned(qp, cl, emit)
                 : factordb::for_each_reduced_ftree(qp, cl, emit);
  if (opt.verbose)
    std::cerr << "factordb: " << st.yielded << " trees, worst delay "
              << st.max_call_gap << " internal steps\n";
  return kOk;
}

factordb::FactoriseResult run_factorise(const Options& opt,
                                        const factordb::Query& q,
                                        const factordb::Database& db) {
  if (!opt.tree_file.empty())
    return factordb::factorise_with_tree(q, db, read_json_file(opt.tree_file));
  return factordb::factorise(q, db);
}

int cmd_factorise(const Options& opt) {
  factordb::Query q = factordb::parse_query_file(opt.query_file);
  factordb::Database db = factordb::load_database_dir(opt.data_dir);
  factordb::FactoriseResult res = run_factorise(opt, q, db);
  if (!res.satisfiable)
    std::cerr << "factordb: warning: the constant conditions contradict each "
                 "other; the result is the empty sum\n";
  size_t dsize = factordb::database_stats(db).size;
  int m = factordb::multiplicity(q);
  json stats = {
      {"size", factordb::frep_size(res.frep.root)},
      {"read_k", factordb::read_k(res.frep.root)},
      {"f_tree", res.f.to_string()},
      {"bound_size_ok",
       within_power_bound(factordb::frep_size(res.frep.root), m, dsize, res.f,
                          1)},
      {"bound_read_ok",
       within_power_bound(factordb::read_k(res.frep.root), m, dsize, res.f,
                          0)},
  };
  if (opt.format == "json") {
    json out = {{"frep", factordb::to_text(res.frep.root)},
                {"tree", tree_json_of(res)},
                {"f_tree", res.f.to_string()},
                {"satisfiable", res.satisfiable}};
    if (opt.stats) out["stats"] = stats;
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << factordb::to_text(res.frep.root) << "\n";
    if (opt.stats) std::cout << stats.dump() << "\n";
  }
  return kOk;
}

int cmd_enumerate(const Options& opt) {
  factordb::Query q = factordb::parse_query_file(opt.query_file);
  factordb::Database db = factordb::load_database_dir(opt.data_dir);
  factordb::FactoriseResult res = run_factorise(opt, q, db);
  factordb::TupleCursor cursor(res.frep.root);
  factordb::Monomial m;
  size_t count = 0;
  while (cursor.next(m)) {
    if (++count > opt.monomial_limit)
      throw factordb::ResourceLimitError(
          "expansion exceeds " + std::to_string(opt.monomial_limit) +
          " tuples");
    if (!opt.count_only) std::cout << monomial_line(m) << "\n";
  }
  if (opt.count_only) std::cout << count << "\n";
  return kOk;
}

int cmd_lowerbound(const Options& opt) {
  factordb::Query q = factordb::parse_query_file(opt.query_file);
  factordb::LowerBoundDb lb = factordb::lower_bound_db(q, opt.n);
  std::filesystem::create_directories(opt.out_dir);
  for (const auto& [name, rel] : lb.db.relations)
    factordb::write_csv(rel, opt.out_dir + "/" + name + ".csv");
  factordb::AnnotatedResult result =
      factordb::brute_force_eval(q, lb.db, opt.monomial_limit);
  size_t distinct = factordb::distinct_tuples(result);
  json report = {
      {"rho_star", lb.rho.to_string()},
      {"db_size", lb.db_size},
      {"result_distinct", distinct},
      {"bound_holds", factordb::size_bound_holds(lb.rho, lb.db_size,
                                                 q.symbols.size(), distinct)},
      {"n_used", lb.n_used.get_ui()},
  };
  std::cout << report.dump(2) << "\n";
  return kOk;
}

int cmd_verify(const Options& opt) {
  factordb::Query q = factordb::parse_query_file(opt.query_file);
  factordb::Database db = factordb::load_database_dir(opt.data_dir);
  factordb::FactoriseResult res = run_factorise(opt, q, db);

  bool all_ok = true;
  auto report = [&](const std::string& law, bool ok, const std::string& note =
                                                         std::string()) {
    all_ok = all_ok && ok;
    std::cout << (ok ? "PASS " : "FAIL ") << law;
    if (!note.empty()) std::cout << " (" << note << ")";
    std::cout << "\n";
  };

  factordb::AnnotatedResult bag =
      factordb::brute_force_eval(q, db, opt.monomial_limit);

  // The expansion of the factorisation and the nested-loop join agree as
  // bags of annotated tuples.
  std::vector<factordb::Monomial> expansion =
      factordb::flatten(res.frep.root, opt.monomial_limit);
  {
    std::vector<std::string> lhs, rhs;
    for (const factordb::Monomial& m : expansion)
      lhs.push_back(monomial_line(m));
    for (const factordb::ResultRow& row : bag.rows) {
      std::string line;
      for (size_t i = 0; i < row.monomial.size(); ++i) {
        if (i) line += '*';
        line += row.monomial[i];
      }
      line += '\t';
      line += factordb::tuple_to_string(row.tuple);
      rhs.push_back(line);
    }
    std::sort(lhs.begin(), lhs.end());
    std::sort(rhs.begin(), rhs.end());
    report("expansion-matches-join", lhs == rhs,
           std::to_string(lhs.size()) + " tuples");
  }

  // Streaming the expansion yields exactly the same sequence.
  {
    factordb::TupleCursor cursor(res.frep.root);
    factordb::Monomial m;
    size_t i = 0;
    bool same = true;
    while (cursor.next(m)) {
      if (i >= expansion.size() || m.key() != expansion[i].key()) {
        same = false;
        break;
      }
      ++i;
    }
    report("stream-matches-expansion", same && i == expansion.size(),
           std::to_string(i) + " tuples");
  }

  report("well-formed", factordb::well_formed(res.frep));

  if (res.satisfiable) {
    const factordb::Query& qp = res.split_query;
    const factordb::AttrClasses& cl = res.classes;
    factordb::Database fdb = factordb::apply_constant_filter(
        db, q, factordb::split_constants(q).filter);

    // Identifier occurrence counts in the output match the per-symbol
    // distinct counts over non-relevant classes.
    {
      std::map<std::string, size_t> want =
          factordb::occurrence_counts(qp, res.tree, fdb, opt.monomial_limit);
      std::map<std::string, size_t> got;
      for (const auto& [key, cnt] :
           factordb::leaf_occurrences(res.frep.root))
        got[key.second] += cnt;
      report("occurrence-counts", want == got,
             std::to_string(want.size()) + " identifiers");
    }

    // The active-domain recursion produces the identical representation.
    {
      factordb::FRep naive = factordb::gen_naive(res.tree, qp, cl, fdb);
      report("naive-agreement",
             factordb::to_text(naive.root) ==
                 factordb::to_text(res.frep.root));
    }

    // Exact primal/dual agreement of the cover programme.
    {
      uint64_t mask =
          cl.count() >= 64 ? ~0ull : (1ull << cl.count()) - 1;
      factordb::CoverHypergraph h =
          factordb::class_set_hypergraph(qp, cl, mask);
      report("cover-duality", factordb::rho_star(h).cost ==
                                  factordb::dual_max_independent(h).cost);
    }
  } else {
    report("occurrence-counts", res.frep.root.is_empty_sum(), "empty result");
    report("naive-agreement", res.frep.root.is_empty_sum(), "empty result");
    report("cover-duality", true, "empty result");
  }

  size_t dsize = factordb::database_stats(db).size;
  int m = factordb::multiplicity(q);
  report("size-bound",
         within_power_bound(factordb::frep_size(res.frep.root), m, dsize,
                            res.f, 1));
  report("read-bound", within_power_bound(factordb::read_k(res.frep.root), m,
                                          dsize, res.f, 0));

  return all_ok ? kOk : kInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factorised representations of select-project-join results"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--monomial-limit", opt.monomial_limit,
                 "Cap on expanded tuples for guards and oracles")
      ->envname("FACTORDB_MONOMIAL_LIMIT")
      ->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", opt.verbose, "Progress notes on stderr");

  CLI::App* analyze = app.add_subcommand(
      "analyze", "Cost-optimal factorisation tree and query measures");
  analyze->add_option("-q,--query", opt.query_file, "Query file")->required();

  CLI::App* plan = app.add_subcommand(
      "plan", "Stream factorisation trees with their costs");
  plan->add_option("-q,--query", opt.query_file, "Query file")->required();
  CLI::Option* all_flag =
      plan->add_flag("--all", opt.all, "Every reduced tree (default)");
  plan->add_flag("--pruned", opt.pruned,
                 "Skip trees that a root swap provably does not worsen")
      ->excludes(all_flag);
  plan->add_option("--limit", opt.limit, "Stop after this many trees")
      ->check(CLI::PositiveNumber);

  CLI::App* factorise = app.add_subcommand(
      "factorise", "Compute the factorised representation of the result");
  factorise->add_option("-q,--query", opt.query_file, "Query file")
      ->required();
  factorise->add_option("-d,--data", opt.data_dir, "Database directory")
      ->required();
  factorise->add_option("--tree", opt.tree_file,
                        "Use this tree (JSON) instead of the optimal one");
  factorise->add_option("--format", opt.format, "Output format")
      ->check(CLI::IsMember({"text", "json"}));
  factorise->add_flag("--stats", opt.stats,
                      "Emit size, reuse and bound checks");

  CLI::App* enumerate = app.add_subcommand(
      "enumerate", "Stream the result tuples from the factorised form");
  enumerate->add_option("-q,--query", opt.query_file, "Query file")
      ->required();
  enumerate->add_option("-d,--data", opt.data_dir, "Database directory")
      ->required();
  enumerate->add_option("--tree", opt.tree_file,
                        "Use this tree (JSON) instead of the optimal one");
  enumerate->add_flag("--count-only", opt.count_only,
                      "Print only the number of tuples");

  CLI::App* verify = app.add_subcommand(
      "verify", "Check the representation laws against brute-force oracles");
  verify->add_option("-q,--query", opt.query_file, "Query file")->required();
  verify->add_option("-d,--data", opt.data_dir, "Database directory")
      ->required();
  verify->add_option("--tree", opt.tree_file, "Tree to factorise over");

  CLI::App* lowerbound = app.add_subcommand(
      "lowerbound", "Build a database witnessing the result-size lower bound");
  lowerbound->add_option("-q,--query", opt.query_file, "Query file")
      ->required();
  lowerbound->add_option("-N,--budget", opt.n, "Domain budget")
      ->required()
      ->check(CLI::PositiveNumber);
  lowerbound->add_option("-o,--out", opt.out_dir, "Output directory")
      ->required();

  for (CLI::App* sub : {analyze, plan, factorise, enumerate, verify,
                        lowerbound})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(opt);
    if (plan->parsed()) return cmd_plan(opt);
    if (factorise->parsed()) return cmd_factorise(opt);
    if (enumerate->parsed()) return cmd_enumerate(opt);
    if (verify->parsed()) return cmd_verify(opt);
    if (lowerbound->parsed()) return cmd_lowerbound(opt);
  } catch (const factordb::ParseError& e) {
    std::cerr << "factordb: " << e.what() << "\n";
    return kBadInput;
  } catch (const factordb::FormatError& e) {
    std::cerr << "factordb: " << e.what() << "\n";
    return kBadInput;
  } catch (const factordb::SchemaError& e) {
    std::cerr << "factordb: " << e.what() << "\n";
    return kBadInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "factordb: " << e.what() << "\n";
    return kBadInput;
  } catch (const factordb::ResourceLimitError& e) {
    std::cerr << "factordb: " << e.what() << "\n";
    return kResource;
  } catch (const std::exception& e) {
    std::cerr << "factordb: internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
