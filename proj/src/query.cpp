#include "factordb/query.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "factordb/errors.hpp"

namespace factordb {

std::string Query::qualified_name(int attr) const {
  const Attr& a = attrs[attr];
  return symbols[a.symbol].name + "." + a.column;
}

int Query::find_attr(int symbol, const std::string& column) const {
  for (int a : symbols[symbol].attrs)
    if (attrs[a].column == column) return a;
  return -1;
}

int Query::symbol_index(const std::string& name) const {
  for (size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i].name == name) return static_cast<int>(i);
  return -1;
}

namespace {

enum class Tok { Name, Int, Str, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  size_t pos;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, tok_.pos);
  }

 private:
  void advance() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    tok_.pos = pos_;
    if (pos_ >= text_.size()) {
      tok_ = {Tok::End, "", pos_};
      return;
    }
    char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_'))
        ++pos_;
      tok_ = {Tok::Name, text_.substr(start, pos_ - start), start};
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        ((c == '-' || c == '+') && pos_ + 1 < text_.size() &&
         std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
      size_t start = pos_++;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
      tok_ = {Tok::Int, text_.substr(start, pos_ - start), start};
      return;
    }
    if (c == '"') {
      size_t start = ++pos_;
      while (pos_ < text_.size() && text_[pos_] != '"') ++pos_;
      if (pos_ >= text_.size())
        throw ParseError("unterminated string literal", start - 1);
      tok_ = {Tok::Str, text_.substr(start, pos_ - start), start - 1};
      ++pos_;
      return;
    }
    ++pos_;
    tok_ = {Tok::Punct, std::string(1, c), pos_ - 1};
  }

  const std::string& text_;
  size_t pos_ = 0;
  Token tok_;
};

struct RawRef {
  std::string qualifier;  // empty when bare
  std::string name;
  size_t pos;
};

struct RawCond {
  RawRef lhs;
  bool rhs_is_ref = false;
  RawRef rhs_ref;
  Value rhs_value;
};

struct RawSymbol {
  std::string base;
  std::string alias;  // empty when none
  size_t pos;
};

struct RawQuery {
  std::vector<std::pair<std::string, std::vector<std::string>>> decls;
  bool head_star = false;
  std::vector<RawRef> head;
  std::vector<RawCond> conds;
  std::vector<RawSymbol> product;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lex_(text) {}

  RawQuery parse() {
    RawQuery rq;
    while (lex_.peek().kind == Tok::Name && lex_.peek().text == "rel")
      rq.decls.push_back(parse_decl());
    expect_name("Q");
    expect_punct("=");
    expect_name("pi");
    expect_punct("[");
    if (lex_.peek().kind == Tok::Punct && lex_.peek().text == "*") {
      lex_.take();
      rq.head_star = true;
    } else {
      rq.head.push_back(parse_ref());
      while (try_punct(",")) rq.head.push_back(parse_ref());
    }
    expect_punct("]");
    expect_name("sel");
    expect_punct("[");
    if (!(lex_.peek().kind == Tok::Punct && lex_.peek().text == "]")) {
      rq.conds.push_back(parse_cond());
      while (try_punct(",")) rq.conds.push_back(parse_cond());
    }
    expect_punct("]");
    expect_punct("(");
    rq.product.push_back(parse_symbol());
    while (lex_.peek().kind == Tok::Name && lex_.peek().text == "x") {
      lex_.take();
      rq.product.push_back(parse_symbol());
    }
    expect_punct(")");
    if (lex_.peek().kind != Tok::End) lex_.fail("trailing input after query");
    return rq;
  }

 private:
  std::pair<std::string, std::vector<std::string>> parse_decl() {
    lex_.take();  // rel
    std::string name = expect_any_name("relation name");
    expect_punct("(");
    std::vector<std::string> cols;
    cols.push_back(expect_any_name("column name"));
    while (try_punct(",")) cols.push_back(expect_any_name("column name"));
    expect_punct(")");
    return {name, cols};
  }

  RawRef parse_ref() {
    Token t = lex_.peek();
    std::string first = expect_any_name("attribute");
    if (try_punct(".")) {
      std::string second = expect_any_name("attribute");
      return {first, second, t.pos};
    }
    return {"", first, t.pos};
  }

  RawCond parse_cond() {
    RawCond c;
    c.lhs = parse_ref();
    expect_punct("=");
    const Token& t = lex_.peek();
    if (t.kind == Tok::Int) {
      c.rhs_value = Value::of_int(std::stoll(lex_.take().text));
    } else if (t.kind == Tok::Str) {
      c.rhs_value = Value::of_str(lex_.take().text);
    } else if (t.kind == Tok::Name) {
      c.rhs_is_ref = true;
      c.rhs_ref = parse_ref();
    } else {
      lex_.fail("expected attribute or literal after '='");
    }
    return c;
  }

  RawSymbol parse_symbol() {
    Token t = lex_.peek();
    std::string base = expect_any_name("relation name");
    RawSymbol s{base, "", t.pos};
    if (lex_.peek().kind == Tok::Name && lex_.peek().text == "as") {
      lex_.take();
      s.alias = expect_any_name("alias");
    }
    return s;
  }

  std::string expect_any_name(const std::string& what) {
    if (lex_.peek().kind != Tok::Name) lex_.fail("expected " + what);
    return lex_.take().text;
  }

  void expect_name(const std::string& name) {
    if (lex_.peek().kind != Tok::Name || lex_.peek().text != name)
      lex_.fail("expected '" + name + "'");
    lex_.take();
  }

  void expect_punct(const std::string& p) {
    if (lex_.peek().kind != Tok::Punct || lex_.peek().text != p)
      lex_.fail("expected '" + p + "'");
    lex_.take();
  }

  bool try_punct(const std::string& p) {
    if (lex_.peek().kind == Tok::Punct && lex_.peek().text == p) {
      lex_.take();
      return true;
    }
    return false;
  }

  Lexer lex_;
};

int resolve_ref(const Query& q, const RawRef& ref) {
  if (!ref.qualifier.empty()) {
    int s = q.symbol_index(ref.qualifier);
    if (s < 0)
      throw ParseError("unknown symbol '" + ref.qualifier + "'", ref.pos);
    int a = q.find_attr(s, ref.name);
    if (a < 0)
      throw ParseError(
          "unknown attribute '" + ref.qualifier + "." + ref.name + "'",
          ref.pos);
    return a;
  }
  for (size_t s = 0; s < q.symbols.size(); ++s) {
    int a = q.find_attr(static_cast<int>(s), ref.name);
    if (a >= 0) return a;
  }
  throw ParseError("unknown attribute '" + ref.name + "'", ref.pos);
}

}  // namespace

Query parse_query(const std::string& text) {
  RawQuery rq = Parser(text).parse();

  std::map<std::string, std::vector<std::string>> decls;
  for (auto& [name, cols] : rq.decls) {
    std::set<std::string> seen(cols.begin(), cols.end());
    if (seen.size() != cols.size())
      throw ParseError("duplicate column in declaration of '" + name + "'", 0);
    if (!decls.emplace(name, cols).second)
      throw ParseError("relation '" + name + "' declared twice", 0);
  }

  Query q;
  for (const RawSymbol& rs : rq.product) {
    QuerySymbol sym;
    sym.base = rs.base;
    sym.name = rs.alias.empty() ? rs.base : rs.alias;
    if (q.symbol_index(sym.name) >= 0)
      throw ParseError("symbol '" + sym.name +
                           "' appears twice; alias repeated relations",
                       rs.pos);
    q.symbols.push_back(std::move(sym));
  }

  // Column sets: declared schema when available, otherwise qualified mentions
  // in order of first mention.
  std::vector<std::vector<std::string>> cols(q.symbols.size());
  std::vector<bool> declared(q.symbols.size(), false);
  for (size_t i = 0; i < q.symbols.size(); ++i) {
    auto it = decls.find(q.symbols[i].base);
    if (it != decls.end()) {
      cols[i] = it->second;
      declared[i] = true;
    }
  }
  auto mention = [&](const RawRef& ref) {
    if (ref.qualifier.empty()) return;
    int s = q.symbol_index(ref.qualifier);
    if (s < 0)
      throw ParseError("unknown symbol '" + ref.qualifier + "'", ref.pos);
    auto& cs = cols[s];
    if (std::find(cs.begin(), cs.end(), ref.name) != cs.end()) return;
    if (declared[s])
      throw ParseError("unknown attribute '" + ref.qualifier + "." + ref.name +
                           "'",
                       ref.pos);
    cs.push_back(ref.name);
  };
  for (const RawRef& r : rq.head) mention(r);
  for (const RawCond& c : rq.conds) {
    mention(c.lhs);
    if (c.rhs_is_ref) mention(c.rhs_ref);
  }

  for (size_t i = 0; i < q.symbols.size(); ++i) {
    for (const std::string& col : cols[i]) {
      q.symbols[i].attrs.push_back(static_cast<int>(q.attrs.size()));
      q.attrs.push_back({static_cast<int>(i), col});
    }
  }
  if (q.symbols.size() > 64)
    throw ParseError("more than 64 symbols are not supported", 0);

  if (rq.head_star) {
    q.head_all = true;
    q.head.resize(q.attrs.size());
    std::iota(q.head.begin(), q.head.end(), 0);
  } else {
    std::set<int> head;
    for (const RawRef& r : rq.head) head.insert(resolve_ref(q, r));
    q.head.assign(head.begin(), head.end());
  }

  for (const RawCond& c : rq.conds) {
    int lhs = resolve_ref(q, c.lhs);
    if (c.rhs_is_ref)
      q.equalities.emplace_back(lhs, resolve_ref(q, c.rhs_ref));
    else
      q.constant_eqs.emplace_back(lhs, c.rhs_value);
  }
  return q;
}

Query parse_query_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_query(buf.str());
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

AttrClasses attribute_classes(const Query& q) {
  UnionFind uf(q.attrs.size());
  for (auto [a, b] : q.equalities) uf.unite(a, b);

  std::vector<char> pinned(q.attrs.size(), 0);
  for (int a : q.constant_attrs) pinned[a] = 1;

  std::map<int, std::vector<int>> groups;
  for (size_t a = 0; a < q.attrs.size(); ++a)
    if (!pinned[a])
      groups[uf.find(static_cast<int>(a))].push_back(static_cast<int>(a));

  std::vector<std::pair<std::string, std::vector<int>>> named;
  for (auto& [_, members] : groups) {
    std::string canon = q.qualified_name(members[0]);
    for (int a : members) canon = std::min(canon, q.qualified_name(a));
    named.emplace_back(std::move(canon), std::move(members));
  }
  std::sort(named.begin(), named.end());

  AttrClasses cl;
  cl.class_of.assign(q.attrs.size(), -1);
  for (auto& [canon, members] : named) {
    int id = cl.count();
    uint64_t owners = 0;
    for (int a : members) {
      cl.class_of[a] = id;
      owners |= uint64_t{1} << q.attrs[a].symbol;
    }
    cl.members.push_back(std::move(members));
    cl.owners.push_back(owners);
    cl.canonical.push_back(canon);
  }
  return cl;
}

bool is_hierarchical(const Query& q) {
  AttrClasses cl = attribute_classes(q);
  for (int i = 0; i < cl.count(); ++i)
    for (int j = i + 1; j < cl.count(); ++j) {
      uint64_t a = cl.owners[i], b = cl.owners[j];
      uint64_t common = a & b;
      if (common != 0 && common != a && common != b) return false;
    }
  return true;
}

ConstantSplit split_constants(const Query& q) {
  UnionFind uf(q.attrs.size());
  for (auto [a, b] : q.equalities) uf.unite(a, b);

  ConstantSplit out;
  out.q_prime = q;
  out.q_prime.constant_eqs.clear();

  std::map<int, Value> forced;  // class root -> constant
  for (const auto& [attr, value] : q.constant_eqs) {
    int root = uf.find(attr);
    auto it = forced.find(root);
    if (it == forced.end())
      forced.emplace(root, value);
    else if (!(it->second == value))
      out.satisfiable = false;
  }

  out.q_prime.equalities.clear();
  for (auto [a, b] : q.equalities)
    if (!forced.count(uf.find(a))) out.q_prime.equalities.emplace_back(a, b);

  for (size_t a = 0; a < q.attrs.size(); ++a) {
    auto it = forced.find(uf.find(static_cast<int>(a)));
    if (it != forced.end()) {
      out.filter.emplace_back(static_cast<int>(a), it->second);
      out.q_prime.constant_attrs.push_back(static_cast<int>(a));
    }
  }
  return out;
}

const Relation& relation_for_symbol(const Database& db, const Query& q,
                                    int symbol) {
  const QuerySymbol& sym = q.symbols[symbol];
  auto it = db.relations.find(sym.name);
  if (it != db.relations.end()) return it->second;
  return db.at(sym.base);
}

void check_schema(const Database& db, const Query& q) {
  for (size_t i = 0; i < q.symbols.size(); ++i) {
    const Relation& rel = relation_for_symbol(db, q, static_cast<int>(i));
    for (int a : q.symbols[i].attrs)
      if (rel.column_index(q.attrs[a].column) < 0)
        throw SchemaError("relation '" + rel.name + "' has no column '" +
                          q.attrs[a].column + "' required by symbol '" +
                          q.symbols[i].name + "'");
  }
}

Database apply_constant_filter(
    const Database& db, const Query& q,
    const std::vector<std::pair<int, Value>>& filter) {
  std::vector<std::vector<std::pair<std::string, Value>>> per_symbol(
      q.symbols.size());
  for (const auto& [attr, value] : filter)
    per_symbol[q.attrs[attr].symbol].emplace_back(q.attrs[attr].column, value);

  Database out;
  for (size_t i = 0; i < q.symbols.size(); ++i) {
    const Relation& src = relation_for_symbol(db, q, static_cast<int>(i));
    Relation dst;
    dst.name = q.symbols[i].name;
    dst.columns = src.columns;
    for (const Row& row : src.rows) {
      bool keep = true;
      for (const auto& [column, value] : per_symbol[i]) {
        int c = src.column_index(column);
        if (c < 0)
          throw SchemaError("relation '" + src.name + "' has no column '" +
                            column + "'");
        if (!(row.tuple[c] == value)) {
          keep = false;
          break;
        }
      }
      if (keep) dst.rows.push_back(row);
    }
    out.relations.emplace(dst.name, std::move(dst));
  }
  return out;
}

int multiplicity(const Query& q) {
  std::map<std::string, int> count;
  int m = 0;
  for (const QuerySymbol& s : q.symbols) m = std::max(m, ++count[s.base]);
  return m;
}

}  // namespace factordb
