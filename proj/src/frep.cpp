#include "factordb/frep.hpp"

#include <algorithm>
#include <cctype>

#include "factordb/errors.hpp"

namespace factordb {

FExpr make_leaf(std::string ident, std::optional<Tuple> tuple, int signature) {
  FExpr e;
  e.kind = FExpr::Kind::Leaf;
  e.ident = std::move(ident);
  e.tuple = std::move(tuple);
  e.signature = signature;
  return e;
}

FExpr make_sum(std::vector<FExpr> children) {
  std::vector<FExpr> kept;
  kept.reserve(children.size());
  for (FExpr& c : children)
    if (!c.is_empty_sum()) kept.push_back(std::move(c));
  if (kept.size() == 1) return std::move(kept[0]);
  FExpr e;
  e.kind = FExpr::Kind::Sum;
  e.children = std::move(kept);
  return e;
}

FExpr make_prod(std::vector<FExpr> children) {
  std::vector<FExpr> kept;
  kept.reserve(children.size());
  for (FExpr& c : children) {
    if (c.is_empty_sum()) return FExpr{};  // zero absorbs the product
    if (c.kind == FExpr::Kind::Prod) {
      for (FExpr& g : c.children) kept.push_back(std::move(g));
    } else {
      kept.push_back(std::move(c));
    }
  }
  if (kept.size() == 1) return std::move(kept[0]);
  FExpr e;
  e.kind = FExpr::Kind::Prod;
  e.children = std::move(kept);
  return e;
}

size_t frep_size(const FExpr& e) {
  if (e.kind == FExpr::Kind::Leaf) return 1;
  size_t n = 0;
  for (const FExpr& c : e.children) n += frep_size(c);
  return n;
}

namespace {

void count_leaves(const FExpr& e,
                  std::map<std::pair<int, std::string>, size_t>& counts) {
  if (e.kind == FExpr::Kind::Leaf) {
    ++counts[{e.signature, e.ident}];
    return;
  }
  for (const FExpr& c : e.children) count_leaves(c, counts);
}

}  // namespace

size_t read_k(const FExpr& e) {
  std::map<std::pair<int, std::string>, size_t> per_leaf;
  count_leaves(e, per_leaf);
  std::map<std::string, size_t> per_ident;
  for (const auto& [key, n] : per_leaf) per_ident[key.second] += n;
  size_t k = 0;
  for (const auto& [_, n] : per_ident) k = std::max(k, n);
  return k;
}

std::map<std::pair<int, std::string>, size_t> leaf_occurrences(
    const FExpr& e) {
  std::map<std::pair<int, std::string>, size_t> counts;
  count_leaves(e, counts);
  return counts;
}

FExpr polynomial(const FExpr& e) {
  FExpr out = e;
  if (out.kind == FExpr::Kind::Leaf) {
    out.tuple.reset();
  } else {
    for (FExpr& c : out.children) c = polynomial(c);
  }
  return out;
}

Tuple Monomial::concat_tuple() const {
  std::vector<const MonomialFactor*> fs;
  fs.reserve(factors.size());
  for (const MonomialFactor& f : factors) fs.push_back(&f);
  std::stable_sort(fs.begin(), fs.end(),
                   [](const MonomialFactor* a, const MonomialFactor* b) {
                     return a->signature < b->signature;
                   });
  Tuple t;
  for (const MonomialFactor* f : fs)
    if (f->tuple)
      t.insert(t.end(), f->tuple->begin(), f->tuple->end());
  return t;
}

std::string Monomial::key() const {
  std::vector<std::string> parts;
  parts.reserve(factors.size());
  for (const MonomialFactor& f : factors) {
    std::string p = f.ident;
    if (f.tuple) {
      p += '<';
      p += tuple_to_string(*f.tuple);
      p += '>';
    }
    parts.push_back(std::move(p));
  }
  std::sort(parts.begin(), parts.end());
  std::string key;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) key += '*';
    key += parts[i];
  }
  return key;
}

namespace {

void flatten_into(const FExpr& e, std::vector<Monomial>& out, size_t limit,
                  size_t& built) {
  auto charge = [&](size_t n) {
    built += n;
    if (built > limit)
      throw ResourceLimitError("flatten exceeded the monomial limit of " +
                               std::to_string(limit));
  };
  switch (e.kind) {
    case FExpr::Kind::Leaf: {
      charge(1);
      Monomial m;
      m.factors.push_back({e.signature, e.ident, e.tuple});
      out.push_back(std::move(m));
      return;
    }
    case FExpr::Kind::Sum: {
      for (const FExpr& c : e.children) flatten_into(c, out, limit, built);
      return;
    }
    case FExpr::Kind::Prod: {
      std::vector<Monomial> acc(1);
      for (const FExpr& c : e.children) {
        std::vector<Monomial> part;
        flatten_into(c, part, limit, built);
        std::vector<Monomial> next;
        next.reserve(acc.size() * part.size());
        charge(acc.size() * part.size());
        for (const Monomial& a : acc)
          for (const Monomial& p : part) {
            Monomial m = a;
            m.factors.insert(m.factors.end(), p.factors.begin(),
                             p.factors.end());
            next.push_back(std::move(m));
          }
        acc = std::move(next);
      }
      for (Monomial& m : acc) out.push_back(std::move(m));
      return;
    }
  }
}

}  // namespace

std::vector<Monomial> flatten(const FExpr& e, size_t limit) {
  std::vector<Monomial> out;
  size_t built = 0;
  flatten_into(e, out, limit, built);
  return out;
}

bool equivalent(const FExpr& a, const FExpr& b, size_t limit) {
  std::vector<Monomial> ma = flatten(a, limit);
  std::vector<Monomial> mb = flatten(b, limit);
  if (ma.size() != mb.size()) return false;
  std::vector<std::string> ka, kb;
  ka.reserve(ma.size());
  kb.reserve(mb.size());
  for (const Monomial& m : ma) ka.push_back(m.key());
  for (const Monomial& m : mb) kb.push_back(m.key());
  std::sort(ka.begin(), ka.end());
  std::sort(kb.begin(), kb.end());
  return ka == kb;
}

namespace {

void leaf_text(const FExpr& e, std::string& out) {
  out += e.ident;
  if (e.tuple) {
    out += '<';
    out += tuple_to_string(*e.tuple);
    out += '>';
  }
}

void text_rec(const FExpr& e, std::string& out, bool parenthesize_sum) {
  switch (e.kind) {
    case FExpr::Kind::Leaf:
      leaf_text(e, out);
      return;
    case FExpr::Kind::Prod: {
      if (e.children.empty()) {
        out += '1';
        return;
      }
      for (size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += '*';
        text_rec(e.children[i], out, /*parenthesize_sum=*/true);
      }
      return;
    }
    case FExpr::Kind::Sum: {
      if (e.children.empty()) {
        out += '0';
        return;
      }
      if (parenthesize_sum) out += '(';
      for (size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += '+';
        text_rec(e.children[i], out, /*parenthesize_sum=*/true);
      }
      if (parenthesize_sum) out += ')';
      return;
    }
  }
}

}  // namespace

std::string to_text(const FExpr& e) {
  std::string out;
  text_rec(e, out, /*parenthesize_sum=*/false);
  return out;
}

namespace {

FExpr sorted_copy(const FExpr& e) {
  if (e.kind == FExpr::Kind::Leaf) return e;
  FExpr out = e;
  for (FExpr& c : out.children) c = sorted_copy(c);
  std::stable_sort(out.children.begin(), out.children.end(),
                   [](const FExpr& a, const FExpr& b) {
                     return to_text(a) < to_text(b);
                   });
  return out;
}

}  // namespace

std::string canonical_text(const FExpr& e) { return to_text(sorted_copy(e)); }

namespace {

class FRepParser {
 public:
  FRepParser(const std::string& text, int (*resolve)(const std::string&))
      : text_(text), resolve_(resolve) {}

  FExpr parse() {
    FExpr e = parse_sum();
    skip_ws();
    if (pos_ != text_.size())
      throw ParseError("trailing input after expression", pos_);
    return e;
  }

 private:
  FExpr parse_sum() {
    skip_ws();
    if (peek() == '0') {
      ++pos_;
      return FExpr{};
    }
    std::vector<FExpr> terms;
    terms.push_back(parse_prod());
    while (skip_ws(), peek() == '+') {
      ++pos_;
      terms.push_back(parse_prod());
    }
    if (terms.size() == 1) return std::move(terms[0]);
    return make_sum(std::move(terms));
  }

  FExpr parse_prod() {
    skip_ws();
    if (peek() == '1') {
      ++pos_;
      return make_prod({});
    }
    std::vector<FExpr> factors;
    factors.push_back(parse_atom());
    while (skip_ws(), peek() == '*') {
      ++pos_;
      factors.push_back(parse_atom());
    }
    if (factors.size() == 1) return std::move(factors[0]);
    return make_prod(std::move(factors));
  }

  FExpr parse_atom() {
    skip_ws();
    char c = peek();
    if (c == '(') {
      ++pos_;
      FExpr e = parse_sum();
      skip_ws();
      if (peek() != ')') throw ParseError("expected ')'", pos_);
      ++pos_;
      return e;
    }
    if (!std::isalpha(static_cast<unsigned char>(c)) && c != '_')
      throw ParseError("expected identifier or '('", pos_);
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_'))
      ++pos_;
    std::string ident = text_.substr(start, pos_ - start);
    std::optional<Tuple> tuple;
    if (pos_ < text_.size() && text_[pos_] == '<') {
      ++pos_;
      Tuple t;
      if (peek() != '>') {
        t.push_back(parse_value());
        while (peek() == ',') {
          ++pos_;
          t.push_back(parse_value());
        }
      }
      if (peek() != '>') throw ParseError("expected '>'", pos_);
      ++pos_;
      tuple = std::move(t);
    }
    int sig = resolve_ ? resolve_(ident) : -1;
    return make_leaf(std::move(ident), std::move(tuple), sig);
  }

  Value parse_value() {
    size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != '>')
      ++pos_;
    return Value::parse_cell(text_.substr(start, pos_ - start));
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  const std::string& text_;
  int (*resolve_)(const std::string&);
  size_t pos_ = 0;
};

}  // namespace

FExpr parse_frep(const std::string& text) {
  return FRepParser(text, nullptr).parse();
}

FExpr parse_frep(const std::string& text, int (*resolve)(const std::string&)) {
  return FRepParser(text, resolve).parse();
}

namespace {

// Returns the signature set covered by e as a sorted vector; nullopt marks
// the empty sum (compatible with every set).
std::optional<std::vector<int>> cover_of(const FExpr& e, size_t n_sigs,
                                         const std::vector<Signature>& sigs,
                                         bool& ok, std::string* why) {
  auto complain = [&](const std::string& msg) {
    ok = false;
    if (why && why->empty()) *why = msg;
  };
  switch (e.kind) {
    case FExpr::Kind::Leaf: {
      if (e.signature < 0 || static_cast<size_t>(e.signature) >= n_sigs) {
        complain("leaf '" + e.ident + "' has no valid signature");
        return std::nullopt;
      }
      if (e.tuple &&
          e.tuple->size() != sigs[e.signature].schema.size()) {
        complain("leaf '" + e.ident + "' arity mismatch");
        return std::nullopt;
      }
      return std::vector<int>{e.signature};
    }
    case FExpr::Kind::Prod: {
      std::vector<int> all;
      for (const FExpr& c : e.children) {
        auto sub = cover_of(c, n_sigs, sigs, ok, why);
        if (!ok) return std::nullopt;
        if (!sub) {
          complain("empty sum inside a product");
          return std::nullopt;
        }
        all.insert(all.end(), sub->begin(), sub->end());
      }
      std::sort(all.begin(), all.end());
      if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
        complain("product children overlap in signatures");
        return std::nullopt;
      }
      return all;
    }
    case FExpr::Kind::Sum: {
      std::optional<std::vector<int>> common;
      for (const FExpr& c : e.children) {
        auto sub = cover_of(c, n_sigs, sigs, ok, why);
        if (!ok) return std::nullopt;
        if (!sub) continue;
        if (!common)
          common = sub;
        else if (*common != *sub) {
          complain("sum children cover different signature sets");
          return std::nullopt;
        }
      }
      return common;  // nullopt for the empty sum
    }
  }
  return std::nullopt;
}

}  // namespace

bool well_formed(const FRep& rep, std::string* why) {
  bool ok = true;
  if (why) why->clear();
  cover_of(rep.root, rep.signatures.size(), rep.signatures, ok, why);
  return ok;
}

TupleCursor::TupleCursor(const FExpr& e) : root_(&e) {
  // Collect sums in pre-order.
  std::vector<const FExpr*> stack{root_};
  std::vector<const FExpr*> order;
  while (!stack.empty()) {
    const FExpr* n = stack.back();
    stack.pop_back();
    if (n->kind == FExpr::Kind::Sum) order.push_back(n);
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it)
      stack.push_back(&*it);
  }
  for (const FExpr* n : order) {
    sum_index_[n] = sums_.size();
    sums_.push_back({n, 0, false});
  }
  if (root_->is_empty_sum()) done_ = true;
}

void TupleCursor::scan(const FExpr* node, Monomial* out) {
  ++steps_;
  switch (node->kind) {
    case FExpr::Kind::Leaf:
      if (out) out->factors.push_back({node->signature, node->ident, node->tuple});
      return;
    case FExpr::Kind::Prod:
      for (const FExpr& c : node->children) scan(&c, out);
      return;
    case FExpr::Kind::Sum: {
      SumState& st = sums_[sum_index_.at(node)];
      st.enabled = true;
      if (!node->children.empty()) scan(&node->children[st.pointer], out);
      return;
    }
  }
}

bool TupleCursor::next(Monomial& out) {
  if (done_) return false;
  size_t start_steps = steps_;
  out.factors.clear();

  if (!started_) {
    started_ = true;
  } else {
    // Advance the last enabled sum; on wrap, reset it and move to the
    // previous enabled sum.
    size_t i = sums_.size();
    bool advanced = false;
    while (i-- > 0) {
      ++steps_;
      if (!sums_[i].enabled) continue;
      if (sums_[i].pointer + 1 < sums_[i].node->children.size()) {
        ++sums_[i].pointer;
        advanced = true;
        break;
      }
      sums_[i].pointer = 0;
    }
    if (!advanced) {
      done_ = true;
      last_steps_ = steps_ - start_steps;
      max_steps_ = std::max(max_steps_, last_steps_);
      return false;
    }
  }

  for (SumState& st : sums_) {
    ++steps_;
    st.enabled = false;
  }
  scan(root_, &out);
  ++yielded_;
  last_steps_ = steps_ - start_steps;
  max_steps_ = std::max(max_steps_, last_steps_);
  return true;
}

}  // namespace factordb
