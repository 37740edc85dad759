#include "factordb/rational.hpp"

#include <stdexcept>

namespace factordb {

Rational Rational::parse(const std::string& text) {
  size_t slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(mpq_class(mpz_class(text)));
    mpz_class num(text.substr(0, slash));
    mpz_class den(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Rational(num, den);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("not a rational: '" + text + "'");
  }
}

std::string Rational::to_string() const {
  if (is_integer()) return num().get_str();
  return num().get_str() + "/" + den().get_str();
}

mpz_class int_pow(const mpz_class& base, unsigned long exp) {
  mpz_class out;
  mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), exp);
  return out;
}

mpz_class ceil_root(const mpz_class& n, unsigned long d) {
  if (n <= 0) return 0;
  mpz_class root;
  int exact = mpz_root(root.get_mpz_t(), n.get_mpz_t(), d);  // floor root
  if (!exact) root += 1;
  return root;
}

}  // namespace factordb
