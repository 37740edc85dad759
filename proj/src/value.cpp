#include "factordb/value.hpp"

#include <cctype>
#include <cstdlib>

namespace factordb {

Value Value::parse_cell(const std::string& cell) {
  if (cell.empty()) return of_str(cell);
  size_t i = (cell[0] == '+' || cell[0] == '-') ? 1 : 0;
  if (i == cell.size()) return of_str(cell);
  for (size_t j = i; j < cell.size(); ++j)
    if (!std::isdigit(static_cast<unsigned char>(cell[j]))) return of_str(cell);
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(cell.c_str(), &end, 10);
  if (errno != 0 || end != cell.c_str() + cell.size()) return of_str(cell);
  return of_int(v);
}

std::string Value::to_string() const {
  return type_ == Type::Int ? std::to_string(int_) : str_;
}

std::string tuple_to_string(const Tuple& t) {
  std::string out;
  for (size_t i = 0; i < t.size(); ++i) {
    if (i) out += ',';
    out += t[i].to_string();
  }
  return out;
}

bool tuple_less(const Tuple& a, const Tuple& b) {
  size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i) {
    if (a[i] < b[i]) return true;
    if (b[i] < a[i]) return false;
  }
  return a.size() < b.size();
}

}  // namespace factordb
