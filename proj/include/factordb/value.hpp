#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace factordb {

// A database value: either a 64-bit integer or a byte string.
// Total order: all Int values sort before all Str values; Int compares
// numerically, Str compares bytewise.
class Value {
 public:
  enum class Type { Int, Str };

  Value() : type_(Type::Int), int_(0) {}
  static Value of_int(int64_t v) {
    Value x;
    x.type_ = Type::Int;
    x.int_ = v;
    return x;
  }
  static Value of_str(std::string v) {
    Value x;
    x.type_ = Type::Str;
    x.str_ = std::move(v);
    return x;
  }
  // Cell syntax: an optional sign followed by digits parses as Int,
  // anything else is Str.
  static Value parse_cell(const std::string& cell);

  Type type() const { return type_; }
  bool is_int() const { return type_ == Type::Int; }
  int64_t as_int() const { return int_; }
  const std::string& as_str() const { return str_; }

  std::string to_string() const;

  friend bool operator==(const Value& a, const Value& b) {
    if (a.type_ != b.type_) return false;
    return a.type_ == Type::Int ? a.int_ == b.int_ : a.str_ == b.str_;
  }
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }
  friend bool operator<(const Value& a, const Value& b) {
    if (a.type_ != b.type_) return a.type_ == Type::Int;
    return a.type_ == Type::Int ? a.int_ < b.int_ : a.str_ < b.str_;
  }
  friend bool operator>(const Value& a, const Value& b) { return b < a; }
  friend bool operator<=(const Value& a, const Value& b) { return !(b < a); }
  friend bool operator>=(const Value& a, const Value& b) { return !(a < b); }

 private:
  Type type_;
  int64_t int_ = 0;
  std::string str_;
};

using Tuple = std::vector<Value>;

std::string tuple_to_string(const Tuple& t);
bool tuple_less(const Tuple& a, const Tuple& b);

}  // namespace factordb
