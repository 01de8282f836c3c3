#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace l2b {

// Runtime error with a short machine-readable code (IndexUnset, DuplicateKey, ...).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

class Value;
using ValueList = std::vector<Value>;
using FieldList = std::vector<std::pair<std::string, Value>>;

class Value {
 public:
  enum class Kind : std::uint8_t { Absent, Int, Double, Bool, String, Tuple, Record, Bag };

  Value() = default;

  static Value absent() { return Value(); }
  static Value integer(std::int64_t v);
  static Value real(double v);
  static Value boolean(bool v);
  static Value string(std::string v);
  static Value tuple(ValueList items);
  static Value pair(Value a, Value b);
  static Value unit() { return tuple({}); }
  static Value record(FieldList fields);
  static Value bag(ValueList items);

  Kind kind() const { return kind_; }
  bool is_absent() const { return kind_ == Kind::Absent; }
  bool is_numeric() const { return kind_ == Kind::Int || kind_ == Kind::Double; }
  bool is_bag() const { return kind_ == Kind::Bag; }
  bool is_tuple() const { return kind_ == Kind::Tuple; }
  bool is_record() const { return kind_ == Kind::Record; }

  std::int64_t as_int() const;
  double as_double() const;  // Int promotes
  bool as_bool() const;
  const std::string& as_string() const;
  const ValueList& items() const;  // tuple or bag elements
  const FieldList& fields() const;
  std::size_t size() const { return items().size(); }
  const Value& operator[](std::size_t i) const { return items()[i]; }

  // `_1`.. on tuples, named fields on records.
  const Value& project(const std::string& name) const;

  bool operator==(const Value& o) const { return compare(*this, o) == 0; }
  bool operator!=(const Value& o) const { return !(*this == o); }
  bool operator<(const Value& o) const { return compare(*this, o) < 0; }

  // Total structural order; Int and Double are distinct kinds here.
  static int compare(const Value& a, const Value& b);
  std::size_t hash() const;
  std::string str() const;

 private:
  Kind kind_ = Kind::Absent;
  std::int64_t i_ = 0;
  double d_ = 0.0;
  std::shared_ptr<const std::string> s_;
  std::shared_ptr<const ValueList> list_;
  std::shared_ptr<const FieldList> rec_;
};

struct ValueHash {
  std::size_t operator()(const Value& v) const { return v.hash(); }
};

const char* kind_name(Value::Kind k);

// Numeric-aware equality used by `==` in programs: 1 == 1.0 holds.
bool loose_equal(const Value& a, const Value& b);

}  // namespace l2b
