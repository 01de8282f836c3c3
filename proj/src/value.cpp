#include "loop2bulk/value.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <functional>

namespace l2b {

namespace {

const ValueList kEmptyList;
const FieldList kEmptyFields;

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

[[noreturn]] void type_error(const char* want, Value::Kind got) {
  throw Error("TypeMismatch", std::string("expected ") + want + ", got " + kind_name(got));
}

}  // namespace

const char* kind_name(Value::Kind k) {
  switch (k) {
    case Value::Kind::Absent: return "absent";
    case Value::Kind::Int: return "Int";
    case Value::Kind::Double: return "Double";
    case Value::Kind::Bool: return "Bool";
    case Value::Kind::String: return "String";
    case Value::Kind::Tuple: return "tuple";
    case Value::Kind::Record: return "record";
    case Value::Kind::Bag: return "bag";
  }
  return "?";
}

Value Value::integer(std::int64_t v) {
  Value r;
  r.kind_ = Kind::Int;
  r.i_ = v;
  return r;
}

Value Value::real(double v) {
  Value r;
  r.kind_ = Kind::Double;
  r.d_ = v;
  return r;
}

Value Value::boolean(bool v) {
  Value r;
  r.kind_ = Kind::Bool;
  r.i_ = v ? 1 : 0;
  return r;
}

Value Value::string(std::string v) {
  Value r;
  r.kind_ = Kind::String;
  r.s_ = std::make_shared<const std::string>(std::move(v));
  return r;
}

Value Value::tuple(ValueList items) {
  Value r;
  r.kind_ = Kind::Tuple;
  r.list_ = std::make_shared<const ValueList>(std::move(items));
  return r;
}

Value Value::pair(Value a, Value b) {
  ValueList l;
  l.reserve(2);
  l.push_back(std::move(a));
  l.push_back(std::move(b));
  return tuple(std::move(l));
}

Value Value::record(FieldList fields) {
  Value r;
  r.kind_ = Kind::Record;
  r.rec_ = std::make_shared<const FieldList>(std::move(fields));
  return r;
}

Value Value::bag(ValueList items) {
  Value r;
  r.kind_ = Kind::Bag;
  r.list_ = std::make_shared<const ValueList>(std::move(items));
  return r;
}

std::int64_t Value::as_int() const {
  if (kind_ != Kind::Int) type_error("Int", kind_);
  return i_;
}

double Value::as_double() const {
  if (kind_ == Kind::Double) return d_;
  if (kind_ == Kind::Int) return static_cast<double>(i_);
  type_error("number", kind_);
}

bool Value::as_bool() const {
  if (kind_ != Kind::Bool) type_error("Bool", kind_);
  return i_ != 0;
}

const std::string& Value::as_string() const {
  if (kind_ != Kind::String) type_error("String", kind_);
  return *s_;
}

const ValueList& Value::items() const {
  if (kind_ != Kind::Tuple && kind_ != Kind::Bag) type_error("tuple or bag", kind_);
  return list_ ? *list_ : kEmptyList;
}

const FieldList& Value::fields() const {
  if (kind_ != Kind::Record) type_error("record", kind_);
  return rec_ ? *rec_ : kEmptyFields;
}

const Value& Value::project(const std::string& name) const {
  if (kind_ == Kind::Record) {
    for (const auto& [n, v] : *rec_)
      if (n == name) return v;
    throw Error("TypeMismatch", "record has no field " + name);
  }
  if (kind_ == Kind::Tuple && name.size() > 1 && name[0] == '_') {
    std::size_t idx = std::stoul(name.substr(1));
    if (idx >= 1 && idx <= list_->size()) return (*list_)[idx - 1];
    throw Error("TypeMismatch", "tuple projection " + name + " out of range");
  }
  throw Error("TypeMismatch", "cannot project ." + name + " from " + kind_name(kind_));
}

int Value::compare(const Value& a, const Value& b) {
  if (a.kind_ != b.kind_) return a.kind_ < b.kind_ ? -1 : 1;
  switch (a.kind_) {
    case Kind::Absent: return 0;
    case Kind::Int:
    case Kind::Bool: return a.i_ < b.i_ ? -1 : (a.i_ > b.i_ ? 1 : 0);
    case Kind::Double: {
      if (a.d_ < b.d_) return -1;
      if (a.d_ > b.d_) return 1;
      if (a.d_ == b.d_) return 0;
      bool an = std::isnan(a.d_), bn = std::isnan(b.d_);
      return an == bn ? 0 : (an ? 1 : -1);
    }
    case Kind::String: return a.s_->compare(*b.s_) < 0 ? -1 : (*a.s_ == *b.s_ ? 0 : 1);
    case Kind::Tuple:
    case Kind::Bag: {
      const auto& x = a.items();
      const auto& y = b.items();
      for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        int c = compare(x[i], y[i]);
        if (c) return c;
      }
      return x.size() < y.size() ? -1 : (x.size() > y.size() ? 1 : 0);
    }
    case Kind::Record: {
      const auto& x = a.fields();
      const auto& y = b.fields();
      for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        int c = x[i].first.compare(y[i].first);
        if (c) return c < 0 ? -1 : 1;
        c = compare(x[i].second, y[i].second);
        if (c) return c;
      }
      return x.size() < y.size() ? -1 : (x.size() > y.size() ? 1 : 0);
    }
  }
  return 0;
}

std::size_t Value::hash() const {
  std::size_t h = static_cast<std::size_t>(kind_) * 0x100000001b3ULL;
  switch (kind_) {
    case Kind::Absent: return h;
    case Kind::Int:
    case Kind::Bool: return mix(h, std::hash<std::int64_t>{}(i_));
    case Kind::Double: {
      double d = d_ == 0.0 ? 0.0 : d_;
      return mix(h, std::hash<std::uint64_t>{}(std::bit_cast<std::uint64_t>(d)));
    }
    case Kind::String: return mix(h, std::hash<std::string>{}(*s_));
    case Kind::Tuple:
    case Kind::Bag:
      for (const auto& v : items()) h = mix(h, v.hash());
      return h;
    case Kind::Record:
      for (const auto& [n, v] : fields()) h = mix(mix(h, std::hash<std::string>{}(n)), v.hash());
      return h;
  }
  return h;
}

namespace {

void render(const Value& v, std::string& out) {
  switch (v.kind()) {
    case Value::Kind::Absent: out += "?"; return;
    case Value::Kind::Int: out += std::to_string(v.as_int()); return;
    case Value::Kind::Double: {
      char buf[40];
      double d = v.as_double();
      std::snprintf(buf, sizeof buf, "%.17g", d);
      std::string s = buf;
      if (std::isfinite(d) && s.find_first_of(".eE") == std::string::npos) s += ".0";
      out += s;
      return;
    }
    case Value::Kind::Bool: out += v.as_bool() ? "true" : "false"; return;
    case Value::Kind::String: out += '"' + v.as_string() + '"'; return;
    case Value::Kind::Tuple: {
      out += '(';
      bool first = true;
      for (const auto& x : v.items()) {
        if (!first) out += ',';
        first = false;
        render(x, out);
      }
      out += ')';
      return;
    }
    case Value::Kind::Record: {
      out += '<';
      bool first = true;
      for (const auto& [n, x] : v.fields()) {
        if (!first) out += ',';
        first = false;
        out += n + '=';
        render(x, out);
      }
      out += '>';
      return;
    }
    case Value::Kind::Bag: {
      out += '{';
      bool first = true;
      for (const auto& x : v.items()) {
        if (!first) out += ',';
        first = false;
        render(x, out);
      }
      out += '}';
      return;
    }
  }
}

}  // namespace

std::string Value::str() const {
  std::string out;
  render(*this, out);
  return out;
}

bool loose_equal(const Value& a, const Value& b) {
  if (a.is_numeric() && b.is_numeric() && a.kind() != b.kind())
    return a.as_double() == b.as_double();
  if (a.kind() == Value::Kind::Double && b.kind() == Value::Kind::Double)
    return a.as_double() == b.as_double();
  return a == b;
}

}  // namespace l2b
