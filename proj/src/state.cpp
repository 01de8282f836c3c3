#include "loop2bulk/state.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace l2b {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == '\t') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string format_scalar(const Value& v) {
  if (v.kind() == Value::Kind::String) return v.as_string();
  return v.str();
}

}  // namespace

std::size_t column_count(const Type& t) {
  switch (t.kind) {
    case Type::Kind::Tuple:
    case Type::Kind::Record: {
      std::size_t n = 0;
      for (const auto& a : t.args) n += column_count(*a);
      return n;
    }
    default: return 1;
  }
}

Value parse_columns(const Type& t, const std::vector<std::string>& cols, std::size_t& pos) {
  if (t.kind == Type::Kind::Tuple || t.kind == Type::Kind::Record) {
    ValueList items;
    for (const auto& a : t.args) items.push_back(parse_columns(*a, cols, pos));
    if (t.kind == Type::Kind::Tuple) return Value::tuple(std::move(items));
    FieldList fields;
    for (std::size_t i = 0; i < items.size(); ++i) fields.push_back({t.fields[i], items[i]});
    return Value::record(std::move(fields));
  }
  if (pos >= cols.size()) throw Error("InputError", "too few columns");
  const std::string& c = cols[pos++];
  try {
    switch (t.kind) {
      case Type::Kind::Int: return Value::integer(std::stoll(c));
      case Type::Kind::Double: return Value::real(std::stod(c));
      case Type::Kind::Bool: return Value::boolean(c == "true" || c == "1");
      case Type::Kind::String: return Value::string(c);
      default: break;
    }
  } catch (const std::logic_error&) {
    throw Error("InputError", "cannot parse '" + c + "' as " + t.str());
  }
  throw Error("InputError", "nested collections are not supported");
}

void format_columns(const Type& t, const Value& v, std::vector<std::string>& out) {
  if (t.kind == Type::Kind::Tuple) {
    for (std::size_t i = 0; i < t.args.size(); ++i) format_columns(*t.args[i], v[i], out);
    return;
  }
  if (t.kind == Type::Kind::Record) {
    for (std::size_t i = 0; i < t.args.size(); ++i)
      format_columns(*t.args[i], v.project(t.fields[i]), out);
    return;
  }
  out.push_back(format_scalar(v));
}

namespace {

Type int_type() {
  Type t;
  t.kind = Type::Kind::Int;
  return t;
}

Value read_collection(const Type& t, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("InputError", "cannot open " + path);
  const Type& elem = *t.element();
  std::size_t width = column_count(elem);
  std::size_t key_width = t.kind == Type::Kind::Matrix ? 2
                          : t.kind == Type::Kind::Map ? column_count(*t.args[0])
                                                      : 1;
  ValueList items;
  std::string line;
  std::int64_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    std::size_t pos = 0;
    Value key;
    if (t.kind == Type::Kind::Vector && cols.size() == width) {
      key = Value::integer(row);  // implicit index
    } else if (t.kind == Type::Kind::Matrix) {
      Type it = int_type();
      Value i = parse_columns(it, cols, pos);
      Value j = parse_columns(it, cols, pos);
      key = Value::pair(i, j);
    } else if (t.kind == Type::Kind::Map) {
      key = parse_columns(*t.args[0], cols, pos);
    } else {
      Type it = int_type();
      key = parse_columns(it, cols, pos);
    }
    if (cols.size() != pos + width)
      throw Error("InputError", path + ": expected " + std::to_string(key_width + width) +
                                    " columns, got " + std::to_string(cols.size()));
    items.push_back(Value::pair(key, parse_columns(elem, cols, pos)));
    ++row;
  }
  return Value::bag(std::move(items));
}

}  // namespace

Env load_inputs(const SourceProgram& p, const std::string& dir) {
  namespace fs = std::filesystem;
  Env env;
  std::map<std::string, std::string> scalars;
  fs::path sp = fs::path(dir) / "scalars.tsv";
  if (fs::exists(sp)) {
    std::ifstream in(sp);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto cols = split_tabs(line);
      if (cols.size() < 2) throw Error("InputError", "bad line in scalars.tsv: " + line);
      scalars[cols[0]] = cols[1];
    }
  }
  for (const auto& in : p.inputs) {
    if (in.type->is_collection()) {
      env[in.name] = read_collection(*in.type, (fs::path(dir) / (in.name + ".tsv")).string());
    } else {
      auto it = scalars.find(in.name);
      if (it == scalars.end()) throw Error("InputError", "missing scalar input " + in.name);
      std::vector<std::string> cols = split_tabs(it->second);
      std::size_t pos = 0;
      env[in.name] = parse_columns(*in.type, cols, pos);
    }
  }
  return env;
}

void write_inputs(const SourceProgram& p, const Env& env, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream scal(fs::path(dir) / "scalars.tsv");
  for (const auto& in : p.inputs) {
    auto it = env.find(in.name);
    if (it == env.end()) throw Error("InputError", "no value for input " + in.name);
    if (!in.type->is_collection()) {
      std::vector<std::string> cols;
      format_columns(*in.type, it->second, cols);
      scal << in.name << '\t' << cols[0] << '\n';
      continue;
    }
    std::ofstream out(fs::path(dir) / (in.name + ".tsv"));
    Value sorted = sorted_bag(it->second);
    for (const auto& kv : sorted.items()) {
      std::vector<std::string> cols;
      const Value& k = kv[0];
      if (in.type->kind == Type::Kind::Matrix) {
        cols.push_back(k[0].str());
        cols.push_back(k[1].str());
      } else if (in.type->kind == Type::Kind::Map) {
        format_columns(*in.type->args[0], k, cols);
      } else {
        cols.push_back(k.str());
      }
      format_columns(*in.type->element(), kv[1], cols);
      for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "\t" : "") << cols[i];
      out << '\n';
    }
  }
}

Value sorted_bag(const Value& bag) {
  ValueList items = bag.items();
  std::sort(items.begin(), items.end());
  return Value::bag(std::move(items));
}

std::string serialize_value(const Value& v, bool collection) {
  if (!collection) return v.str() + "\n";
  std::vector<std::string> lines;
  for (const auto& kv : v.items()) {
    if (kv.is_tuple() && kv.size() == 2)
      lines.push_back(kv[0].str() + "\t" + kv[1].str());
    else
      lines.push_back(kv.str());
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::string serialize_env(const Env& env) {
  std::string out;
  for (const auto& [name, v] : env) {
    if (v.is_bag()) {
      std::istringstream lines(serialize_value(v, true));
      std::string l;
      while (std::getline(lines, l)) out += name + "\t" + l + "\n";
    } else {
      out += name + "\t" + v.str() + "\n";
    }
  }
  return out;
}

}  // namespace l2b
