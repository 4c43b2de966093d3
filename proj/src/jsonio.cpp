#include "switchreg/jsonio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "switchreg/errors.hpp"

namespace switchreg {

namespace {

void indent(std::ostream& os, int depth) {
  for (int k = 0; k < depth; ++k) os << "  ";
}

void dump(const json& j, std::ostream& os, int depth) {
  switch (j.type()) {
    case json::value_t::null:
      os << "null";
      return;
    case json::value_t::boolean:
      os << (j.get<bool>() ? "true" : "false");
      return;
    case json::value_t::number_integer:
    case json::value_t::number_unsigned:
    case json::value_t::string:
      os << j.dump();
      return;
    case json::value_t::number_float: {
      double v = j.get<double>();
      if (!std::isfinite(v)) {
        os << "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << buf;
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (size_t k = 0; k < j.size(); ++k) {
        indent(os, depth + 1);
        dump(j[k], os, depth + 1);
        os << (k + 1 < j.size() ? ",\n" : "\n");
      }
      indent(os, depth);
      os << "]";
      return;
    }
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      size_t k = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++k) {
        indent(os, depth + 1);
        os << json(it.key()).dump() << ": ";
        dump(it.value(), os, depth + 1);
        os << (k + 1 < j.size() ? ",\n" : "\n");
      }
      indent(os, depth);
      os << "}";
      return;
    }
    default:
      os << "null";
      return;
  }
}

}  // namespace

void write_json(const json& j, std::ostream& os) {
  dump(j, os, 0);
  os << '\n';
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw GridError("cannot open " + path + " for writing");
  write_json(j, f);
}

}  // namespace switchreg
