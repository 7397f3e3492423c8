#include "causalqa/value.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace causalqa {

ValueType type_of(const Value& v) noexcept { return static_cast<ValueType>(v.index()); }

std::string_view type_name(ValueType t) noexcept {
  switch (t) {
    case ValueType::Bool: return "bool";
    case ValueType::Int: return "int";
    case ValueType::Real: return "real";
    case ValueType::Label: return "label";
  }
  return "?";
}

bool is_numeric(ValueType t) noexcept { return t != ValueType::Label; }

double as_number(const Value& v) {
  switch (v.index()) {
    case 0: return std::get<bool>(v) ? 1.0 : 0.0;
    case 1: return static_cast<double>(std::get<std::int64_t>(v));
    case 2: return std::get<double>(v);
    default: throw std::invalid_argument("label value used as a number");
  }
}

std::string render_value(const Value& v, int decimals) {
  switch (v.index()) {
    case 0: return std::get<bool>(v) ? "true" : "false";
    case 1: return std::to_string(std::get<std::int64_t>(v));
    case 2: {
      const double d = std::get<double>(v);
      char buf[64];
      if (decimals >= 0) {
        std::snprintf(buf, sizeof buf, "%.*f", decimals, d);
        return buf;
      }
      auto res = std::to_chars(buf, buf + sizeof buf, d);
      return std::string(buf, res.ptr);
    }
    default: return std::get<std::string>(v);
  }
}

}  // namespace causalqa
