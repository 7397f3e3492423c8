#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

namespace causalqa {

enum class ValueType { Bool, Int, Real, Label };

/// A sampled or computed quantity: boolean, integer, real or categorical label.
using Value = std::variant<bool, std::int64_t, double, std::string>;

ValueType type_of(const Value& v) noexcept;
std::string_view type_name(ValueType t) noexcept;
bool is_numeric(ValueType t) noexcept;

/// Numeric view of a value; booleans count as 0/1. Throws on labels.
double as_number(const Value& v);

/// Text form used when a value is substituted into a question.  Reals are
/// printed with `decimals` fixed digits when decimals >= 0, otherwise with the
/// shortest representation that round-trips.
std::string render_value(const Value& v, int decimals = -1);

}  // namespace causalqa
