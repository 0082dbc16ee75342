#pragma once

// Internal JSON helpers shared by the stacking and experiment modules.

#include <string>

#include "json.hpp"
#include "rankone/numeric.hpp"
#include "rankone/stacking.hpp"

namespace rankone::detail {

using nlohmann::json;

nlohmann::json stacking_to_json(const StackingData& sd);
StackingData stacking_from_json(const nlohmann::json& j);

// Integer field; accepts JSON integers or integer-valued strings.
std::uint64_t get_u64(const json& j, const std::string& field);
std::uint64_t get_u64_or(const json& j, const std::string& field, std::uint64_t fallback);
// Rational field; accepts JSON numbers or "p/q" / decimal strings.
Rational get_rational(const json& j, const std::string& field);
Rational get_rational_or(const json& j, const std::string& field, const Rational& fallback);
std::string get_string_or(const json& j, const std::string& field, const std::string& fallback);
Rational rational_from_json(const json& value, const std::string& field);

}  // namespace rankone::detail
