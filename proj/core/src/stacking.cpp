#include "rankone/stacking.hpp"

#include "json_io.hpp"
#include "rankone/error.hpp"

namespace rankone {

std::string_view to_string(SpacerDistribution d) noexcept {
  switch (d) {
    case SpacerDistribution::uniform:
      return "uniform";
    case SpacerDistribution::bernoulli:
      return "bernoulli";
  }
  return "uniform";
}

std::uint32_t spacer_alphabet(const StackingData& sd, const SeededSpacers& seeded) {
  if (seeded.distribution == SpacerDistribution::bernoulli) return 2;
  if (!sd.spacer_cap) throw ValidationError("uniform seeded spacers need a finite spacer_cap");
  return *sd.spacer_cap;
}

void validate(const StackingData& sd) {
  if (sd.initial_height == 0) throw ValidationError("initial_height must be positive");
  if (sd.spacer_cap && *sd.spacer_cap == 0) throw ValidationError("spacer_cap must be positive");
  for (std::size_t idx = 0; idx < sd.stages.size(); ++idx) {
    const Stage& st = sd.stages[idx];
    const std::string where = "stage " + std::to_string(idx + 1) + ": ";
    if (st.q < 2) throw ValidationError(where + "q must be at least 2");
    if (const auto* list = std::get_if<std::vector<std::uint32_t>>(&st.spacers)) {
      if (list->size() != st.q - 1) {
        throw ValidationError(where + "expected " + std::to_string(st.q - 1) + " spacers, got " +
                              std::to_string(list->size()));
      }
      if (sd.spacer_cap) {
        for (std::size_t i = 0; i < list->size(); ++i) {
          if ((*list)[i] > *sd.spacer_cap - 1) {
            throw ValidationError(where + "spacer " + std::to_string(i + 1) + " = " + std::to_string((*list)[i]) +
                                  " exceeds spacer_cap - 1 = " + std::to_string(*sd.spacer_cap - 1));
          }
        }
      }
    } else {
      const auto& seeded = std::get<SeededSpacers>(st.spacers);
      if (seeded.distribution == SpacerDistribution::uniform && !sd.spacer_cap) {
        throw ValidationError(where + "distribution 'uniform' requires spacer_cap");
      }
      if (seeded.distribution == SpacerDistribution::bernoulli && sd.spacer_cap && *sd.spacer_cap < 2) {
        throw ValidationError(where + "distribution 'bernoulli' requires spacer_cap >= 2");
      }
    }
  }
}

StackingData squaring_heights(std::uint64_t initial_height, std::size_t stage_count) {
  StackingData sd;
  sd.initial_height = initial_height;
  sd.spacer_cap = 1;
  std::uint64_t h = initial_height;
  for (std::size_t i = 0; i < stage_count; ++i) {
    const auto next = checked_mul(h, h);
    if (!next) throw ValidationError("squaring heights overflow 64 bits before stage " + std::to_string(i + 2));
    Stage st;
    st.q = h;
    st.spacers = std::vector<std::uint32_t>(h - 1, 0U);
    sd.stages.push_back(std::move(st));
    h = *next;
  }
  return sd;
}

std::string to_json_text(const StackingData& sd) { return detail::stacking_to_json(sd).dump(2); }

StackingData stacking_from_json_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("stacking data is not valid JSON: ") + e.what());
  }
  return detail::stacking_from_json(j);
}

namespace detail {

json stacking_to_json(const StackingData& sd) {
  json j;
  j["initial_height"] = sd.initial_height;
  if (sd.spacer_cap) j["spacer_cap"] = *sd.spacer_cap;
  j["stages"] = json::array();
  for (const Stage& st : sd.stages) {
    json s;
    s["q"] = st.q;
    if (const auto* list = std::get_if<std::vector<std::uint32_t>>(&st.spacers)) {
      s["spacers"] = *list;
    } else {
      const auto& seeded = std::get<SeededSpacers>(st.spacers);
      s["seed"] = seeded.seed;
      s["distribution"] = std::string(to_string(seeded.distribution));
    }
    j["stages"].push_back(std::move(s));
  }
  return j;
}

std::uint64_t get_u64(const json& j, const std::string& field) {
  if (!j.is_object() || !j.contains(field)) throw ValidationError("missing field '" + field + "'");
  const json& v = j.at(field);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) throw ValidationError("field '" + field + "' must be nonnegative");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  if (v.is_string()) {
    const Rational r = rational_from_json(v, field);
    if (!is_integer(r) || r < 0) throw ValidationError("field '" + field + "' must be a nonnegative integer");
    auto u = to_u64(floor_rational(r));
    if (!u) throw ValidationError("field '" + field + "' exceeds 64 bits");
    return *u;
  }
  throw ValidationError("field '" + field + "' must be a nonnegative integer");
}

std::uint64_t get_u64_or(const json& j, const std::string& field, std::uint64_t fallback) {
  return j.contains(field) ? get_u64(j, field) : fallback;
}

Rational rational_from_json(const json& v, const std::string& field) {
  try {
    if (v.is_number_unsigned()) return Rational(BigInt(v.get<std::uint64_t>()));
    if (v.is_number_integer()) return Rational(BigInt(v.get<std::int64_t>()));
    if (v.is_number_float()) return rational_from_double(v.get<double>());
    if (v.is_string()) return parse_rational(v.get<std::string>());
  } catch (const ValidationError& e) {
    throw ValidationError("field '" + field + "': " + e.what());
  }
  throw ValidationError("field '" + field + "' must be a number or a \"p/q\" string");
}

Rational get_rational(const json& j, const std::string& field) {
  if (!j.is_object() || !j.contains(field)) throw ValidationError("missing field '" + field + "'");
  return rational_from_json(j.at(field), field);
}

Rational get_rational_or(const json& j, const std::string& field, const Rational& fallback) {
  return j.contains(field) ? get_rational(j, field) : fallback;
}

std::string get_string_or(const json& j, const std::string& field, const std::string& fallback) {
  if (!j.contains(field)) return fallback;
  if (!j.at(field).is_string()) throw ValidationError("field '" + field + "' must be a string");
  return j.at(field).get<std::string>();
}

StackingData stacking_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("stacking data must be an object");
  StackingData sd;
  sd.initial_height = get_u64(j, "initial_height");
  if (j.contains("spacer_cap") && !j.at("spacer_cap").is_null()) {
    const json& cap = j.at("spacer_cap");
    if (!cap.is_number_integer() || cap.get<std::int64_t>() <= 0 || cap.get<std::int64_t>() > 0xFFFFFFFFLL) {
      throw ValidationError("field 'spacer_cap' must be a positive integer");
    }
    sd.spacer_cap = static_cast<std::uint32_t>(cap.get<std::int64_t>());
  }
  if (!j.contains("stages") || !j.at("stages").is_array()) throw ValidationError("missing array field 'stages'");
  std::size_t idx = 0;
  for (const json& s : j.at("stages")) {
    ++idx;
    const std::string where = "stages[" + std::to_string(idx - 1) + "]";
    Stage st;
    try {
      st.q = get_u64(s, "q");
      if (s.contains("spacers")) {
        if (!s.at("spacers").is_array()) throw ValidationError("field 'spacers' must be an array");
        std::vector<std::uint32_t> list;
        for (const json& a : s.at("spacers")) {
          if (!a.is_number_integer() || a.get<std::int64_t>() < 0 || a.get<std::int64_t>() > 0xFFFFFFFFLL) {
            throw ValidationError("spacer counts must be nonnegative integers");
          }
          list.push_back(static_cast<std::uint32_t>(a.get<std::int64_t>()));
        }
        st.spacers = std::move(list);
      } else if (s.contains("seed")) {
        SeededSpacers seeded;
        seeded.seed = get_u64(s, "seed");
        const std::string dist = get_string_or(s, "distribution", "uniform");
        if (dist == "uniform") {
          seeded.distribution = SpacerDistribution::uniform;
        } else if (dist == "bernoulli") {
          seeded.distribution = SpacerDistribution::bernoulli;
        } else {
          throw ValidationError("field 'distribution' must be 'uniform' or 'bernoulli'");
        }
        st.spacers = seeded;
      } else {
        throw ValidationError("needs 'spacers' or 'seed'");
      }
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    sd.stages.push_back(std::move(st));
  }
  validate(sd);
  return sd;
}

}  // namespace detail

}  // namespace rankone
