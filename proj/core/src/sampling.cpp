#include "rankone/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rankone/error.hpp"

namespace rankone {

std::string_view to_string(SequenceKind kind) noexcept {
  switch (kind) {
    case SequenceKind::polynomial:
      return "polynomial";
    case SequenceKind::nlog:
      return "nlog";
    case SequenceKind::linear:
      return "linear";
    case SequenceKind::explicit_list:
      return "explicit";
  }
  return "explicit";
}

SequenceSpec SequenceSpec::polynomial(Rational alpha, std::uint64_t horizon) {
  SequenceSpec s;
  s.kind = SequenceKind::polynomial;
  s.alpha = std::move(alpha);
  s.horizon = horizon;
  return s;
}

SequenceSpec SequenceSpec::nlog(Rational scale, Rational alpha, std::uint64_t horizon) {
  SequenceSpec s;
  s.kind = SequenceKind::nlog;
  s.scale = std::move(scale);
  s.alpha = std::move(alpha);
  s.horizon = horizon;
  return s;
}

SequenceSpec SequenceSpec::linear(std::int64_t a, std::int64_t b, std::uint64_t horizon) {
  SequenceSpec s;
  s.kind = SequenceKind::linear;
  s.a = a;
  s.b = b;
  s.horizon = horizon;
  return s;
}

SequenceSpec SequenceSpec::list(std::vector<std::uint64_t> values) {
  SequenceSpec s;
  s.kind = SequenceKind::explicit_list;
  s.horizon = values.size();
  s.values = std::move(values);
  return s;
}

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t next = text.find(sep, pos);
    parts.push_back(text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return parts;
}

std::int64_t parse_i64(std::string_view text) {
  Rational r = parse_rational(text);
  if (!is_integer(r)) throw ValidationError("expected an integer, got '" + std::string(text) + "'");
  return static_cast<std::int64_t>(floor_rational(r));
}

}  // namespace

SequenceSpec SequenceSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ValidationError("sequence spec needs 'kind:params', got '" + std::string(text) + "'");
  const std::string_view kind = text.substr(0, colon);
  std::string_view rest = text.substr(colon + 1);
  if (kind == "list") {
    std::vector<std::uint64_t> values;
    for (auto part : split(rest, ',')) {
      const std::int64_t v = parse_i64(part);
      if (v < 0) throw ValidationError("sequence values must be nonnegative");
      values.push_back(static_cast<std::uint64_t>(v));
    }
    return list(std::move(values));
  }
  std::uint64_t horizon = 1000;
  if (auto at = rest.find('@'); at != std::string_view::npos) {
    const std::int64_t h = parse_i64(rest.substr(at + 1));
    if (h < 1) throw ValidationError("sequence horizon must be positive");
    horizon = static_cast<std::uint64_t>(h);
    rest = rest.substr(0, at);
  }
  const auto params = split(rest, ':');
  if (kind == "poly" || kind == "polynomial") {
    if (params.size() != 1) throw ValidationError("poly takes one parameter: poly:alpha");
    return polynomial(parse_rational(params[0]), horizon);
  }
  if (kind == "nlog") {
    if (params.size() != 2) throw ValidationError("nlog takes two parameters: nlog:C:alpha");
    return nlog(parse_rational(params[0]), parse_rational(params[1]), horizon);
  }
  if (kind == "linear") {
    if (params.size() != 2) throw ValidationError("linear takes two parameters: linear:a:b");
    return linear(parse_i64(params[0]), parse_i64(params[1]), horizon);
  }
  throw ValidationError("unknown sequence kind '" + std::string(kind) + "'");
}

std::string SequenceSpec::describe() const {
  switch (kind) {
    case SequenceKind::polynomial:
      return "floor(n^(" + to_string(alpha) + "))";
    case SequenceKind::nlog:
      return "floor(" + to_string(scale) + " n (log n)^(" + to_string(alpha) + "))";
    case SequenceKind::linear:
      return std::to_string(a) + " n + " + std::to_string(b);
    case SequenceKind::explicit_list:
      return "explicit list of " + std::to_string(values.size()) + " terms";
  }
  return {};
}

SamplingSequence::SamplingSequence(SequenceSpec spec) : spec_(std::move(spec)) {
  if (spec_.kind == SequenceKind::explicit_list) {
    spec_.horizon = spec_.values.size();
    if (spec_.values.empty()) throw ValidationError("explicit sequence is empty");
    for (std::size_t i = 1; i < spec_.values.size(); ++i) {
      if (spec_.values[i] <= spec_.values[i - 1]) {
        throw ValidationError("explicit sequence is not strictly increasing at term " + std::to_string(i + 1));
      }
    }
    values_ = spec_.values;
    n0_ = 1;
    return;
  }
  if (spec_.horizon < 1) throw ValidationError("sequence horizon must be positive");
  if (spec_.horizon > (std::uint64_t{1} << 28)) throw ResourceGuardError("sequence horizon above 2^28 terms");

  std::vector<std::int64_t> raw(spec_.horizon + 1, -1);  // raw[0] unused
  switch (spec_.kind) {
    case SequenceKind::polynomial: {
      if (spec_.alpha <= 0) throw ValidationError("polynomial exponent must be positive");
      const bool integral = is_integer(spec_.alpha);
      for (std::uint64_t n = 1; n <= spec_.horizon; ++n) {
        BigInt v = integral ? pow_big(n, static_cast<std::uint64_t>(floor_rational(spec_.alpha)))
                            : floor_pow(BigInt(n), spec_.alpha);
        if (v > std::numeric_limits<std::int64_t>::max()) {
          throw ValidationError("t_" + std::to_string(n) + " overflows 63 bits; lower the horizon");
        }
        raw[n] = static_cast<std::int64_t>(v);
      }
      break;
    }
    case SequenceKind::nlog: {
      if (spec_.scale <= 0 || spec_.alpha <= 0) throw ValidationError("nlog needs C > 0 and alpha > 0");
      const long double c = static_cast<long double>(to_double(spec_.scale));
      const long double alpha = static_cast<long double>(to_double(spec_.alpha));
      for (std::uint64_t n = 1; n <= spec_.horizon; ++n) {
        const long double x = c * static_cast<long double>(n) * std::pow(std::log(static_cast<long double>(n)), alpha);
        if (x > 9.0e18L) throw ValidationError("t_" + std::to_string(n) + " overflows 63 bits; lower the horizon");
        raw[n] = static_cast<std::int64_t>(std::floor(x));
      }
      break;
    }
    case SequenceKind::linear: {
      if (spec_.a <= 0) throw ValidationError("linear sequence needs a >= 1");
      for (std::uint64_t n = 1; n <= spec_.horizon; ++n) {
        raw[n] = spec_.a * static_cast<std::int64_t>(n) + spec_.b;
      }
      break;
    }
    case SequenceKind::explicit_list:
      break;
  }
  // n0: smallest index from which values are nonnegative and strictly increasing
  std::uint64_t n0 = spec_.horizon;
  if (raw[n0] < 0) throw ValidationError("sequence is negative at its horizon");
  while (n0 > 1 && raw[n0 - 1] >= 0 && raw[n0 - 1] < raw[n0]) --n0;
  if (n0 == spec_.horizon && spec_.horizon > 1) {
    throw ValidationError("sequence " + spec_.describe() + " is not strictly increasing near its horizon");
  }
  n0_ = n0;
  values_.reserve(spec_.horizon - n0 + 1);
  for (std::uint64_t n = n0; n <= spec_.horizon; ++n) values_.push_back(static_cast<std::uint64_t>(raw[n]));
}

std::uint64_t SamplingSequence::generate(std::uint64_t index) const {
  if (index < n0_ || index > spec_.horizon) {
    throw ValidationError("index " + std::to_string(index) + " outside [" + std::to_string(n0_) + ", " +
                          std::to_string(spec_.horizon) + "]");
  }
  return values_[index - n0_];
}

std::uint64_t SamplingSequence::term(std::uint64_t i) const {
  if (i < 1 || i > values_.size()) {
    throw ValidationError("term " + std::to_string(i) + " outside [1, " + std::to_string(values_.size()) + "]");
  }
  return values_[i - 1];
}

std::span<const std::uint64_t> SamplingSequence::terms(std::uint64_t count) const {
  if (count > values_.size()) {
    throw ValidationError("requested " + std::to_string(count) + " terms but the sequence has " +
                          std::to_string(values_.size()) + " up to its horizon");
  }
  return std::span<const std::uint64_t>(values_.data(), count);
}

std::uint64_t max_gap(const SamplingSequence& seq, std::uint64_t n) {
  if (n < 2) throw ValidationError("max_gap needs n >= 2");
  const auto t = seq.terms(n);
  std::uint64_t best = 0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) best = std::max(best, t[i + 1] - t[i]);
  return best;
}

DilationDiagnostic dilation_diagnostic(const SamplingSequence& seq, std::uint64_t horizon) {
  if (horizon < 2) throw ValidationError("dilation diagnostic needs horizon >= 2");
  const auto t = seq.terms(horizon);
  DilationDiagnostic d;
  d.gaps.resize(horizon - 1);
  for (std::size_t i = 0; i + 1 < t.size(); ++i) d.gaps[i] = t[i + 1] - t[i];
  d.tail_min.resize(d.gaps.size());
  std::uint64_t running = d.gaps.back();
  for (std::size_t i = d.gaps.size(); i-- > 0;) {
    running = std::min(running, d.gaps[i]);
    d.tail_min[i] = running;
  }
  for (std::size_t i = 0; i + 1 < d.gaps.size(); ++i) {
    if (d.gaps[i + 1] < d.gaps[i]) ++d.gap_decreases;
  }
  const std::size_t g = d.gaps.size();
  if (g >= 4) {
    d.dilating_on_horizon = d.tail_min[g / 4] < d.tail_min[g / 2] && d.tail_min[g / 2] < d.tail_min[3 * g / 4];
  }
  return d;
}

Rational krug_K_estimate(const SamplingSequence& seq, std::uint64_t r, std::uint64_t n) {
  if (n < 1) throw ValidationError("krug_K_estimate needs n >= 1");
  const auto t = seq.terms(n);
  const std::uint64_t width = 2 * r + 1;
  // Union of the windows [t_i - r, t_i + r] over sorted centres.
  BigInt covered = width;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) covered += std::min(t[i + 1] - t[i], width);
  return Rational(covered) / Rational(BigInt(n));
}

Rational lower_density_estimate(std::span<const std::uint64_t> J, std::uint64_t n) {
  if (n < 1) throw ValidationError("density needs n >= 1");
  std::vector<std::uint64_t> in;
  for (std::uint64_t j : J) {
    if (j >= 1 && j <= n) in.push_back(j);
  }
  std::sort(in.begin(), in.end());
  in.erase(std::unique(in.begin(), in.end()), in.end());
  return Rational(BigInt(in.size())) / Rational(BigInt(n));
}

Rational lower_density_estimate(const std::function<bool(std::uint64_t)>& in_J, std::uint64_t n) {
  if (n < 1) throw ValidationError("density needs n >= 1");
  std::uint64_t count = 0;
  for (std::uint64_t j = 1; j <= n; ++j) count += in_J(j) ? 1 : 0;
  return Rational(BigInt(count)) / Rational(BigInt(n));
}

}  // namespace rankone
