#include "kpack/rational.hpp"

#include <cmath>
#include <string>

#include "kpack/errors.hpp"

namespace kpack {

namespace {

std::int64_t parse_int(const std::string& s, const std::string& whole) {
  if (s.empty()) throw PreconditionError("empty rational: '" + whole + "'");
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw PreconditionError("not a rational: '" + whole + "'");
  }
  if (pos != s.size()) throw PreconditionError("not a rational: '" + whole + "'");
  return v;
}

std::optional<std::int64_t> isqrt_exact(std::int64_t v) {
  if (v < 0) return std::nullopt;
  auto r = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<long double>(v))));
  for (std::int64_t c = std::max<std::int64_t>(0, r - 2); c <= r + 2; ++c)
    if (c * c == v) return c;
  return std::nullopt;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  if (slash == std::string::npos) return Rational(parse_int(text, text));
  auto num = parse_int(text.substr(0, slash), text);
  auto den = parse_int(text.substr(slash + 1), text);
  if (den == 0) throw PreconditionError("zero denominator: '" + text + "'");
  return Rational(num, den);
}

std::string to_string(const Rational& q) {
  if (q.denominator() == 1) return std::to_string(q.numerator());
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

std::int64_t floor_of(const Rational& q) {
  auto n = q.numerator(), d = q.denominator();
  auto f = n / d;
  if ((n % d != 0) && (n < 0)) --f;
  return f;
}

std::int64_t ceil_of(const Rational& q) { return -floor_of(-q); }

std::optional<Rational> exact_sqrt(const Rational& q) {
  auto a = isqrt_exact(q.numerator());
  auto b = isqrt_exact(q.denominator());
  if (!a || !b) return std::nullopt;
  return Rational(*a, *b);
}

}  // namespace kpack
