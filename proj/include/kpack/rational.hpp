#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <optional>
#include <string>

namespace kpack {

using Rational = boost::rational<std::int64_t>;

// Parses "num/den" or a plain integer. Throws PreconditionError on junk.
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& q);

std::int64_t floor_of(const Rational& q);
std::int64_t ceil_of(const Rational& q);

// Exact square root when numerator and denominator are perfect squares.
std::optional<Rational> exact_sqrt(const Rational& q);

}  // namespace kpack
