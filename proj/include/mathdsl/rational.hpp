#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace mathdsl {

// Exact coefficients for literals and symbolic normal forms.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Parses decimal syntax "12", "0.25", "1e-3", "2.5E+4" exactly.
std::optional<Rational> parse_decimal(std::string_view text);

// Terminating decimal when the denominator is 2^a 5^b, otherwise "p/q".
std::string rational_to_string(const Rational& value);

// True when the rational has a finite decimal expansion.
bool is_terminating_decimal(const Rational& value);

double rational_to_double(const Rational& value);

// Exact binary value of a finite double.
Rational rational_from_double(double value);

bool is_integer(const Rational& value);

}  // namespace mathdsl
