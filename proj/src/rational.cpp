#include "mathdsl/rational.hpp"

#include <cctype>
#include <cmath>

namespace mathdsl {

namespace {

BigInt pow10(unsigned n) {
  BigInt r = 1;
  for (unsigned i = 0; i < n; ++i) r *= 10;
  return r;
}

}  // namespace

std::optional<Rational> parse_decimal(std::string_view text) {
  std::size_t i = 0;
  BigInt digits = 0;
  long long scale = 0;
  bool any = false;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    digits = digits * 10 + (text[i] - '0');
    any = true;
    ++i;
  }
  if (i < text.size() && text[i] == '.') {
    ++i;
    if (i == text.size() || !std::isdigit(static_cast<unsigned char>(text[i]))) return std::nullopt;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      digits = digits * 10 + (text[i] - '0');
      --scale;
      any = true;
      ++i;
    }
  }
  if (!any) return std::nullopt;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool negative = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
      negative = text[i] == '-';
      ++i;
    }
    long long exponent = 0;
    bool exp_digits = false;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      exponent = exponent * 10 + (text[i] - '0');
      if (exponent > 4000) return std::nullopt;
      exp_digits = true;
      ++i;
    }
    if (!exp_digits) return std::nullopt;
    scale += negative ? -exponent : exponent;
  }
  if (i != text.size()) return std::nullopt;
  if (scale >= 0) return Rational(digits * pow10(static_cast<unsigned>(scale)));
  return Rational(digits, pow10(static_cast<unsigned>(-scale)));
}

bool is_integer(const Rational& value) {
  return boost::multiprecision::denominator(value) == 1;
}

bool is_terminating_decimal(const Rational& value) {
  BigInt den = boost::multiprecision::denominator(value);
  while (den % 2 == 0) den /= 2;
  while (den % 5 == 0) den /= 5;
  return den == 1;
}

std::string rational_to_string(const Rational& value) {
  const BigInt num = boost::multiprecision::numerator(value);
  const BigInt den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();
  if (!is_terminating_decimal(value)) return num.str() + "/" + den.str();

  // Scale to an integer over 10^k.
  unsigned k = 0;
  BigInt scaled_den = den;
  BigInt scaled_num = num < 0 ? BigInt(-num) : num;
  while (scaled_den != 1) {
    BigInt q = 1;
    for (unsigned j = 0; j <= k; ++j) q *= 10;
    ++k;
    if (q % den == 0) {
      scaled_num *= q / den;
      scaled_den = 1;
    }
  }
  std::string digits = scaled_num.str();
  if (digits.size() <= k) digits.insert(0, k - digits.size() + 1, '0');
  digits.insert(digits.size() - k, ".");
  return (num < 0 ? "-" : "") + digits;
}

double rational_to_double(const Rational& value) {
  return value.convert_to<double>();
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) return Rational(0);
  int exponent = 0;
  double mantissa = std::frexp(value, &exponent);
  // mantissa * 2^53 is an exact integer.
  const auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
  exponent -= 53;
  Rational r = Rational(BigInt(scaled));
  if (exponent >= 0) {
    r *= Rational(BigInt(1) << exponent);
  } else {
    r /= Rational(BigInt(1) << -exponent);
  }
  return r;
}

}  // namespace mathdsl
