#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>

#include "fairmed/errors.hpp"

namespace fairmed {

// Exact rational with 64-bit components. Fairness bound checks multiply a
// rational by a point count and compare against another count; all of that
// goes through 128-bit cross-multiplication, never floating point.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n) : num(n), den(1) {}  // NOLINT: implicit by design
  Rational(long long n, long long d) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den == 0) throw StructuralError("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  // this * s <= x, exactly.
  bool times_le(long long s, long long x) const {
    return static_cast<__int128>(num) * s <= static_cast<__int128>(x) * den;
  }
  // this * s >= x, exactly.
  bool times_ge(long long s, long long x) const {
    return static_cast<__int128>(num) * s >= static_cast<__int128>(x) * den;
  }

  double to_double() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }

  std::string to_string() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
  }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den <
           static_cast<__int128>(b.num) * a.den;
  }
  friend bool operator<=(const Rational& a, const Rational& b) {
    return a == b || a < b;
  }
};

// Parses "p/q", an integer, or a decimal string. Decimal strings are
// converted digit-by-digit so that e.g. "0.4" becomes exactly 2/5; binary
// floating point never enters the picture.
inline Rational parse_rational(std::string_view s) {
  auto fail = [&] {
    throw IngestError("cannot parse rational: '" + std::string(s) + "'");
  };
  if (s.empty()) fail();
  bool negative = false;
  std::size_t i = 0;
  if (s[0] == '+' || s[0] == '-') {
    negative = s[0] == '-';
    i = 1;
  }
  auto slash = s.find('/');
  if (slash != std::string_view::npos) {
    if (slash <= i || slash + 1 >= s.size()) fail();
    long long num = 0, den = 0;
    for (std::size_t j = i; j < slash; ++j) {
      if (s[j] < '0' || s[j] > '9') fail();
      num = num * 10 + (s[j] - '0');
      if (num > (1LL << 56)) fail();
    }
    for (std::size_t j = slash + 1; j < s.size(); ++j) {
      if (s[j] < '0' || s[j] > '9') fail();
      den = den * 10 + (s[j] - '0');
      if (den > (1LL << 56)) fail();
    }
    if (den == 0) fail();
    return Rational(negative ? -num : num, den);
  }
  long long num = 0;
  long long den = 1;
  bool seen_digit = false;
  bool seen_dot = false;
  int frac_digits = 0;
  for (std::size_t j = i; j < s.size(); ++j) {
    char c = s[j];
    if (c == '.') {
      if (seen_dot) fail();
      seen_dot = true;
      continue;
    }
    if (c < '0' || c > '9') fail();
    seen_digit = true;
    num = num * 10 + (c - '0');
    if (seen_dot) {
      den *= 10;
      if (++frac_digits > 15) fail();
    }
    if (num > (1LL << 56)) fail();
  }
  if (!seen_digit) fail();
  return Rational(negative ? -num : num, den);
}

}  // namespace fairmed
