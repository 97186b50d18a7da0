#ifndef PCT_RATIONAL_HPP
#define PCT_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

namespace pct {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Parses "p/q", an optionally signed integer, or a plain decimal ("0.25").
// Throws ParseError on anything else (scientific notation is rejected).
Rational parse_rational(const std::string& text);

// Canonical "p/q" rendering (always includes the denominator, e.g. "3/1").
std::string rational_string(const Rational& r);

// Fixed-point decimal rendering with banker's rounding (round half to even).
std::string decimal_string(const Rational& r, int places);

// The rational obtained by rounding r to `places` decimal digits,
// half to even.
Rational round_rational(const Rational& r, int places);

double to_double(const Rational& r);

}  // namespace pct

#endif  // PCT_RATIONAL_HPP
