#include "pct/rational.hpp"

#include <cctype>
#include <cstdlib>

#include "pct/errors.hpp"

namespace pct {

namespace {

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

BigInt pow10(int k) {
  BigInt p = 1;
  for (int i = 0; i < k; ++i) p *= 10;
  return p;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  std::string s = text;
  bool negative = false;
  if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
    negative = (s[0] == '-');
    s = s.substr(1);
  }
  if (s.empty()) throw ParseError("empty rational literal");

  Rational value;
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    std::string num = s.substr(0, slash);
    std::string den = s.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) {
      throw ParseError("bad rational literal '" + text + "'");
    }
    BigInt d(den);
    if (d == 0) throw ParseError("zero denominator in '" + text + "'");
    value = Rational(BigInt(num), d);
  } else {
    auto dot = s.find('.');
    if (dot != std::string::npos) {
      std::string whole = s.substr(0, dot);
      std::string frac = s.substr(dot + 1);
      if (whole.empty()) whole = "0";
      if (!all_digits(whole) || !all_digits(frac)) {
        throw ParseError("bad decimal literal '" + text + "'");
      }
      BigInt scale = pow10(static_cast<int>(frac.size()));
      value = Rational(BigInt(whole) * scale + (frac.empty() ? BigInt(0) : BigInt(frac)),
                       scale);
    } else {
      if (!all_digits(s)) throw ParseError("bad integer literal '" + text + "'");
      value = Rational(BigInt(s));
    }
  }
  return negative ? -value : value;
}

std::string rational_string(const Rational& r) {
  return numerator(r).str() + "/" + denominator(r).str();
}

Rational round_rational(const Rational& r, int places) {
  bool negative = r < 0;
  Rational mag = negative ? -r : r;
  BigInt scale = pow10(places);
  BigInt n = numerator(mag) * scale;
  BigInt d = denominator(mag);
  BigInt q = n / d;
  BigInt rem = n % d;
  BigInt twice = rem * 2;
  if (twice > d || (twice == d && (q % 2) != 0)) ++q;
  Rational out(q, scale);
  return negative ? -out : out;
}

std::string decimal_string(const Rational& r, int places) {
  bool negative = r < 0;
  Rational mag = negative ? -r : r;
  BigInt scale = pow10(places);
  BigInt n = numerator(mag) * scale;
  BigInt d = denominator(mag);
  BigInt q = n / d;
  BigInt rem = n % d;
  BigInt twice = rem * 2;
  if (twice > d || (twice == d && (q % 2) != 0)) ++q;

  std::string digits = q.str();
  std::string out;
  if (places == 0) {
    out = digits;
  } else {
    if (static_cast<int>(digits.size()) <= places) {
      digits.insert(0, places + 1 - digits.size(), '0');
    }
    out = digits.substr(0, digits.size() - places) + "." +
          digits.substr(digits.size() - places);
  }
  if (negative && q != 0) out.insert(0, "-");
  return out;
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace pct
