#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace waitk {

/// Exact non-negative rational. Delay formulas floor-divide by the catch-up
/// factor, and the floor is discontinuous, so gamma is kept exact instead of
/// rounding through a double.
struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (d <= 0) throw std::invalid_argument("Rational: denominator must be positive");
    if (n < 0) throw std::invalid_argument("Rational: negative value");
    reduce();
  }

  static Rational from_int(std::int64_t n) { return Rational(n, 1); }

  /// Parses "3", "3/4" or a plain decimal such as "0.85" without going
  /// through floating point.
  static Rational parse(const std::string& text);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  Rational inverse() const {
    if (num == 0) throw std::invalid_argument("Rational: inverse of zero");
    return Rational(den, num);
  }
  bool positive() const { return num > 0; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }

 private:
  void reduce() {
    const std::int64_t g = std::gcd(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
};

/// floor(x / gamma) for non-negative integer x, computed exactly.
inline std::int64_t floor_div_by(std::int64_t x, const Rational& gamma) {
  if (x < 0) throw std::invalid_argument("floor_div_by: negative numerator");
  if (!gamma.positive()) throw std::invalid_argument("floor_div_by: gamma must be positive");
  return (x * gamma.den) / gamma.num;
}

inline Rational Rational::parse(const std::string& text) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const std::int64_t n = std::stoll(text.substr(0, slash));
    const std::int64_t d = std::stoll(text.substr(slash + 1));
    return Rational(n, d);
  }
  const auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(std::stoll(text), 1);
  const std::string whole = text.substr(0, dot);
  const std::string frac = text.substr(dot + 1);
  if (frac.size() > 15) throw std::invalid_argument("Rational::parse: too many decimal digits");
  std::int64_t den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  const std::int64_t w = whole.empty() ? 0 : std::stoll(whole);
  const std::int64_t f = frac.empty() ? 0 : std::stoll(frac);
  return Rational(w * den + f, den);
}

}  // namespace waitk
