#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace divfield {

using i128 = __int128;

inline std::string to_string(i128 v) {
  if (v == 0) return "0";
  const bool neg = v < 0;
  std::string out;
  while (v != 0) {
    int digit = static_cast<int>(v % 10);
    if (digit < 0) digit = -digit;
    out.insert(out.begin(), static_cast<char>('0' + digit));
    v /= 10;
  }
  if (neg) out.insert(out.begin(), '-');
  return out;
}

inline i128 parse_i128(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty integer literal");
  std::size_t i = 0;
  bool neg = false;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    i = 1;
  }
  if (i == s.size()) throw std::invalid_argument("bad integer literal: " + s);
  i128 v = 0;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("bad integer literal: " + s);
    v = v * 10 + (s[i] - '0');
  }
  return neg ? -v : v;
}

/// Exact rational number over 128-bit integers, always kept in lowest terms
/// with a positive denominator.
///
/// The probabilities handled by this library have denominators dividing
/// (2^n - 1)^2 with n <= 31, so every intermediate product used by the
/// comparison and addition routines stays below 2^126.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(implicit)
  Rational(i128 num, i128 den) : num_(num), den_(den) {
    if (den_ == 0) throw std::domain_error("rational with zero denominator");
    normalize();
  }

  i128 num() const { return num_; }
  i128 den() const { return den_; }

  double to_double() const {
    return static_cast<long double>(num_) / static_cast<long double>(den_);
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    const i128 g = gcd(a.den_, b.den_);
    return Rational(a.num_ * (b.den_ / g) + b.num_ * (a.den_ / g), a.den_ / g * b.den_);
  }
  friend Rational operator-(const Rational& a) {
    Rational r = a;
    r.num_ = -r.num_;
    return r;
  }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    const i128 g1 = gcd(a.num_, b.den_);
    const i128 g2 = gcd(b.num_, a.den_);
    return Rational((a.num_ / g1) * (b.num_ / g2), (a.den_ / g2) * (b.den_ / g1));
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("rational division by zero");
    return a * Rational(b.den_, b.num_);
  }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    // Subtraction keeps the products small: common denominator via gcd.
    const i128 diff = (a - b).num_;
    if (diff < 0) return std::strong_ordering::less;
    if (diff > 0) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  friend Rational abs(const Rational& r) { return r.num_ < 0 ? -r : r; }

  std::string str() const {
    return den_ == 1 ? to_string(num_) : to_string(num_) + "/" + to_string(den_);
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  static i128 gcd(i128 a, i128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      const i128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const i128 g = gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
    if (num_ == 0) den_ = 1;
  }

  i128 num_ = 0;
  i128 den_ = 1;
};

}  // namespace divfield
