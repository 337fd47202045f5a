#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>

#include "icas/error.hpp"

namespace icas {

/// Exact non-overflowing (for layout-scale magnitudes) fraction on 128-bit
/// integers, always stored reduced with a positive denominator.
class Rational {
public:
  using Int = __int128;

  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(implicit)
  Rational(Int n, Int d) : num_(n), den_(d) {
    if (d == 0) throw Error("rational with zero denominator");
    normalize();
  }

  Int num() const { return num_; }
  Int den() const { return den_; }
  double to_double() const { return static_cast<double>(static_cast<long double>(num_) / static_cast<long double>(den_)); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    const Int g = gcd(a.den_, b.den_);
    return {a.num_ * (b.den_ / g) + b.num_ * (a.den_ / g), a.den_ / g * b.den_};
  }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + Rational(-b.num_, b.den_); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    const Int g1 = gcd(abs(a.num_), b.den_), g2 = gcd(abs(b.num_), a.den_);
    return {(a.num_ / g1) * (b.num_ / g2), (a.den_ / g2) * (b.den_ / g1)};
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw Error("rational division by zero");
    return a * Rational(b.den_, b.num_);
  }
  friend bool operator==(const Rational& a, const Rational& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const Int l = a.num_ * b.den_, r = b.num_ * a.den_;
    return l < r ? std::strong_ordering::less : l > r ? std::strong_ordering::greater : std::strong_ordering::equal;
  }

  std::string str() const { return to_string(num_) + "/" + to_string(den_); }
  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
  static Int abs(Int v) { return v < 0 ? -v : v; }
  static Int gcd(Int a, Int b) {
    a = abs(a);
    b = abs(b);
    while (b != 0) {
      const Int t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }
  static std::string to_string(Int v) {
    if (v == 0) return "0";
    const bool neg = v < 0;
    std::string s;
    while (v != 0) {
      const int digit = static_cast<int>(v % 10);
      s.insert(s.begin(), static_cast<char>('0' + (digit < 0 ? -digit : digit)));
      v /= 10;
    }
    return neg ? "-" + s : s;
  }
  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const Int g = gcd(num_, den_);
    num_ /= g;
    den_ /= g;
  }

  Int num_ = 0;
  Int den_ = 1;
};

}  // namespace icas
