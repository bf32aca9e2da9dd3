#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace issy {

// Raised when exact arithmetic leaves the int64 range. Callers that can
// degrade (the SMT backend) turn this into an `unknown` verdict.
struct overflow_error : std::runtime_error {
  overflow_error() : std::runtime_error("rational overflow") {}
};

// Exact rational with int64 numerator/denominator, always normalized
// (gcd 1, denominator > 0).
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(int64_t n) : num_(n), den_(1) {}
  Rational(int64_t n, int64_t d) : num_(n), den_(d) { normalize(); }

  int64_t num() const { return num_; }
  int64_t den() const { return den_; }
  bool is_integer() const { return den_ == 1; }
  bool is_zero() const { return num_ == 0; }
  bool is_negative() const { return num_ < 0; }

  static Rational parse_decimal(const std::string& digits_dot_digits);

  Rational operator+(const Rational& o) const {
    return Rational(add_chk(mul_chk(num_, o.den_), mul_chk(o.num_, den_)),
                    mul_chk(den_, o.den_));
  }
  Rational operator-(const Rational& o) const {
    return Rational(sub_chk(mul_chk(num_, o.den_), mul_chk(o.num_, den_)),
                    mul_chk(den_, o.den_));
  }
  Rational operator*(const Rational& o) const {
    return Rational(mul_chk(num_, o.num_), mul_chk(den_, o.den_));
  }
  Rational operator/(const Rational& o) const {
    if (o.num_ == 0) throw std::domain_error("rational division by zero");
    return Rational(mul_chk(num_, o.den_), mul_chk(den_, o.num_));
  }
  Rational operator-() const { return Rational(neg_chk(num_), den_); }

  bool operator==(const Rational& o) const {
    return num_ == o.num_ && den_ == o.den_;
  }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const {
    return cmp(o) < 0;
  }
  bool operator<=(const Rational& o) const { return cmp(o) <= 0; }
  bool operator>(const Rational& o) const { return cmp(o) > 0; }
  bool operator>=(const Rational& o) const { return cmp(o) >= 0; }

  Rational abs() const { return num_ < 0 ? -*this : *this; }

  // Largest integer <= value / smallest integer >= value.
  int64_t floor() const {
    int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) --q;
    return q;
  }
  int64_t ceil() const {
    int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ > 0) ++q;
    return q;
  }

  // Euclidean mod for integers: result in [0, |m|).
  static int64_t euclid_mod(int64_t a, int64_t m);
  static int64_t euclid_div(int64_t a, int64_t m);

  std::string to_string() const;

 private:
  int cmp(const Rational& o) const {
    // den_ > 0 on both sides, so cross-multiplication keeps order.
    __int128 l = static_cast<__int128>(num_) * o.den_;
    __int128 r = static_cast<__int128>(o.num_) * den_;
    return l < r ? -1 : (l > r ? 1 : 0);
  }

  static int64_t add_chk(int64_t a, int64_t b) {
    int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw overflow_error();
    return r;
  }
  static int64_t sub_chk(int64_t a, int64_t b) {
    int64_t r;
    if (__builtin_sub_overflow(a, b, &r)) throw overflow_error();
    return r;
  }
  static int64_t mul_chk(int64_t a, int64_t b) {
    int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw overflow_error();
    return r;
  }
  static int64_t neg_chk(int64_t a) { return sub_chk(0, a); }

  void normalize() {
    if (den_ == 0) throw std::domain_error("rational with zero denominator");
    if (den_ < 0) {
      num_ = neg_chk(num_);
      den_ = neg_chk(den_);
    }
    uint64_t a = num_ < 0 ? 0ull - static_cast<uint64_t>(num_)
                          : static_cast<uint64_t>(num_);
    uint64_t g = std::gcd(a, static_cast<uint64_t>(den_));
    if (g > 1) {
      num_ /= static_cast<int64_t>(g);
      den_ /= static_cast<int64_t>(g);
    }
  }

  int64_t num_;
  int64_t den_;
};

int64_t lcm_chk(int64_t a, int64_t b);

}  // namespace issy
