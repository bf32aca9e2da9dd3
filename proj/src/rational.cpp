#include "issy/rational.hpp"

namespace issy {

// Accepts the <nat> and <rat> token shapes (digits, digits.digits).
Rational Rational::parse_decimal(const std::string& s) {
  auto dot = s.find('.');
  if (dot == std::string::npos) return Rational(std::stoll(s));
  int64_t whole = dot == 0 ? 0 : std::stoll(s.substr(0, dot));
  std::string frac = s.substr(dot + 1);
  int64_t den = 1;
  for (size_t i = 0; i < frac.size(); ++i) {
    int64_t d;
    if (__builtin_mul_overflow(den, static_cast<int64_t>(10), &d))
      throw overflow_error();
    den = d;
  }
  int64_t fnum = frac.empty() ? 0 : std::stoll(frac);
  return Rational(whole) + Rational(fnum, den);
}

int64_t Rational::euclid_mod(int64_t a, int64_t m) {
  if (m == 0) throw std::domain_error("mod by zero");
  int64_t am = m < 0 ? -m : m;
  int64_t r = a % am;
  if (r < 0) r += am;
  return r;
}

int64_t Rational::euclid_div(int64_t a, int64_t m) {
  // a = m * div + mod with 0 <= mod < |m|
  return (a - euclid_mod(a, m)) / m;
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

int64_t lcm_chk(int64_t a, int64_t b) {
  if (a == 0 || b == 0) return 0;
  int64_t g = std::gcd(a < 0 ? -a : a, b < 0 ? -b : b);
  int64_t r;
  if (__builtin_mul_overflow(a / g, b, &r)) throw overflow_error();
  return r < 0 ? -r : r;
}

}  // namespace issy
