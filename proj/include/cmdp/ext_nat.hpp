#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>

#include "cmdp/error.hpp"

namespace cmdp {

// Extended naturals {0, 1, ..., inf}. Addition saturates at infinity and
// throws OverflowError instead of wrapping on finite operands.
class ExtNat {
 public:
  using value_type = std::uint64_t;

  constexpr ExtNat() = default;
  constexpr explicit ExtNat(value_type v) : v_(v) {
    if (v == kInf) throw OverflowError("ExtNat: value out of range");
  }

  static constexpr ExtNat infinity() {
    ExtNat x;
    x.v_ = kInf;
    return x;
  }

  constexpr bool is_infinite() const { return v_ == kInf; }
  constexpr bool is_finite() const { return v_ != kInf; }

  constexpr value_type value() const {
    if (is_infinite()) throw std::logic_error("ExtNat::value() on infinity");
    return v_;
  }

  friend constexpr ExtNat operator+(ExtNat a, ExtNat b) {
    if (a.is_infinite() || b.is_infinite()) return infinity();
    if (a.v_ > kInf - 1 - b.v_) throw OverflowError("ExtNat: addition overflow");
    return ExtNat(a.v_ + b.v_);
  }

  friend constexpr ExtNat operator+(ExtNat a, value_type b) { return a + ExtNat(b); }

  friend constexpr auto operator<=>(ExtNat, ExtNat) = default;
  friend constexpr bool operator==(ExtNat, ExtNat) = default;

  friend constexpr bool operator<=(ExtNat a, value_type b) { return a.is_finite() && a.v_ <= b; }
  friend constexpr bool operator>(ExtNat a, value_type b) { return !(a <= b); }

  std::string to_string() const { return is_infinite() ? "inf" : std::to_string(v_); }

  friend std::ostream& operator<<(std::ostream& os, ExtNat x) { return os << x.to_string(); }

 private:
  static constexpr value_type kInf = std::numeric_limits<value_type>::max();
  value_type v_ = 0;
};

inline constexpr ExtNat kInfinity = ExtNat::infinity();

}  // namespace cmdp
