#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

namespace gbb {

// Integer amount in minor currency units. All arithmetic is overflow-checked.
class Money {
 public:
  constexpr Money() = default;
  constexpr explicit Money(std::int64_t amount) : amount_(amount) {}

  constexpr std::int64_t value() const { return amount_; }

  friend Money operator+(Money a, Money b) {
    std::int64_t r;
    if (__builtin_add_overflow(a.amount_, b.amount_, &r)) throw std::overflow_error("money: addition overflow");
    return Money{r};
  }
  friend Money operator-(Money a, Money b) {
    std::int64_t r;
    if (__builtin_sub_overflow(a.amount_, b.amount_, &r)) throw std::overflow_error("money: subtraction overflow");
    return Money{r};
  }
  friend Money operator*(Money a, std::int64_t k) {
    std::int64_t r;
    if (__builtin_mul_overflow(a.amount_, k, &r)) throw std::overflow_error("money: multiplication overflow");
    return Money{r};
  }
  friend Money operator*(std::int64_t k, Money a) { return a * k; }
  Money operator-() const { return Money{0} - *this; }

  Money& operator+=(Money o) { return *this = *this + o; }
  Money& operator-=(Money o) { return *this = *this - o; }

  friend constexpr auto operator<=>(Money, Money) = default;
  friend constexpr bool operator==(Money, Money) = default;

  friend std::ostream& operator<<(std::ostream& os, Money m) { return os << m.amount_; }

 private:
  std::int64_t amount_ = 0;
};

inline std::string to_string(Money m) { return std::to_string(m.value()); }

}  // namespace gbb
