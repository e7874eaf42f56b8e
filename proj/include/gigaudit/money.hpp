#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace gigaudit {

// Signed amount in minor units (pence for GBP). Money never touches a
// floating-point representation except when a ratio is requested.
class Money {
 public:
  constexpr Money() = default;
  constexpr explicit Money(std::int64_t minor_units,
                           std::array<char, 3> currency = {'G', 'B', 'P'})
      : minor_(minor_units), currency_(currency) {}

  static Money pence(std::int64_t p) { return Money(p); }

  // Parses decimal pounds such as "12.34", "-5", "£7.5". At most two
  // fraction digits are accepted.
  static Money parse(std::string_view text, std::string_view currency = "GBP");

  constexpr std::int64_t minor_units() const { return minor_; }
  std::string currency() const { return {currency_.begin(), currency_.end()}; }
  double pounds() const { return static_cast<double>(minor_) / 100.0; }

  // "12.34" / "-0.05"; no currency symbol.
  std::string to_string() const;

  Money operator+(const Money& o) const;
  Money operator-(const Money& o) const;
  Money operator-() const { return Money(-minor_, currency_); }
  Money& operator+=(const Money& o) { return *this = *this + o; }
  Money& operator-=(const Money& o) { return *this = *this - o; }

  bool operator==(const Money&) const = default;
  std::partial_ordering operator<=>(const Money& o) const;

 private:
  std::int64_t minor_ = 0;
  std::array<char, 3> currency_ = {'G', 'B', 'P'};
};

Money sum(std::span<const Money> amounts);

}  // namespace gigaudit
