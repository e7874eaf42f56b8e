#include "gigaudit/money.hpp"

#include <cctype>
#include <cstdlib>
#include <limits>

#include "gigaudit/error.hpp"

namespace gigaudit {
namespace {

std::array<char, 3> currency_code(std::string_view c) {
  if (c.size() != 3) {
    throw AuditError(ErrorCode::InvalidArgument,
                     "currency code must have 3 letters: '" + std::string(c) + "'");
  }
  return {c[0], c[1], c[2]};
}

void check_same(const std::array<char, 3>& a, const std::array<char, 3>& b) {
  if (a != b) {
    throw AuditError(ErrorCode::CurrencyMismatch,
                     std::string(a.begin(), a.end()) + " vs " +
                         std::string(b.begin(), b.end()));
  }
}

}  // namespace

Money Money::parse(std::string_view text, std::string_view currency) {
  const std::string original(text);
  auto fail = [&](const char* why) -> Money {
    throw AuditError(ErrorCode::MalformedMoney, "'" + original + "': " + why);
  };
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);

  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  constexpr std::string_view kPound = "\xC2\xA3";  // UTF-8 '£'
  if (text.starts_with(kPound)) text.remove_prefix(kPound.size());
  if (text.empty()) return fail("empty");

  std::int64_t whole = 0;
  std::size_t i = 0;
  std::size_t int_digits = 0;
  for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i, ++int_digits) {
    if (whole > (std::numeric_limits<std::int64_t>::max() / 10 - 10) / 100) return fail("overflow");
    whole = whole * 10 + (text[i] - '0');
  }
  std::int64_t frac = 0;
  std::size_t frac_digits = 0;
  if (i < text.size() && text[i] == '.') {
    ++i;
    for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i, ++frac_digits) {
      if (frac_digits == 2) return fail("more than two fraction digits");
      frac = frac * 10 + (text[i] - '0');
    }
    if (frac_digits == 0) return fail("missing fraction digits");
    if (frac_digits == 1) frac *= 10;
  }
  if (i != text.size()) return fail("unexpected character");
  if (int_digits == 0) return fail("missing integer digits");

  const std::int64_t minor = whole * 100 + frac;
  return Money(negative ? -minor : minor, currency_code(currency));
}

std::string Money::to_string() const {
  const std::int64_t a = minor_ < 0 ? -minor_ : minor_;
  std::string out = minor_ < 0 ? "-" : "";
  out += std::to_string(a / 100);
  out += '.';
  const std::int64_t cents = a % 100;
  out += static_cast<char>('0' + cents / 10);
  out += static_cast<char>('0' + cents % 10);
  return out;
}

Money Money::operator+(const Money& o) const {
  check_same(currency_, o.currency_);
  return Money(minor_ + o.minor_, currency_);
}

Money Money::operator-(const Money& o) const {
  check_same(currency_, o.currency_);
  return Money(minor_ - o.minor_, currency_);
}

std::partial_ordering Money::operator<=>(const Money& o) const {
  if (currency_ != o.currency_) return std::partial_ordering::unordered;
  return minor_ <=> o.minor_;
}

Money sum(std::span<const Money> amounts) {
  if (amounts.empty()) return Money{};
  Money total = amounts.front();
  for (const auto& a : amounts.subspan(1)) total += a;
  return total;
}

}  // namespace gigaudit
