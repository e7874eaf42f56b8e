#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace gigaudit {

// Milliseconds since the Unix epoch, UTC.
struct Timestamp {
  std::int64_t utc_ms = 0;

  static Timestamp from_seconds(std::int64_t s) { return {s * 1000}; }
  std::chrono::sys_days utc_day() const;

  auto operator<=>(const Timestamp&) const = default;
  Timestamp operator+(std::int64_t ms) const { return {utc_ms + ms}; }
  std::int64_t operator-(const Timestamp& o) const { return utc_ms - o.utc_ms; }
};

// Calendar month; ordinal() is a dense index usable for ranges.
struct Month {
  int year = 1970;
  int month = 1;  // 1..12

  static Month from_ordinal(int ordinal);
  // "2022-02"
  static Month parse(std::string_view text);

  int ordinal() const { return year * 12 + (month - 1); }
  Month next() const { return from_ordinal(ordinal() + 1); }
  Month prev() const { return from_ordinal(ordinal() - 1); }
  std::string to_string() const;
  std::chrono::sys_days first_day() const;

  auto operator<=>(const Month&) const = default;
};

// Inclusive month range, e.g. 2022-02..2023-01.
struct MonthRange {
  Month first;
  Month last;

  // "2022-02:2023-01"
  static MonthRange parse(std::string_view text);
  int size() const { return last.ordinal() - first.ordinal() + 1; }
  bool contains(Month m) const { return first <= m && m <= last; }
  bool operator==(const MonthRange&) const = default;
};

struct IsoWeek {
  int year = 1970;
  int week = 1;

  static IsoWeek of(std::chrono::sys_days local_day);
  std::chrono::sys_days monday() const;
  std::string to_string() const;  // "2023-W07"
  auto operator<=>(const IsoWeek&) const = default;
};

struct LocalFields {
  std::chrono::sys_days day;  // local calendar date
  int year = 0;
  int month = 0;
  int day_of_month = 0;
  int hour = 0;
  int minute = 0;
  int second = 0;
  int day_of_week = 0;  // 0 = Monday .. 6 = Sunday
  std::int64_t utc_offset_s = 0;

  Month as_month() const { return {year, month}; }
};

// A zone described by a POSIX TZ rule ("GMT0BST,M3.5.0/1,M10.5.0").
// Named aliases cover the zones this toolkit is deployed in.
class TimeZone {
 public:
  static TimeZone utc();
  static TimeZone london();
  // Accepts "UTC", "Europe/London" or a raw POSIX TZ rule string.
  static TimeZone named(std::string_view name);

  const std::string& name() const { return name_; }
  std::int64_t offset_seconds(Timestamp ts) const;
  LocalFields local(Timestamp ts) const;
  // Interprets a wall-clock time in this zone. Ambiguous times resolve to
  // the earlier instant; skipped times shift forward by the gap.
  Timestamp from_local(std::chrono::sys_seconds wall) const;

 private:
  struct Rule {
    int month = 0;    // 1..12
    int week = 0;     // 1..5, 5 = last
    int weekday = 0;  // 0 = Sunday
    std::int64_t time_s = 7200;
  };

  std::int64_t transition_utc(int year, const Rule& rule,
                              std::int64_t offset_before) const;

  std::string name_;
  std::int64_t std_offset_s_ = 0;  // east of UTC
  std::int64_t dst_offset_s_ = 0;
  bool has_dst_ = false;
  Rule start_;
  Rule end_;
};

enum class NaiveTimestamps { Utc, Local };

// ISO-8601 parsing. "2023-06-01T10:00:00Z", "...+01:00", fractional
// seconds, and zone-less forms (interpreted per `naive`) are accepted.
Timestamp parse_timestamp(std::string_view text, const TimeZone& zone,
                          NaiveTimestamps naive = NaiveTimestamps::Utc);
// "2023-06-01T10:00:00Z" or with ".123" when milliseconds are non-zero.
std::string format_timestamp(Timestamp ts);

enum class Era { FixedCommission, OpaqueGap, DynamicPricing };

std::string_view to_string(Era era);

struct EraBoundaries {
  Month opaque_start{2022, 2};
  Month dynamic_start{2023, 2};

  // "2022-02,2023-02"
  static EraBoundaries parse(std::string_view text);
  void validate() const;
  bool operator==(const EraBoundaries&) const = default;
};

Era era_of(Month month, const EraBoundaries& bounds);
Era era_of(Timestamp ts, const EraBoundaries& bounds, const TimeZone& zone);

}  // namespace gigaudit
