#include "gigaudit/time.hpp"

#include <cctype>
#include <cstdio>
#include <optional>

#include "gigaudit/error.hpp"

namespace gigaudit {
namespace {

using namespace std::chrono;

constexpr std::int64_t kMsPerDay = 86'400'000;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

int iso_weekday_index(sys_days d) {  // 0 = Monday
  return static_cast<int>(weekday{d}.iso_encoding()) - 1;
}

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  bool done() const { return i_ >= s_.size(); }
  char peek() const { return done() ? '\0' : s_[i_]; }
  bool accept(char c) {
    if (peek() != c) return false;
    ++i_;
    return true;
  }
  std::optional<int> digits(std::size_t n) {
    if (i_ + n > s_.size()) return std::nullopt;
    int v = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const char c = s_[i_ + k];
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
      v = v * 10 + (c - '0');
    }
    i_ += n;
    return v;
  }
  // Variable-length unsigned integer.
  std::optional<long> number() {
    std::size_t start = i_;
    long v = 0;
    while (!done() && std::isdigit(static_cast<unsigned char>(peek()))) v = v * 10 + (s_[i_++] - '0');
    if (i_ == start) return std::nullopt;
    return v;
  }
  std::string_view rest() const { return s_.substr(i_); }
  void skip(std::size_t n) { i_ += n; }

 private:
  std::string_view s_;
  std::size_t i_ = 0;
};

// POSIX offsets are "hh[:mm[:ss]]", positive west of Greenwich.
std::optional<std::int64_t> parse_posix_offset(Cursor& c) {
  int sign = 1;
  if (c.accept('-')) sign = -1;
  else c.accept('+');
  auto h = c.number();
  if (!h) return std::nullopt;
  std::int64_t secs = *h * 3600;
  if (c.accept(':')) {
    auto m = c.number();
    if (!m) return std::nullopt;
    secs += *m * 60;
    if (c.accept(':')) {
      auto s = c.number();
      if (!s) return std::nullopt;
      secs += *s;
    }
  }
  return sign * secs;
}

std::string parse_zone_abbrev(Cursor& c) {
  std::string out;
  if (c.accept('<')) {
    while (!c.done() && c.peek() != '>') {
      out += c.peek();
      c.skip(1);
    }
    c.accept('>');
    return out;
  }
  while (!c.done() && std::isalpha(static_cast<unsigned char>(c.peek()))) {
    out += c.peek();
    c.skip(1);
  }
  return out;
}

}  // namespace

sys_days Timestamp::utc_day() const {
  return sys_days{days{floor_div(utc_ms, kMsPerDay)}};
}

Month Month::from_ordinal(int ordinal) {
  const int year = static_cast<int>(floor_div(ordinal, 12));
  return {year, ordinal - year * 12 + 1};
}

Month Month::parse(std::string_view text) {
  Cursor c(text);
  auto y = c.digits(4);
  if (!y || !c.accept('-')) throw AuditError(ErrorCode::InvalidArgument, "bad month '" + std::string(text) + "'");
  auto m = c.digits(2);
  if (!m || !c.done() || *m < 1 || *m > 12) {
    throw AuditError(ErrorCode::InvalidArgument, "bad month '" + std::string(text) + "'");
  }
  return {*y, *m};
}

std::string Month::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

sys_days Month::first_day() const {
  return sys_days{std::chrono::year{year} / std::chrono::month{static_cast<unsigned>(month)} / 1};
}

MonthRange MonthRange::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw AuditError(ErrorCode::InvalidArgument, "month range must be FIRST:LAST, got '" + std::string(text) + "'");
  }
  MonthRange r{Month::parse(text.substr(0, colon)), Month::parse(text.substr(colon + 1))};
  if (r.last < r.first) throw AuditError(ErrorCode::InvalidArgument, "month range is reversed: '" + std::string(text) + "'");
  return r;
}

IsoWeek IsoWeek::of(sys_days local_day) {
  const sys_days thursday = local_day - days{iso_weekday_index(local_day)} + days{3};
  const year_month_day ymd{thursday};
  const sys_days jan1 = sys_days{ymd.year() / January / 1};
  return {static_cast<int>(ymd.year()), static_cast<int>((thursday - jan1).count() / 7) + 1};
}

sys_days IsoWeek::monday() const {
  const sys_days jan4 = sys_days{std::chrono::year{year} / January / 4};
  return jan4 - days{iso_weekday_index(jan4)} + days{7 * (week - 1)};
}

std::string IsoWeek::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-W%02d", year, week);
  return buf;
}

TimeZone TimeZone::utc() { return named("UTC0"); }

TimeZone TimeZone::london() {
  TimeZone z = named("GMT0BST,M3.5.0/1,M10.5.0");
  z.name_ = "Europe/London";
  return z;
}

TimeZone TimeZone::named(std::string_view name) {
  if (name == "UTC" || name == "Etc/UTC" || name == "GMT") {
    TimeZone z = named("UTC0");
    z.name_ = std::string(name);
    return z;
  }
  if (name == "Europe/London") return london();

  auto fail = [&]() -> TimeZone {
    throw AuditError(ErrorCode::InvalidArgument,
                     "unsupported time zone '" + std::string(name) +
                         "' (use UTC, Europe/London or a POSIX TZ rule with M-format dates)");
  };
  TimeZone z;
  z.name_ = std::string(name);
  Cursor c(name);
  if (parse_zone_abbrev(c).size() < 3) return fail();
  auto std_off = parse_posix_offset(c);
  if (!std_off) return fail();
  z.std_offset_s_ = -*std_off;
  if (c.done()) return z;

  if (parse_zone_abbrev(c).size() < 3) return fail();
  z.has_dst_ = true;
  z.dst_offset_s_ = z.std_offset_s_ + 3600;
  if (c.peek() != ',') {
    auto dst_off = parse_posix_offset(c);
    if (!dst_off) return fail();
    z.dst_offset_s_ = -*dst_off;
  }
  auto parse_rule = [&](Rule& r) {
    if (!c.accept(',') || !c.accept('M')) return false;
    auto m = c.number();
    if (!m || !c.accept('.')) return false;
    auto w = c.number();
    if (!w || !c.accept('.')) return false;
    auto d = c.number();
    if (!d) return false;
    r.month = static_cast<int>(*m);
    r.week = static_cast<int>(*w);
    r.weekday = static_cast<int>(*d);
    r.time_s = 7200;
    if (c.accept('/')) {
      auto t = parse_posix_offset(c);
      if (!t) return false;
      r.time_s = *t;
    }
    return r.month >= 1 && r.month <= 12 && r.week >= 1 && r.week <= 5 && r.weekday >= 0 && r.weekday <= 6;
  };
  if (!parse_rule(z.start_) || !parse_rule(z.end_) || !c.done()) return fail();
  return z;
}

std::int64_t TimeZone::transition_utc(int y, const Rule& rule, std::int64_t offset_before) const {
  const auto ym = std::chrono::year{y} / std::chrono::month{static_cast<unsigned>(rule.month)};
  const weekday wd{static_cast<unsigned>(rule.weekday)};
  sys_days day;
  if (rule.week == 5) {
    day = sys_days{ym / wd[last]};
  } else {
    day = sys_days{ym / wd[static_cast<unsigned>(rule.week)]};
  }
  const std::int64_t local_s = day.time_since_epoch().count() * 86400 + rule.time_s;
  return local_s - offset_before;
}

std::int64_t TimeZone::offset_seconds(Timestamp ts) const {
  if (!has_dst_) return std_offset_s_;
  const std::int64_t t = floor_div(ts.utc_ms, 1000);
  const int y = static_cast<int>(year_month_day{Timestamp{(t + std_offset_s_) * 1000}.utc_day()}.year());
  const std::int64_t start = transition_utc(y, start_, std_offset_s_);
  const std::int64_t end = transition_utc(y, end_, dst_offset_s_);
  const bool dst = start < end ? (t >= start && t < end) : (t < end || t >= start);
  return dst ? dst_offset_s_ : std_offset_s_;
}

LocalFields TimeZone::local(Timestamp ts) const {
  LocalFields f;
  f.utc_offset_s = offset_seconds(ts);
  const std::int64_t local_ms = ts.utc_ms + f.utc_offset_s * 1000;
  f.day = Timestamp{local_ms}.utc_day();
  const year_month_day ymd{f.day};
  f.year = static_cast<int>(ymd.year());
  f.month = static_cast<int>(static_cast<unsigned>(ymd.month()));
  f.day_of_month = static_cast<int>(static_cast<unsigned>(ymd.day()));
  const std::int64_t ms_of_day = local_ms - f.day.time_since_epoch().count() * kMsPerDay;
  const std::int64_t s = ms_of_day / 1000;
  f.hour = static_cast<int>(s / 3600);
  f.minute = static_cast<int>((s / 60) % 60);
  f.second = static_cast<int>(s % 60);
  f.day_of_week = iso_weekday_index(f.day);
  return f;
}

Timestamp TimeZone::from_local(sys_seconds wall) const {
  const std::int64_t w = wall.time_since_epoch().count();
  if (has_dst_) {
    const Timestamp as_dst = Timestamp::from_seconds(w - dst_offset_s_);
    if (offset_seconds(as_dst) == dst_offset_s_) return as_dst;
  }
  return Timestamp::from_seconds(w - std_offset_s_);
}

Timestamp parse_timestamp(std::string_view text, const TimeZone& zone, NaiveTimestamps naive) {
  auto fail = [&]() -> Timestamp {
    throw AuditError(ErrorCode::MalformedTimestamp, "'" + std::string(text) + "'");
  };
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  Cursor c(text);
  auto y = c.digits(4);
  if (!y || !c.accept('-')) return fail();
  auto mo = c.digits(2);
  if (!mo || !c.accept('-')) return fail();
  auto d = c.digits(2);
  if (!d) return fail();
  const year_month_day ymd{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*mo)},
                           std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return fail();

  int hh = 0, mm = 0, ss = 0, ms = 0;
  if (c.accept('T') || c.accept(' ')) {
    auto h = c.digits(2);
    if (!h || !c.accept(':')) return fail();
    auto mi = c.digits(2);
    if (!mi) return fail();
    hh = *h;
    mm = *mi;
    if (c.accept(':')) {
      auto s = c.digits(2);
      if (!s) return fail();
      ss = *s;
      if (c.accept('.')) {
        int scale = 100;
        bool any = false;
        while (std::isdigit(static_cast<unsigned char>(c.peek()))) {
          ms += (c.peek() - '0') * scale;
          scale /= 10;
          c.skip(1);
          any = true;
        }
        if (!any) return fail();
      }
    }
    if (hh > 23 || mm > 59 || ss > 60) return fail();
  }

  const std::int64_t wall_s = sys_days{ymd}.time_since_epoch().count() * 86400 +
                              hh * 3600 + mm * 60 + ss;
  std::optional<std::int64_t> offset;
  if (c.accept('Z') || c.accept('z')) {
    offset = 0;
  } else if (c.peek() == '+' || c.peek() == '-') {
    const int sign = c.peek() == '-' ? -1 : 1;
    c.skip(1);
    auto oh = c.digits(2);
    if (!oh) return fail();
    c.accept(':');
    auto om = c.digits(2);
    offset = sign * (*oh * 3600 + (om ? *om : 0) * 60);
  }
  if (!c.done()) return fail();

  if (offset) return Timestamp{(wall_s - *offset) * 1000 + ms};
  if (naive == NaiveTimestamps::Utc) return Timestamp{wall_s * 1000 + ms};
  return zone.from_local(sys_seconds{seconds{wall_s}}) + ms;
}

std::string format_timestamp(Timestamp ts) {
  const sys_days day = ts.utc_day();
  const year_month_day ymd{day};
  const std::int64_t ms_of_day = ts.utc_ms - day.time_since_epoch().count() * kMsPerDay;
  const std::int64_t s = ms_of_day / 1000;
  const int ms = static_cast<int>(ms_of_day % 1000);
  char buf[40];
  if (ms == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(s / 3600), static_cast<int>((s / 60) % 60), static_cast<int>(s % 60));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(s / 3600), static_cast<int>((s / 60) % 60), static_cast<int>(s % 60), ms);
  }
  return buf;
}

std::string_view to_string(Era era) {
  switch (era) {
    case Era::FixedCommission: return "fixed_commission";
    case Era::OpaqueGap: return "opaque_gap";
    case Era::DynamicPricing: return "dynamic_pricing";
  }
  return "unknown";
}

EraBoundaries EraBoundaries::parse(std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) {
    throw AuditError(ErrorCode::InvalidArgument, "era boundaries must be 'YYYY-MM,YYYY-MM'");
  }
  EraBoundaries b{Month::parse(text.substr(0, comma)), Month::parse(text.substr(comma + 1))};
  b.validate();
  return b;
}

void EraBoundaries::validate() const {
  if (!(opaque_start < dynamic_start)) {
    throw AuditError(ErrorCode::InvalidArgument, "era boundaries must be two distinct months in order");
  }
}

Era era_of(Month month, const EraBoundaries& bounds) {
  if (month < bounds.opaque_start) return Era::FixedCommission;
  if (month < bounds.dynamic_start) return Era::OpaqueGap;
  return Era::DynamicPricing;
}

Era era_of(Timestamp ts, const EraBoundaries& bounds, const TimeZone& zone) {
  return era_of(zone.local(ts).as_month(), bounds);
}

}  // namespace gigaudit
