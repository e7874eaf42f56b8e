#include "gigaudit/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "gigaudit/csv.hpp"
#include "gigaudit/error.hpp"

namespace gigaudit {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(TripStatus s) {
  switch (s) {
    case TripStatus::Completed: return "completed";
    case TripStatus::RiderCancelled: return "rider_cancelled";
    case TripStatus::DriverCancelled: return "driver_cancelled";
  }
  return "completed";
}

std::string_view to_string(PaymentCategory c) {
  switch (c) {
    case PaymentCategory::TripEarnings: return "trip_earnings";
    case PaymentCategory::Tip: return "tip";
    case PaymentCategory::CommissionCharge: return "commission_charge";
    case PaymentCategory::Promotion: return "promotion";
    case PaymentCategory::ThirdPartyFee: return "third_party_fee";
    case PaymentCategory::Adjustment: return "adjustment";
    case PaymentCategory::Other: return "other";
  }
  return "other";
}

std::string_view to_string(SegmentState s) {
  switch (s) {
    case SegmentState::Standby: return "standby";
    case SegmentState::EnRoute: return "en_route";
    case SegmentState::OnTrip: return "on_trip";
  }
  return "standby";
}

std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::Male: return "M";
    case Gender::Female: return "F";
    case Gender::OtherOrUnknown: return "other";
  }
  return "other";
}

std::string_view to_string(AgeBand a) {
  switch (a) {
    case AgeBand::Age20To29: return "20-29";
    case AgeBand::Age30To39: return "30-39";
    case AgeBand::Age40To49: return "40-49";
    case AgeBand::Age50Plus: return "50+";
  }
  return "50+";
}

std::optional<TripStatus> parse_trip_status(std::string_view text) {
  const std::string s = lower(text);
  if (s == "completed") return TripStatus::Completed;
  if (s == "rider_cancelled" || s == "rider_canceled") return TripStatus::RiderCancelled;
  if (s == "driver_cancelled" || s == "driver_canceled") return TripStatus::DriverCancelled;
  return std::nullopt;
}

PaymentCategory parse_payment_category(std::string_view text) {
  const std::string s = lower(text);
  if (s == "trip_earnings") return PaymentCategory::TripEarnings;
  if (s == "tip") return PaymentCategory::Tip;
  if (s == "commission_charge" || s == "commission") return PaymentCategory::CommissionCharge;
  if (s == "promotion") return PaymentCategory::Promotion;
  if (s == "third_party_fee") return PaymentCategory::ThirdPartyFee;
  if (s == "adjustment") return PaymentCategory::Adjustment;
  return PaymentCategory::Other;
}

std::optional<Gender> parse_gender(std::string_view text) {
  const std::string s = lower(text);
  if (s == "m" || s == "male") return Gender::Male;
  if (s == "f" || s == "female") return Gender::Female;
  if (s == "other") return Gender::OtherOrUnknown;
  return std::nullopt;
}

std::optional<AgeBand> parse_age_band(std::string_view text) {
  if (text == "20-29") return AgeBand::Age20To29;
  if (text == "30-39") return AgeBand::Age30To39;
  if (text == "40-49") return AgeBand::Age40To49;
  if (text == "50+") return AgeBand::Age50Plus;
  return std::nullopt;
}

std::optional<std::string> TripRecord::validate() const {
  if (completed() && (!accept_ts || !pickup_ts || !dropoff_ts)) {
    return "completed trip missing timestamps";
  }
  if (distance_miles < 0.0) return "negative distance";
  std::optional<Timestamp> prev = request_ts;
  for (const auto& t : {accept_ts, pickup_ts, dropoff_ts}) {
    if (!t) continue;
    if (*t < *prev) return "inverted timestamps";
    prev = t;
  }
  if (cancel_ts && *cancel_ts < request_ts) return "inverted timestamps";
  return std::nullopt;
}

RpiSeries::RpiSeries(std::map<Month, double> yoy_pct) : yoy_(std::move(yoy_pct)) {
  int expected = yoy_.empty() ? 0 : yoy_.begin()->first.ordinal();
  for (const auto& [m, v] : yoy_) {
    if (m.ordinal() != expected) {
      throw AuditError(ErrorCode::MissingRpiMonth, "RPI series is not contiguous at " + m.to_string());
    }
    ++expected;
  }
}

RpiSeries RpiSeries::load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AuditError(ErrorCode::Io, "cannot open RPI file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

RpiSeries RpiSeries::parse_csv(std::string_view text) {
  const CsvTable table = parse_csv_text(text);
  const auto month_col = table.column("month");
  const auto yoy_col = table.column("yoy_pct");
  if (!month_col || !yoy_col) {
    throw AuditError(ErrorCode::MissingColumn, "RPI CSV needs columns month,yoy_pct");
  }
  std::map<Month, double> values;
  for (const auto& row : table.rows) {
    if (row.fields.size() != table.header.size()) {
      throw AuditError(ErrorCode::MalformedRow, "RPI CSV line " + std::to_string(row.line));
    }
    const std::string& v = row.fields[*yoy_col];
    double d = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
      throw AuditError(ErrorCode::MalformedRow, "RPI value '" + v + "' on line " + std::to_string(row.line));
    }
    values[Month::parse(row.fields[*month_col])] = d;
  }
  return RpiSeries(std::move(values));
}

std::optional<double> RpiSeries::yoy(Month m) const {
  auto it = yoy_.find(m);
  if (it == yoy_.end()) return std::nullopt;
  return it->second;
}

}  // namespace gigaudit
