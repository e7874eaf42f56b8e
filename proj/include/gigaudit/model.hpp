#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gigaudit/money.hpp"
#include "gigaudit/time.hpp"

namespace gigaudit {

enum class TripStatus { Completed, RiderCancelled, DriverCancelled };
enum class PaymentCategory {
  TripEarnings,
  Tip,
  CommissionCharge,
  Promotion,
  ThirdPartyFee,
  Adjustment,
  Other,
};
enum class SegmentState { Standby, EnRoute, OnTrip };
enum class Gender { Male, Female, OtherOrUnknown };
enum class AgeBand { Age20To29, Age30To39, Age40To49, Age50Plus };

std::string_view to_string(TripStatus s);
std::string_view to_string(PaymentCategory c);
std::string_view to_string(SegmentState s);
std::string_view to_string(Gender g);
std::string_view to_string(AgeBand a);

std::optional<TripStatus> parse_trip_status(std::string_view text);
// Unknown labels map to Other.
PaymentCategory parse_payment_category(std::string_view text);
std::optional<Gender> parse_gender(std::string_view text);
std::optional<AgeBand> parse_age_band(std::string_view text);

struct TripRecord {
  std::string driver_id;
  Timestamp request_ts;
  std::optional<Timestamp> accept_ts;
  std::optional<Timestamp> pickup_ts;
  std::optional<Timestamp> dropoff_ts;
  std::optional<Timestamp> cancel_ts;
  double distance_miles = 0.0;
  TripStatus status = TripStatus::Completed;
  std::optional<Money> original_fare;
  std::string origin_tag;
  std::string dest_tag;
  std::string product;
  std::optional<std::string> pickup_address;
  std::optional<std::string> dropoff_address;

  bool completed() const { return status == TripStatus::Completed; }
  // Empty when the ordering invariant holds, otherwise the reason.
  std::optional<std::string> validate() const;

  bool operator==(const TripRecord&) const = default;
};

struct PaymentEvent {
  std::string driver_id;
  Timestamp ts;
  PaymentCategory category = PaymentCategory::Other;
  Money amount;
  std::optional<std::string> memo;

  bool operator==(const PaymentEvent&) const = default;
};

struct DispatchOffer {
  std::string driver_id;
  Timestamp offered_ts;
  bool accepted = false;

  bool operator==(const DispatchOffer&) const = default;
};

struct ActivitySegment {
  std::string driver_id;
  Timestamp start_ts;
  Timestamp end_ts;
  SegmentState state = SegmentState::Standby;

  std::int64_t duration_ms() const { return end_ts - start_ts; }
  bool operator==(const ActivitySegment&) const = default;
};

struct AppSession {
  std::string driver_id;
  Timestamp login_ts;
  Timestamp logout_ts;

  bool operator==(const AppSession&) const = default;
};

struct DriverProfile {
  std::string driver_id;
  std::optional<Gender> gender;
  std::optional<AgeBand> age_band;
  Timestamp first_trip_ts;
  std::optional<std::string> name;
  std::optional<std::string> email;
  std::optional<std::string> home_address;
  std::optional<std::string> licence_plate;

  bool operator==(const DriverProfile&) const = default;
};

// Month -> year-on-year RPI percent change.
class RpiSeries {
 public:
  RpiSeries() = default;
  explicit RpiSeries(std::map<Month, double> yoy_pct);

  // CSV with header "month,yoy_pct".
  static RpiSeries load_csv(const std::string& path);
  static RpiSeries parse_csv(std::string_view text);

  std::optional<double> yoy(Month m) const;
  bool empty() const { return yoy_.empty(); }
  Month first() const { return yoy_.begin()->first; }
  Month last() const { return yoy_.rbegin()->first; }
  const std::map<Month, double>& values() const { return yoy_; }

 private:
  std::map<Month, double> yoy_;
};

}  // namespace gigaudit
