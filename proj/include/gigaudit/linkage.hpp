#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gigaudit/ingest.hpp"
#include "gigaudit/model.hpp"

namespace gigaudit {

struct LinkOptions {
  // A payment may post up to window_seconds after the trip's dropoff...
  std::int64_t window_seconds = 600;
  // ...and up to this many seconds before it (clock skew allowance).
  std::int64_t early_seconds = 0;
  EraBoundaries eras;
  TimeZone zone = TimeZone::london();
};

struct LinkedTrip {
  TripRecord trip;
  std::vector<PaymentEvent> earnings;  // trip_earnings events only
  Money driver_total;
  std::optional<Money> rider_fare;  // set only when the exported fare is the rider price
  FareSemantics fare_semantics = FareSemantics::FareIsRiderPrice;
  std::optional<double> driver_share;
  std::optional<double> platform_share;

  bool has_share() const { return driver_share.has_value(); }
  std::int64_t on_trip_ms() const;
  std::int64_t en_route_ms() const;
};

struct UnmatchedTrip {
  TripRecord trip;
  std::string reason;
};

struct UnmatchedPayment {
  PaymentEvent payment;
  std::string reason;
};

struct LinkResult {
  std::vector<LinkedTrip> linked;
  std::vector<UnmatchedTrip> unmatched_trips;
  std::vector<UnmatchedPayment> unmatched_payments;

  nlohmann::json unmatched_report() const;
};

// Joins trip_earnings payments to trips by proximity to dropoff. Each
// payment goes to at most one trip: the nearest dropoff inside the window,
// ties to the earlier dropoff. A trip may collect several payments.
LinkResult link(const std::vector<TripRecord>& trips, const std::vector<PaymentEvent>& payments,
                const LinkOptions& options = {});

struct ShareSplit {
  double driver_share = 0.0;
  double platform_share = 0.0;
};

// driver_total / rider_fare and its complement. Shares above 1 are kept.
ShareSplit split(const LinkedTrip& linked);

}  // namespace gigaudit
