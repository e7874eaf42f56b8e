#include "gigaudit/linkage.hpp"

#include <algorithm>
#include <cstdlib>
#include <tuple>

#include "gigaudit/error.hpp"

namespace gigaudit {
namespace {

auto trip_key(const TripRecord& t) {
  return std::make_tuple(t.dropoff_ts.value_or(Timestamp{}), t.request_ts, t.accept_ts.value_or(Timestamp{}),
                         t.pickup_ts.value_or(Timestamp{}), t.distance_miles,
                         t.original_fare ? t.original_fare->minor_units() : std::int64_t{0}, t.product, t.origin_tag,
                         t.dest_tag, t.driver_id);
}

auto payment_key(const PaymentEvent& p) {
  return std::make_tuple(p.ts, p.amount.minor_units(), p.amount.currency(), p.memo.value_or(""), p.driver_id,
                         static_cast<int>(p.category));
}

}  // namespace

std::int64_t LinkedTrip::on_trip_ms() const {
  if (!trip.pickup_ts || !trip.dropoff_ts) return 0;
  return *trip.dropoff_ts - *trip.pickup_ts;
}

std::int64_t LinkedTrip::en_route_ms() const {
  if (!trip.accept_ts || !trip.pickup_ts) return 0;
  return *trip.pickup_ts - *trip.accept_ts;
}

LinkResult link(const std::vector<TripRecord>& trips, const std::vector<PaymentEvent>& payments,
                const LinkOptions& options) {
  if (options.window_seconds <= 0) {
    throw AuditError(ErrorCode::InvalidArgument, "link window must be positive");
  }
  if (options.early_seconds < 0) {
    throw AuditError(ErrorCode::InvalidArgument, "early allowance must be non-negative");
  }
  LinkResult result;

  std::vector<const TripRecord*> completed;
  for (const auto& t : trips) {
    if (t.completed() && t.dropoff_ts) {
      completed.push_back(&t);
    } else {
      result.unmatched_trips.push_back({t, "not completed"});
    }
  }
  std::sort(completed.begin(), completed.end(),
            [](const TripRecord* a, const TripRecord* b) { return trip_key(*a) < trip_key(*b); });

  std::vector<const PaymentEvent*> earnings;
  for (const auto& p : payments) {
    if (p.category == PaymentCategory::TripEarnings) earnings.push_back(&p);
  }
  std::sort(earnings.begin(), earnings.end(),
            [](const PaymentEvent* a, const PaymentEvent* b) { return payment_key(*a) < payment_key(*b); });

  const std::int64_t window_ms = options.window_seconds * 1000;
  const std::int64_t early_ms = options.early_seconds * 1000;
  std::vector<std::vector<const PaymentEvent*>> assigned(completed.size());

  for (const PaymentEvent* p : earnings) {
    // Candidates: dropoff in [p.ts - window, p.ts + early].
    const Timestamp lo = p->ts + (-window_ms);
    const Timestamp hi = p->ts + early_ms;
    auto first = std::lower_bound(completed.begin(), completed.end(), lo,
                                  [](const TripRecord* t, Timestamp v) { return *t->dropoff_ts < v; });
    std::ptrdiff_t best = -1;
    std::int64_t best_gap = 0;
    for (auto it = first; it != completed.end() && *(*it)->dropoff_ts <= hi; ++it) {
      const std::int64_t gap = std::abs(p->ts - *(*it)->dropoff_ts);
      // Iteration is in dropoff order, so strict '<' keeps the earlier trip on ties.
      if (best < 0 || gap < best_gap) {
        best = it - completed.begin();
        best_gap = gap;
      }
    }
    if (best < 0) {
      result.unmatched_payments.push_back({*p, "no completed trip dropoff within window"});
    } else {
      assigned[static_cast<std::size_t>(best)].push_back(p);
    }
  }

  for (std::size_t i = 0; i < completed.size(); ++i) {
    const TripRecord& t = *completed[i];
    if (assigned[i].empty()) {
      result.unmatched_trips.push_back({t, "no earnings payment within window"});
      continue;
    }
    LinkedTrip lt;
    lt.trip = t;
    lt.driver_total = assigned[i].front()->amount;
    lt.earnings.push_back(*assigned[i].front());
    for (std::size_t k = 1; k < assigned[i].size(); ++k) {
      lt.earnings.push_back(*assigned[i][k]);
      lt.driver_total += assigned[i][k]->amount;
    }
    lt.fare_semantics = fare_semantics(t, options.eras, options.zone);
    if (lt.fare_semantics == FareSemantics::FareIsRiderPrice && t.original_fare) {
      lt.rider_fare = t.original_fare;
      if (t.original_fare->minor_units() > 0 && t.original_fare->currency() == lt.driver_total.currency()) {
        const ShareSplit s = split(lt);
        lt.driver_share = s.driver_share;
        lt.platform_share = s.platform_share;
      }
    }
    result.linked.push_back(std::move(lt));
  }

  std::sort(result.unmatched_trips.begin(), result.unmatched_trips.end(),
            [](const UnmatchedTrip& a, const UnmatchedTrip& b) { return trip_key(a.trip) < trip_key(b.trip); });
  return result;
}

ShareSplit split(const LinkedTrip& linked) {
  if (linked.fare_semantics == FareSemantics::FareUnreliable) {
    throw AuditError(ErrorCode::UnreliableFare, "exported fare does not reflect the rider price in this era");
  }
  if (!linked.rider_fare) throw AuditError(ErrorCode::UnreliableFare, "trip has no rider fare");
  if (linked.rider_fare->minor_units() <= 0) throw AuditError(ErrorCode::ZeroFare, "rider fare is not positive");
  if (linked.rider_fare->currency() != linked.driver_total.currency()) {
    throw AuditError(ErrorCode::CurrencyMismatch, "fare and pay currencies differ");
  }
  ShareSplit s;
  s.driver_share = static_cast<double>(linked.driver_total.minor_units()) /
                   static_cast<double>(linked.rider_fare->minor_units());
  s.platform_share = 1.0 - s.driver_share;
  return s;
}

nlohmann::json LinkResult::unmatched_report() const {
  nlohmann::json trips = nlohmann::json::array();
  for (const auto& u : unmatched_trips) {
    trips.push_back({{"request_ts", format_timestamp(u.trip.request_ts)},
                     {"dropoff_ts", u.trip.dropoff_ts ? format_timestamp(*u.trip.dropoff_ts) : ""},
                     {"status", std::string(to_string(u.trip.status))},
                     {"reason", u.reason}});
  }
  nlohmann::json pays = nlohmann::json::array();
  for (const auto& u : unmatched_payments) {
    pays.push_back({{"ts", format_timestamp(u.payment.ts)}, {"amount", u.payment.amount.to_string()}, {"reason", u.reason}});
  }
  return {{"linked", linked.size()}, {"unmatched_trips", trips}, {"unmatched_payments", pays}};
}

}  // namespace gigaudit
