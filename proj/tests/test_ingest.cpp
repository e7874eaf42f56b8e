#include <doctest.h>

#include "gigaudit/error.hpp"
#include "gigaudit/ingest.hpp"
#include "gigaudit/synthgen.hpp"
#include "support.hpp"

using namespace gigaudit;
using testsupport::TempDir;
using testsupport::ts;
using testsupport::write_file;

namespace {

void write_minimal_bundle(const std::filesystem::path& dir) {
  write_file(dir / "trips.csv",
             "request_ts,accept_ts,pickup_ts,dropoff_ts,distance_miles,status,original_fare,product\n"
             "2021-06-01T10:00:00Z,2021-06-01T10:00:00Z,2021-06-01T10:05:00Z,2021-06-01T10:30:00Z,4.2,completed,20.00,UberX\n"
             "2021-06-01T11:00:00Z,2021-06-01T11:00:00Z,2021-06-01T11:30:00Z,2021-06-01T11:10:00Z,1.0,completed,8.00,UberX\n");
  write_file(dir / "payments.csv",
             "ts,category,amount,currency,memo\n"
             "2021-06-01T10:31:00Z,trip_earnings,15.00,GBP,\n"
             "2021-06-01T10:31:00Z,trip_earnings,15.00,GBP,\n"
             "2021-06-02T09:00:00Z,weird_bonus,1.00,GBP,hello\n");
  write_file(dir / "dispatches.csv", "offered_ts,accepted\n2021-06-01T09:59:00Z,true\n2021-06-01T10:59:00Z,false\n");
  write_file(dir / "sessions.csv", "login_ts,logout_ts\n2021-06-01T09:00:00Z,2021-06-01T13:00:00Z\n");
}

}  // namespace

TEST_CASE("load_bundle reads canonical tables and reports unknown files") {
  TempDir tmp("ingest");
  const auto dir = tmp / "driver_a";
  write_minimal_bundle(dir);
  auto raw = load_bundle(dir, ColumnMap::defaults());
  CHECK(raw.tables.size() == 4);
  CHECK(raw.skipped_files.empty());
  CHECK(raw.driver_id == "driver_a");

  write_file(dir / "notes.csv", "x\n1\n");
  raw = load_bundle(dir, ColumnMap::defaults());
  CHECK(raw.tables.size() == 4);
  CHECK(raw.skipped_files == std::vector<std::string>{"notes.csv"});
}

TEST_CASE("normalize dedupes identical rows and quarantines inverted trips") {
  TempDir tmp("ingest");
  const auto dir = tmp / "driver_a";
  write_minimal_bundle(dir);
  const auto b = ingest_bundle(dir, ColumnMap::defaults());
  CHECK(b.trips.size() == 1);
  CHECK(b.payments.size() == 2);
  const auto& pc = b.report.counts.at(TableKind::Payments);
  CHECK(pc.deduped == 1);
  CHECK(pc.conserved());
  const auto& tc = b.report.counts.at(TableKind::Trips);
  CHECK(tc.quarantined == 1);
  CHECK(tc.conserved());
  REQUIRE(b.report.quarantine.size() == 1);
  CHECK(b.report.quarantine[0].reason == "inverted timestamps");
  CHECK(b.report.quarantine[0].line == 3);
  // unknown category still gets one
  CHECK(b.payments[1].category == PaymentCategory::Other);
  CHECK(b.trips[0].driver_id == "driver_a");
  CHECK(b.trips[0].original_fare->minor_units() == 2000);
}

TEST_CASE("missing required table or column is an error") {
  TempDir tmp("ingest");
  write_file(tmp / "a" / "trips.csv", "request_ts,distance_miles,status\n");
  CHECK_THROWS_AS(load_bundle(tmp / "a", ColumnMap::defaults()), AuditError);
  write_file(tmp / "b" / "trips.csv", "request_ts,status\n");
  write_file(tmp / "b" / "payments.csv", "ts,category,amount\n");
  try {
    (void)load_bundle(tmp / "b", ColumnMap::defaults());
    FAIL("no throw");
  } catch (const AuditError& e) {
    CHECK(e.code() == ErrorCode::MissingColumn);
  }
}

TEST_CASE("column map fallbacks resolve export-style headers") {
  TempDir tmp("ingest");
  const auto dir = tmp / "x";
  write_file(dir / "driver_lifetime_trips.csv",
             "Request Time,Accept Time,Begin Trip Time,Dropoff Time,Distance (miles),Trip or Order Status,original fare\n"
             "2021-06-01T10:00:00Z,2021-06-01T10:00:10Z,2021-06-01T10:05:00Z,2021-06-01T10:30:00Z,4.2,COMPLETED,20.00\n");
  write_file(dir / "driver_payments.csv", "Timestamp,Category,Amount\n2021-06-01T10:31:00Z,trip_earnings,15.00\n");
  const auto b = ingest_bundle(dir, ColumnMap::defaults());
  REQUIRE(b.trips.size() == 1);
  CHECK(b.trips[0].pickup_ts == ts("2021-06-01T10:05:00Z"));

  const auto custom = ColumnMap::from_json(nlohmann::json::parse(R"({"tables":{"payments":{"columns":{"amount":["Net"]}}}})"));
  CHECK(custom.candidates(TableKind::Payments, "amount") == std::vector<std::string>{"Net"});
  CHECK_THROWS_AS(ColumnMap::from_json(nlohmann::json::parse(R"({"tables":{"payments":{"columns":{"bogus":"x"}}}})")),
                  AuditError);
}

TEST_CASE("too many malformed rows rejects the table") {
  TempDir tmp("ingest");
  const auto dir = tmp / "x";
  write_file(dir / "trips.csv", "request_ts,distance_miles,status\n2021-06-01T10:00:00Z,1,completed\n");
  write_file(dir / "payments.csv", "ts,category,amount\n\"2021-06-01,trip_earnings,1\n");
  CHECK_THROWS_AS(load_bundle(dir, ColumnMap::defaults()), AuditError);
}

TEST_CASE("fare semantics follow the era") {
  const EraBoundaries eras;
  const auto z = TimeZone::london();
  TripRecord t;
  t.request_ts = ts("2022-06-15T12:00:00Z");
  CHECK(fare_semantics(t, eras, z) == FareSemantics::FareUnreliable);
  t.request_ts = ts("2023-06-15T12:00:00Z");
  CHECK(fare_semantics(t, eras, z) == FareSemantics::FareIsRiderPrice);
  t.request_ts = ts("2019-01-15T12:00:00Z");
  CHECK(fare_semantics(t, eras, z) == FareSemantics::FareIsRiderPrice);
}

TEST_CASE("synthetic bundle counts match generator minus corruptions") {
  TempDir tmp("ingest");
  GenConfig cfg;
  cfg.n_drivers = 4;
  cfg.months = MonthRange::parse("2021-03:2021-05");
  cfg.corruptions = {3, 2, 2};
  const auto truth = generate(cfg, tmp.path());

  std::size_t dup = 0, inv = 0, bad_money = 0;
  for (const auto& c : truth.corruptions) {
    if (c.kind == "duplicate_row") ++dup;
    if (c.kind == "inverted_timestamps") ++inv;
    if (c.kind == "malformed_money") ++bad_money;
  }
  CHECK(dup == 3);
  CHECK(inv == 2);
  CHECK(bad_money == 2);

  std::size_t trips_in = 0, trips_out = 0, trips_dedup = 0, trips_q = 0, pay_in = 0, pay_out = 0, pay_q = 0;
  std::size_t emitted_trips = 0, emitted_pay = 0;
  for (const auto& d : truth.drivers) {
    const auto raw = load_bundle(tmp / "bundles" / d.driver_id, ColumnMap::defaults());
    CHECK(raw.row_count(TableKind::Trips) == d.trips_emitted);
    const auto b = normalize(raw);
    for (const auto& [k, c] : b.report.counts) CHECK(c.conserved());
    trips_in += b.report.counts.at(TableKind::Trips).rows_in;
    trips_out += b.trips.size();
    trips_dedup += b.report.counts.at(TableKind::Trips).deduped;
    trips_q += b.report.counts.at(TableKind::Trips).quarantined;
    pay_in += b.report.counts.at(TableKind::Payments).rows_in;
    pay_out += b.payments.size();
    pay_q += b.report.counts.at(TableKind::Payments).quarantined;
    emitted_trips += d.trips_emitted;
    emitted_pay += d.payments_emitted;
  }
  CHECK(trips_in == emitted_trips);
  CHECK(trips_out == emitted_trips - dup - inv);
  CHECK(trips_dedup == dup);
  CHECK(trips_q == inv);
  CHECK(pay_in == emitted_pay);
  CHECK(pay_out == emitted_pay - bad_money);
  CHECK(pay_q == bad_money);
}

TEST_CASE("clean synthetic output has nothing quarantined") {
  TempDir tmp("ingest");
  GenConfig cfg;
  cfg.n_drivers = 2;
  cfg.months = MonthRange::parse("2022-12:2023-03");
  const auto truth = generate(cfg, tmp.path());
  for (const auto& d : truth.drivers) {
    const auto b = ingest_bundle(tmp / "bundles" / d.driver_id, ColumnMap::defaults());
    CHECK(b.report.quarantine.empty());
    CHECK(b.trips.size() == d.trips_emitted);
    CHECK(b.payments.size() == d.payments_emitted);
  }
}

TEST_CASE("serialize then re-ingest is a fixed point") {
  TempDir tmp("ingest");
  GenConfig cfg;
  cfg.n_drivers = 1;
  cfg.months = MonthRange::parse("2021-03:2021-04");
  GroundTruth truth;
  const auto gen = generate_bundles(cfg, truth);
  write_bundle(gen[0].bundle, tmp / "a");
  const auto back = ingest_bundle(tmp / "a", ColumnMap::defaults());
  CHECK(back.trips == gen[0].bundle.trips);
  CHECK(back.payments == gen[0].bundle.payments);
  CHECK(back.sessions == gen[0].bundle.sessions);
  CHECK(back.dispatches == gen[0].bundle.dispatches);
  CHECK(back.profiles == gen[0].bundle.profiles);
  CHECK(serialize_bundle(back) == serialize_bundle(gen[0].bundle));
}
