#include <doctest.h>

#include <cstdlib>
#include <regex>
#include <set>

#include "gigaudit/anonymize.hpp"
#include "gigaudit/error.hpp"
#include "gigaudit/synthgen.hpp"
#include "support.hpp"

using namespace gigaudit;
using testsupport::TempDir;

namespace {

const std::string kSalt = "a-test-salt-of-adequate-length";

NormalizedBundle marked_bundle(int drivers = 3) {
  GenConfig cfg;
  cfg.n_drivers = drivers;
  cfg.months = MonthRange::parse("2021-03:2021-04");
  cfg.tip_probability = 0.5;
  GroundTruth truth;
  auto gen = generate_bundles(cfg, truth);
  return gen[0].bundle;
}

std::string serialized(const NormalizedBundle& b) {
  std::string all;
  for (const auto& [name, text] : serialize_bundle(b)) all += name + "\n" + text;
  return all;
}

}  // namespace

TEST_CASE("pseudonym is truncated HMAC-SHA256") {
  // RFC 4231 test case 6: 131-byte key of 0xaa
  CHECK(pseudonym("Test Using Larger Than Block-Size Key - Hash Key First", std::string(131, '\xaa')) ==
        "60e431591ee0b67f");
  CHECK_THROWS_AS(pseudonym("x", "Jefe"), AuditError);
  const auto p = pseudonym("driver_0001", kSalt);
  CHECK(p.size() == kPseudonymHexChars);
  CHECK(std::regex_match(p, std::regex("[0-9a-f]{16}")));
}

TEST_CASE("pseudonyms are deterministic, salt sensitive and distinct") {
  CHECK(pseudonym("driver_0001", kSalt) == pseudonym("driver_0001", kSalt));
  CHECK(pseudonym("driver_0001", kSalt) != pseudonym("driver_0001", kSalt + "x"));
  std::set<std::string> seen;
  for (int i = 0; i < 3; ++i) seen.insert(pseudonym("driver_000" + std::to_string(i), kSalt));
  CHECK(seen.size() == 3);
}

TEST_CASE("pseudonymize replaces every driver id") {
  const auto b = marked_bundle();
  const auto out = pseudonymize(b, kSalt);
  const auto expected = pseudonym(b.driver_id, kSalt);
  CHECK(out.driver_id == expected);
  for (const auto& t : out.trips) CHECK(t.driver_id == expected);
  for (const auto& p : out.payments) CHECK(p.driver_id == expected);
  for (const auto& s : out.sessions) CHECK(s.driver_id == expected);
  for (const auto& d : out.dispatches) CHECK(d.driver_id == expected);
  for (const auto& p : out.profiles) CHECK(p.driver_id == expected);
  CHECK(serialized(out).find(b.driver_id) == std::string::npos);
}

TEST_CASE("strip policy removes the named fields") {
  const auto b = marked_bundle();
  REQUIRE(std::any_of(b.payments.begin(), b.payments.end(), [](const PaymentEvent& p) { return p.memo.has_value(); }));
  const auto memo_free = strip_fields(b, {"memo"});
  for (const auto& p : memo_free.payments) CHECK_FALSE(p.memo.has_value());
  CHECK(memo_free.profiles[0].name == b.profiles[0].name);

  REQUIRE(serialized(b).find(kPiiMarker) != std::string::npos);
  const auto clean = strip_fields(pseudonymize(b, kSalt), default_strip_policy());
  CHECK(serialized(clean).find(kPiiMarker) == std::string::npos);

  CHECK(serialize_bundle(strip_fields(b, {})) == serialize_bundle(b));
}

TEST_CASE("strip policy rejects unknown and structural fields") {
  const NormalizedBundle empty;
  try {
    (void)strip_fields(empty, {"nonsense"});
    FAIL("no throw");
  } catch (const AuditError& e) {
    CHECK(e.code() == ErrorCode::UnknownField);
  }
  CHECK_THROWS_AS(strip_fields(empty, {"trips.request_ts"}), AuditError);
}

TEST_CASE("salt resolution") {
  TempDir tmp("salt");
  ::unsetenv(kSaltEnvVar);
  auto code_of = [](auto&& f) {
    try {
      f();
    } catch (const AuditError& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  CHECK(code_of([] { (void)resolve_salt(std::nullopt); }) == ErrorCode::WeakSalt);
  ::setenv(kSaltEnvVar, "short", 1);
  CHECK(code_of([] { (void)resolve_salt(std::nullopt); }) == ErrorCode::WeakSalt);
  ::setenv(kSaltEnvVar, kSalt.c_str(), 1);
  CHECK(resolve_salt(std::nullopt) == kSalt);
  testsupport::write_file(tmp / "key", "file-salt-0123456789\n");
  CHECK(resolve_salt((tmp / "key").string()) == "file-salt-0123456789");
  CHECK(code_of([&] { (void)resolve_salt((tmp / "missing").string()); }) == ErrorCode::WeakSalt);
  ::unsetenv(kSaltEnvVar);
}
