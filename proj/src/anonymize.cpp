#include "gigaudit/anonymize.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include "gigaudit/error.hpp"

namespace gigaudit {

std::string pseudonym(std::string_view driver_id, std::string_view salt) {
  if (salt.size() < kMinSaltBytes) {
    throw AuditError(ErrorCode::WeakSalt, "salt must be at least " + std::to_string(kMinSaltBytes) + " bytes");
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  HMAC(EVP_sha256(), salt.data(), static_cast<int>(salt.size()),
       reinterpret_cast<const unsigned char*>(driver_id.data()), driver_id.size(), digest, &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(kPseudonymHexChars);
  for (unsigned int i = 0; i < len && out.size() < kPseudonymHexChars; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

NormalizedBundle pseudonymize(const NormalizedBundle& bundle, std::string_view salt) {
  if (salt.size() < kMinSaltBytes) {
    throw AuditError(ErrorCode::WeakSalt, "salt must be at least " + std::to_string(kMinSaltBytes) + " bytes");
  }
  NormalizedBundle out = bundle;
  auto map = [&](std::string& id) { id = pseudonym(id, salt); };
  map(out.driver_id);
  for (auto& t : out.trips) map(t.driver_id);
  for (auto& p : out.payments) map(p.driver_id);
  for (auto& d : out.dispatches) map(d.driver_id);
  for (auto& s : out.sessions) map(s.driver_id);
  for (auto& p : out.profiles) map(p.driver_id);
  return out;
}

const std::vector<std::string>& strippable_fields() {
  static const std::vector<std::string> fields = {
      "trips.pickup_address", "trips.dropoff_address", "payments.memo",  "profile.name",
      "profile.email",        "profile.home_address",  "profile.licence_plate", "profile.gender",
      "profile.age_band",
  };
  return fields;
}

const std::vector<std::string>& default_strip_policy() {
  static const std::vector<std::string> policy = {
      "profile.name",          "profile.email",        "profile.home_address", "profile.licence_plate",
      "trips.pickup_address",  "trips.dropoff_address", "payments.memo",
  };
  return policy;
}

NormalizedBundle strip_fields(const NormalizedBundle& bundle, const std::vector<std::string>& policy) {
  std::set<std::string> selected;
  for (const auto& entry : policy) {
    bool matched = false;
    for (const auto& f : strippable_fields()) {
      const std::string bare = f.substr(f.find('.') + 1);
      if (entry == f || entry == bare) {
        selected.insert(f);
        matched = true;
      }
    }
    if (matched) continue;
    // A real but non-strippable column is still a policy error.
    const auto dot = entry.find('.');
    const std::string bare = dot == std::string::npos ? entry : entry.substr(dot + 1);
    bool exists = false;
    for (TableKind k : kAllTables) {
      for (const auto& field : canonical_fields(k)) exists |= field.name == bare;
    }
    if (exists) {
      throw AuditError(ErrorCode::InvalidArgument, "field '" + entry + "' is structural and cannot be stripped");
    }
    throw AuditError(ErrorCode::UnknownField, "no field named '" + entry + "'");
  }

  NormalizedBundle out = bundle;
  auto on = [&](const char* f) { return selected.contains(f); };
  for (auto& t : out.trips) {
    if (on("trips.pickup_address")) t.pickup_address.reset();
    if (on("trips.dropoff_address")) t.dropoff_address.reset();
  }
  for (auto& p : out.payments) {
    if (on("payments.memo")) p.memo.reset();
  }
  for (auto& p : out.profiles) {
    if (on("profile.name")) p.name.reset();
    if (on("profile.email")) p.email.reset();
    if (on("profile.home_address")) p.home_address.reset();
    if (on("profile.licence_plate")) p.licence_plate.reset();
    if (on("profile.gender")) p.gender.reset();
    if (on("profile.age_band")) p.age_band.reset();
  }
  return out;
}

std::string resolve_salt(const std::optional<std::string>& key_file) {
  std::string salt;
  if (key_file) {
    std::ifstream in(*key_file, std::ios::binary);
    if (!in) throw AuditError(ErrorCode::WeakSalt, "cannot read key file " + *key_file);
    std::ostringstream ss;
    ss << in.rdbuf();
    salt = ss.str();
    while (!salt.empty() && (salt.back() == '\n' || salt.back() == '\r')) salt.pop_back();
  } else if (const char* env = std::getenv(kSaltEnvVar); env != nullptr && *env != '\0') {
    salt = env;
  } else {
    throw AuditError(ErrorCode::WeakSalt, std::string("no salt: set ") + kSaltEnvVar + " or pass a key file");
  }
  if (salt.size() < kMinSaltBytes) {
    throw AuditError(ErrorCode::WeakSalt, "salt must be at least " + std::to_string(kMinSaltBytes) + " bytes");
  }
  return salt;
}

}  // namespace gigaudit
