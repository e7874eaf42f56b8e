#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gigaudit/ingest.hpp"

namespace gigaudit {

inline constexpr std::size_t kMinSaltBytes = 16;
inline constexpr std::size_t kPseudonymHexChars = 16;
inline constexpr const char* kSaltEnvVar = "GIGAUDIT_SALT";

// HMAC-SHA256(salt, id) truncated to 16 lowercase hex characters.
std::string pseudonym(std::string_view driver_id, std::string_view salt);

// Replaces every driver_id (bundle and records) by its pseudonym.
NormalizedBundle pseudonymize(const NormalizedBundle& bundle, std::string_view salt);

// Fields that may appear in a strip policy, as "table.field".
const std::vector<std::string>& strippable_fields();
const std::vector<std::string>& default_strip_policy();

// Policy entries are "table.field" or a bare field name, which applies to
// every table that has it.
NormalizedBundle strip_fields(const NormalizedBundle& bundle, const std::vector<std::string>& policy);

// Salt from key_file when given, else from the environment. Throws WeakSalt
// when neither yields at least kMinSaltBytes bytes.
std::string resolve_salt(const std::optional<std::string>& key_file);

}  // namespace gigaudit
