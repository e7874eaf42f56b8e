#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gigaudit {

enum class ErrorCode {
  CurrencyMismatch,
  MalformedMoney,
  MalformedTimestamp,
  MissingTable,
  MissingColumn,
  MalformedRow,
  InvalidColumnMap,
  WeakSalt,
  UnknownField,
  UnreliableFare,
  ZeroFare,
  ZeroHours,
  MissingRpiMonth,
  NoOffers,
  IncompleteTrip,
  Underdetermined,
  ZeroVarianceTarget,
  InvalidConfig,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the toolkit; callers branch on code().
class AuditError : public std::runtime_error {
 public:
  AuditError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gigaudit
