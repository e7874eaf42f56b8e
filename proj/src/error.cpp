#include "gigaudit/error.hpp"

namespace gigaudit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CurrencyMismatch: return "CurrencyMismatch";
    case ErrorCode::MalformedMoney: return "MalformedMoney";
    case ErrorCode::MalformedTimestamp: return "MalformedTimestamp";
    case ErrorCode::MissingTable: return "MissingTable";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::InvalidColumnMap: return "InvalidColumnMap";
    case ErrorCode::WeakSalt: return "WeakSalt";
    case ErrorCode::UnknownField: return "UnknownField";
    case ErrorCode::UnreliableFare: return "UnreliableFare";
    case ErrorCode::ZeroFare: return "ZeroFare";
    case ErrorCode::ZeroHours: return "ZeroHours";
    case ErrorCode::MissingRpiMonth: return "MissingRpiMonth";
    case ErrorCode::NoOffers: return "NoOffers";
    case ErrorCode::IncompleteTrip: return "IncompleteTrip";
    case ErrorCode::Underdetermined: return "Underdetermined";
    case ErrorCode::ZeroVarianceTarget: return "ZeroVarianceTarget";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace gigaudit
