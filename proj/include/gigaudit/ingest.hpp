#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gigaudit/csv.hpp"
#include "gigaudit/model.hpp"
#include "gigaudit/time.hpp"

namespace gigaudit {

enum class TableKind { Trips, Payments, Dispatches, Sessions, Profile };

inline constexpr TableKind kAllTables[] = {TableKind::Trips, TableKind::Payments, TableKind::Dispatches,
                                           TableKind::Sessions, TableKind::Profile};

std::string_view to_string(TableKind kind);
std::optional<TableKind> parse_table_kind(std::string_view name);
bool table_required(TableKind kind);

struct FieldSpec {
  std::string name;
  bool required = false;
};

const std::vector<FieldSpec>& canonical_fields(TableKind kind);

// Canonical field name -> ordered list of acceptable source headers, plus the
// file names recognized as each table. The first header present wins.
class ColumnMap {
 public:
  static ColumnMap defaults();
  // Entries in the JSON override the defaults table by table, field by field.
  static ColumnMap from_json(const nlohmann::json& doc);
  static ColumnMap load(const std::filesystem::path& path);

  const std::vector<std::string>& candidates(TableKind kind, const std::string& field) const;
  std::optional<TableKind> table_for_file(std::string_view file_name) const;
  void validate() const;
  nlohmann::json to_json() const;

 private:
  std::map<TableKind, std::map<std::string, std::vector<std::string>>> columns_;
  std::map<TableKind, std::vector<std::string>> files_;  // lower-cased
};

// One source file's rows with canonical fields resolved to column indices.
struct RawTable {
  TableKind kind = TableKind::Trips;
  std::string file;
  std::vector<std::string> header;
  std::map<std::string, std::size_t> resolved;
  std::vector<CsvRow> rows;  // every data row, malformed ones carry an error

  std::size_t malformed_count() const;
};

struct RawBundle {
  std::string driver_id;
  std::map<TableKind, std::vector<RawTable>> tables;
  std::vector<std::string> skipped_files;

  std::size_t row_count(TableKind kind) const;
};

struct IngestOptions {
  double max_malformed_fraction = 0.05;
  EraBoundaries eras;
  TimeZone zone = TimeZone::london();
  NaiveTimestamps naive = NaiveTimestamps::Utc;
};

RawBundle load_bundle(const std::filesystem::path& dir, const ColumnMap& map,
                      const IngestOptions& options = {});

struct TableCounts {
  std::size_t rows_in = 0;
  std::size_t normalized = 0;
  std::size_t deduped = 0;
  std::size_t quarantined = 0;

  bool conserved() const { return rows_in == normalized + deduped + quarantined; }
};

struct QuarantineEntry {
  TableKind table = TableKind::Trips;
  std::string file;
  std::size_t line = 0;
  std::string reason;
};

struct IngestReport {
  std::map<TableKind, TableCounts> counts;
  std::vector<QuarantineEntry> quarantine;
  std::vector<std::string> skipped_files;

  nlohmann::json to_json() const;
};

struct NormalizedBundle {
  std::string driver_id;
  std::vector<TripRecord> trips;
  std::vector<PaymentEvent> payments;
  std::vector<DispatchOffer> dispatches;
  std::vector<AppSession> sessions;
  std::vector<DriverProfile> profiles;
  IngestReport report;
};

NormalizedBundle normalize(const RawBundle& raw, const IngestOptions& options = {});

// Convenience: load_bundle + normalize.
NormalizedBundle ingest_bundle(const std::filesystem::path& dir, const ColumnMap& map,
                               const IngestOptions& options = {});

enum class FareSemantics { FareIsRiderPrice, FareUnreliable };

std::string_view to_string(FareSemantics s);
FareSemantics fare_semantics(Era era);
FareSemantics fare_semantics(const TripRecord& trip, const EraBoundaries& eras, const TimeZone& zone);
// One flag per trip, aligned with the input.
std::vector<FareSemantics> detect_fare_semantics(const std::vector<TripRecord>& trips,
                                                 const EraBoundaries& eras, const TimeZone& zone);

// Canonical CSV serialization: file name -> contents. Optional text columns
// are emitted only when at least one record carries a value.
std::map<std::string, std::string> serialize_bundle(const NormalizedBundle& bundle);
void write_bundle(const NormalizedBundle& bundle, const std::filesystem::path& dir);

// Sorted sub-directories of root that contain at least one .csv file.
std::vector<std::filesystem::path> find_bundle_dirs(const std::filesystem::path& root);

}  // namespace gigaudit
