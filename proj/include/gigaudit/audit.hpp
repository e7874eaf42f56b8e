#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gigaudit/ingest.hpp"
#include "gigaudit/linkage.hpp"
#include "gigaudit/metrics.hpp"
#include "gigaudit/predictability.hpp"
#include "gigaudit/worktime.hpp"

namespace gigaudit {

struct PipelineOptions {
  ColumnMap columns = ColumnMap::defaults();
  IngestOptions ingest;
  LinkOptions link;
  int jobs = 1;

  // Keeps the era boundaries and zone consistent across stages.
  void sync();
};

struct DriverAudit {
  std::string bundle;  // directory name
  NormalizedBundle data;
  LinkResult links;
  SegmentBuild segments;
  std::vector<WeeklyPayRow> weeks;
};

struct PipelineRun {
  std::size_t bundles_found = 0;
  std::vector<DriverAudit> drivers;              // sorted by bundle name
  std::map<std::string, std::string> failures;   // bundle -> reason
};

// Ingest, link and segment every bundle under root. Bundle failures are
// recorded and skipped; results do not depend on `jobs`.
PipelineRun run_pipeline(const std::filesystem::path& root, const PipelineOptions& options);

struct AuditOptions {
  PipelineOptions pipeline;
  std::optional<RpiSeries> rpi;
  std::optional<Month> rpi_base;  // defaults to the last month with pay data
  std::optional<MonthRange> cohort_pre;
  std::optional<MonthRange> cohort_post;
};

nlohmann::json build_audit_report(const PipelineRun& run, const AuditOptions& options);

// Floats rounded to 6 significant digits, keys sorted, 2-space indent.
std::string dump_report(const nlohmann::json& report);
nlohmann::json round_floats(const nlohmann::json& value, int digits = 6);

// CSV side tables keyed by file name.
std::map<std::string, std::string> audit_csv_tables(const nlohmann::json& report);

// Pooled linked trips across every driver of a run, in bundle order.
std::vector<LinkedTrip> all_linked(const PipelineRun& run);

}  // namespace gigaudit
