#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace gigaudit {

// Process exit codes shared by every command.
enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitBadConfig = 2,
  kExitNoData = 3,
  kExitBadSalt = 4,
};

struct CommonArgs {
  std::string era_boundaries = "2022-02,2023-02";
  std::string timezone = "Europe/London";
  std::string naive_timestamps = "utc";  // or "local"
  std::optional<std::filesystem::path> column_map;
  long link_window_seconds = 600;
  long link_early_seconds = 0;
  int jobs = 1;
};

struct AuditArgs {
  std::filesystem::path root;
  std::filesystem::path out = "audit_out";
  std::optional<std::filesystem::path> rpi;
  std::optional<std::string> rpi_base;
  std::optional<std::string> cohort_pre;
  std::optional<std::string> cohort_post;
  std::string weeks = "iso";
  bool charts = false;
  bool csv = false;
  CommonArgs common;
};

struct PredictArgs {
  std::filesystem::path root;
  std::filesystem::path out = "predict_out";
  std::string mode = "both";  // single_year, cumulative or both
  unsigned long long seed = 7;
  double test_fraction = 0.2;
  CommonArgs common;
};

struct AnonArgs {
  std::filesystem::path root;
  std::filesystem::path out;
  std::optional<std::string> salt_file;  // else the GIGAUDIT_SALT environment variable
  std::optional<std::vector<std::string>> strip;  // default policy when empty
  CommonArgs common;
};

int cmd_synth(const std::filesystem::path& config, const std::filesystem::path& out, std::ostream& log);
int cmd_audit(const AuditArgs& args, std::ostream& log);
int cmd_predict(const PredictArgs& args, std::ostream& log);
int cmd_anon(const AnonArgs& args, std::ostream& log);

}  // namespace gigaudit
