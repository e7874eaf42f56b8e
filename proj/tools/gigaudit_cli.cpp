#include <iostream>

#include <CLI11.hpp>

#include "gigaudit/commands.hpp"

using namespace gigaudit;

namespace {

void add_common(CLI::App* cmd, CommonArgs& c) {
  cmd->add_option("--era-boundaries", c.era_boundaries, "opaque-gap and dynamic-pricing start months, YYYY-MM,YYYY-MM");
  cmd->add_option("--tz", c.timezone, "local time zone (Europe/London, UTC or a POSIX TZ rule)");
  cmd->add_option("--naive-timestamps", c.naive_timestamps, "how to read timestamps without an offset: utc or local");
  cmd->add_option("--column-map", c.column_map, "JSON column map overriding the default header aliases");
  cmd->add_option("--link-window-seconds", c.link_window_seconds, "max seconds from dropoff to payment");
  cmd->add_option("--link-early-seconds", c.link_early_seconds, "max seconds a payment may precede dropoff");
  cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gigaudit: audit ride-hail driver data exports"};
  app.require_subcommand(1);

  std::string synth_config, synth_out = "synth_out";
  auto* synth = app.add_subcommand("synth", "generate synthetic driver bundles with ground truth");
  synth->add_option("config", synth_config, "generator config (JSON)")->required();
  synth->add_option("--out", synth_out, "output directory");

  AuditArgs audit_args;
  auto* audit = app.add_subcommand("audit", "run the audit metrics over a directory of bundles");
  audit->add_option("root", audit_args.root, "directory holding one sub-directory per driver bundle")->required();
  audit->add_option("--out", audit_args.out, "output directory");
  audit->add_option("--rpi", audit_args.rpi, "RPI CSV (month,yoy_pct)");
  audit->add_option("--rpi-base", audit_args.rpi_base, "base month for inflation adjustment");
  audit->add_option("--cohort-pre", audit_args.cohort_pre, "pre window YYYY-MM:YYYY-MM");
  audit->add_option("--cohort-post", audit_args.cohort_post, "post window YYYY-MM:YYYY-MM");
  audit->add_option("--weeks", audit_args.weeks, "week convention (iso)");
  audit->add_flag("--charts", audit_args.charts, "also write SVG charts");
  audit->add_flag("--csv", audit_args.csv, "also write CSV tables");
  add_common(audit, audit_args.common);

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "train-on-year-X, test-on-year-Y pay predictability matrix");
  predict->add_option("root", predict_args.root, "bundle root")->required();
  predict->add_option("--mode", predict_args.mode, "single_year, cumulative or both");
  predict->add_option("--out", predict_args.out, "output directory");
  predict->add_option("--seed", predict_args.seed, "seed for the within-year split");
  predict->add_option("--test-fraction", predict_args.test_fraction, "held-out share for same-year cells");
  add_common(predict, predict_args.common);

  AnonArgs anon_args;
  std::vector<std::string> strip;
  auto* anon = app.add_subcommand("anon", "pseudonymize ids and strip personal fields");
  anon->add_option("root", anon_args.root, "bundle root")->required();
  anon->add_option("--out", anon_args.out, "output directory (must differ from root)")->required();
  anon->add_option("--salt-file", anon_args.salt_file, "file holding the HMAC salt (else $GIGAUDIT_SALT)");
  anon->add_option("--strip", strip, "fields to strip, table.field or bare name")->delimiter(',');
  add_common(anon, anon_args.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitBadConfig;
  }

  if (*synth) return cmd_synth(synth_config, synth_out, std::cerr);
  if (*audit) return cmd_audit(audit_args, std::cerr);
  if (*predict) return cmd_predict(predict_args, std::cerr);
  if (*anon) {
    if (!strip.empty()) anon_args.strip = strip;
    return cmd_anon(anon_args, std::cerr);
  }
  return kExitError;
}
