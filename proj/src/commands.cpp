#include "gigaudit/commands.hpp"

#include <fstream>

#include "gigaudit/anonymize.hpp"
#include "gigaudit/audit.hpp"
#include "gigaudit/charts.hpp"
#include "gigaudit/error.hpp"
#include "gigaudit/synthgen.hpp"

namespace gigaudit {
namespace {

namespace fs = std::filesystem;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw AuditError(ErrorCode::Io, "cannot write " + p.string());
  f << text;
  if (!f) throw AuditError(ErrorCode::Io, "write failed for " + p.string());
}

PipelineOptions pipeline_options(const CommonArgs& c) {
  PipelineOptions o;
  try {
    o.ingest.eras = EraBoundaries::parse(c.era_boundaries);
    o.ingest.eras.validate();
    o.ingest.zone = TimeZone::named(c.timezone);
    if (c.column_map) o.columns = ColumnMap::load(*c.column_map);
    o.columns.validate();
  } catch (const AuditError& e) {
    throw ConfigError(e.what());
  }
  if (c.naive_timestamps == "utc") {
    o.ingest.naive = NaiveTimestamps::Utc;
  } else if (c.naive_timestamps == "local") {
    o.ingest.naive = NaiveTimestamps::Local;
  } else {
    throw ConfigError("--naive-timestamps must be utc or local");
  }
  if (c.link_window_seconds < 0 || c.link_early_seconds < 0) throw ConfigError("link window must be non-negative");
  if (c.jobs < 1) throw ConfigError("--jobs must be at least 1");
  o.link.window_seconds = c.link_window_seconds;
  o.link.early_seconds = c.link_early_seconds;
  o.jobs = c.jobs;
  o.sync();
  return o;
}

MonthRange parse_window(const std::string& text, const char* flag) {
  try {
    return MonthRange::parse(text);
  } catch (const AuditError& e) {
    throw ConfigError(std::string(flag) + ": " + e.what());
  }
}

void log_failures(const PipelineRun& run, std::ostream& log) {
  for (const auto& [bundle, reason] : run.failures) log << "bundle " << bundle << " skipped: " << reason << "\n";
}

// Shared error mapping for the commands.
template <typename F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const AuditError& e) {
    log << "error: " << e.what() << "\n";
    if (e.code() == ErrorCode::InvalidConfig || e.code() == ErrorCode::InvalidColumnMap) return kExitBadConfig;
    if (e.code() == ErrorCode::WeakSalt) return kExitBadSalt;
    return kExitError;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace

int cmd_synth(const fs::path& config, const fs::path& out, std::ostream& log) {
  return guarded(log, [&] {
    if (!fs::exists(config)) throw ConfigError("config file " + config.string() + " not found");
    const GenConfig cfg = GenConfig::load(config);
    const GroundTruth truth = generate(cfg, out);
    log << "wrote " << truth.drivers.size() << " bundles to " << (out / "bundles").string() << "\n";
    return kExitOk;
  });
}

int cmd_audit(const AuditArgs& args, std::ostream& log) {
  return guarded(log, [&] {
    AuditOptions opts;
    opts.pipeline = pipeline_options(args.common);
    if (args.weeks != "iso") throw ConfigError("--weeks supports only iso");
    if (args.cohort_pre.has_value() != args.cohort_post.has_value()) {
      throw ConfigError("--cohort-pre and --cohort-post go together");
    }
    if (args.cohort_pre) {
      opts.cohort_pre = parse_window(*args.cohort_pre, "--cohort-pre");
      opts.cohort_post = parse_window(*args.cohort_post, "--cohort-post");
      if (opts.cohort_pre->size() != opts.cohort_post->size()) throw ConfigError("cohort windows differ in length");
      if (!(opts.cohort_pre->last < opts.cohort_post->first || opts.cohort_post->last < opts.cohort_pre->first)) {
        throw ConfigError("cohort windows overlap");
      }
    }
    if (args.rpi) {
      try {
        opts.rpi = RpiSeries::load_csv(args.rpi->string());
      } catch (const AuditError& e) {
        throw ConfigError(std::string("--rpi: ") + e.what());
      }
    }
    if (args.rpi_base) {
      try {
        opts.rpi_base = Month::parse(*args.rpi_base);
      } catch (const AuditError& e) {
        throw ConfigError(std::string("--rpi-base: ") + e.what());
      }
    }
    if (!fs::is_directory(args.root)) {
      log << "error: bundle root " << args.root.string() << " not found\n";
      return static_cast<int>(kExitNoData);
    }
    const PipelineRun run = run_pipeline(args.root, opts.pipeline);
    log_failures(run, log);
    if (run.drivers.empty()) {
      log << "error: no valid bundles under " << args.root.string() << "\n";
      return static_cast<int>(kExitNoData);
    }
    const auto report = build_audit_report(run, opts);
    write_text(args.out / "audit_report.json", dump_report(report));
    if (args.csv) {
      for (const auto& [name, text] : audit_csv_tables(report)) write_text(args.out / "csv" / name, text);
    }
    if (args.charts) {
      for (const auto& [name, text] : render_audit_charts(round_floats(report))) {
        write_text(args.out / "charts" / name, text);
      }
    }
    log << "audited " << run.drivers.size() << " of " << run.bundles_found << " bundles\n";
    return static_cast<int>(kExitOk);
  });
}

int cmd_predict(const PredictArgs& args, std::ostream& log) {
  return guarded(log, [&] {
    const PipelineOptions po = pipeline_options(args.common);
    std::vector<MatrixMode> modes;
    if (args.mode == "single_year" || args.mode == "both") modes.push_back(MatrixMode::SingleYear);
    if (args.mode == "cumulative" || args.mode == "both") modes.push_back(MatrixMode::Cumulative);
    if (modes.empty()) throw ConfigError("--mode must be single_year, cumulative or both");
    if (!(args.test_fraction > 0.0 && args.test_fraction < 1.0)) throw ConfigError("--test-fraction must be in (0, 1)");
    if (!fs::is_directory(args.root)) {
      log << "error: bundle root " << args.root.string() << " not found\n";
      return static_cast<int>(kExitNoData);
    }
    const PipelineRun run = run_pipeline(args.root, po);
    log_failures(run, log);
    if (run.drivers.empty()) {
      log << "error: no valid bundles under " << args.root.string() << "\n";
      return static_cast<int>(kExitNoData);
    }
    const auto linked = all_linked(run);
    YearMatrixOptions mo;
    mo.seed = args.seed;
    mo.test_fraction = args.test_fraction;
    mo.jobs = args.common.jobs;
    mo.zone = po.ingest.zone;
    std::vector<std::pair<MatrixMode, YearMatrix>> results;
    for (MatrixMode m : modes) {
      try {
        results.emplace_back(m, year_matrix(linked, m, mo));
      } catch (const AuditError& e) {
        log << "error: " << e.what() << "\n";
        return static_cast<int>(kExitNoData);
      }
    }
    for (const auto& [m, matrix] : results) {
      const std::string stem = "year_matrix_" + std::string(to_string(m));
      write_text(args.out / (stem + ".csv"), matrix.to_csv());
      write_text(args.out / (stem + ".json"), dump_report(matrix.to_json()));
    }
    log << "predicted over " << linked.size() << " linked trips\n";
    return static_cast<int>(kExitOk);
  });
}

int cmd_anon(const AnonArgs& args, std::ostream& log) {
  return guarded(log, [&] {
    const PipelineOptions po = pipeline_options(args.common);
    const std::string salt = resolve_salt(args.salt_file);
    if (args.out.empty()) throw ConfigError("--out is required");
    if (!fs::is_directory(args.root)) {
      log << "error: bundle root " << args.root.string() << " not found\n";
      return static_cast<int>(kExitNoData);
    }
    const fs::path root = fs::weakly_canonical(args.root);
    const fs::path out = fs::weakly_canonical(args.out);
    if (out == root) throw ConfigError("--out must differ from the input root");
    const std::vector<std::string> policy = args.strip.value_or(default_strip_policy());
    try {
      (void)strip_fields(NormalizedBundle{}, policy);
    } catch (const AuditError& e) {
      throw ConfigError(e.what());
    }
    const auto dirs = find_bundle_dirs(root);
    std::size_t written = 0;
    for (const auto& dir : dirs) {
      if (fs::weakly_canonical(dir) == out) continue;
      try {
        const NormalizedBundle b = ingest_bundle(dir, po.columns, po.ingest);
        const NormalizedBundle anon = strip_fields(pseudonymize(b, salt), policy);
        write_bundle(anon, out / anon.driver_id);
        ++written;
      } catch (const AuditError& e) {
        log << "bundle " << dir.filename().string() << " skipped: " << e.what() << "\n";
      }
    }
    if (written == 0) {
      log << "error: no valid bundles under " << root.string() << "\n";
      return static_cast<int>(kExitNoData);
    }
    log << "anonymized " << written << " bundles\n";
    return static_cast<int>(kExitOk);
  });
}

}  // namespace gigaudit
