#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <iostream>

#include "gigaudit/anonymize.hpp"
#include "gigaudit/audit.hpp"
#include "gigaudit/commands.hpp"
#include "gigaudit/error.hpp"
#include "gigaudit/ols.hpp"
#include "gigaudit/synthgen.hpp"

namespace py = pybind11;
using namespace gigaudit;

namespace {

CommonArgs common(const std::string& era_boundaries, const std::string& timezone, long window, int jobs) {
  CommonArgs c;
  c.era_boundaries = era_boundaries;
  c.timezone = timezone;
  c.link_window_seconds = window;
  c.jobs = jobs;
  return c;
}

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
  Matrix m(0, rows.empty() ? 0 : rows.front().size());
  for (const auto& r : rows) m.append_row(r);
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the gigaudit toolkit";

  py::register_exception<AuditError>(m, "AuditError", PyExc_RuntimeError);

  m.attr("PII_MARKER") = kPiiMarker;
  m.attr("SALT_ENV_VAR") = kSaltEnvVar;

  m.def("pseudonym", [](const std::string& id, const std::string& salt) { return pseudonym(id, salt); },
        py::arg("driver_id"), py::arg("salt"));

  m.def(
      "era_of",
      [](const std::string& month, const std::string& boundaries) {
        auto b = EraBoundaries::parse(boundaries);
        b.validate();
        return std::string(to_string(era_of(Month::parse(month), b)));
      },
      py::arg("month"), py::arg("era_boundaries") = "2022-02,2023-02");

  m.def(
      "generate",
      [](const std::string& config_json, const std::filesystem::path& out) {
        const GenConfig cfg = GenConfig::from_json(nlohmann::json::parse(config_json));
        py::gil_scoped_release release;
        return generate(cfg, out).to_json().dump();
      },
      py::arg("config_json"), py::arg("out"));

  m.def(
      "audit_report",
      [](const std::filesystem::path& root, const std::string& era_boundaries, const std::string& timezone,
         long window, int jobs, std::optional<std::string> cohort_pre, std::optional<std::string> cohort_post) {
        AuditOptions o;
        o.pipeline.ingest.eras = EraBoundaries::parse(era_boundaries);
        o.pipeline.ingest.eras.validate();
        o.pipeline.ingest.zone = TimeZone::named(timezone);
        o.pipeline.link.window_seconds = window;
        o.pipeline.jobs = jobs;
        o.pipeline.sync();
        if (cohort_pre) o.cohort_pre = MonthRange::parse(*cohort_pre);
        if (cohort_post) o.cohort_post = MonthRange::parse(*cohort_post);
        py::gil_scoped_release release;
        const auto run = run_pipeline(root, o.pipeline);
        return dump_report(build_audit_report(run, o));
      },
      py::arg("root"), py::arg("era_boundaries") = "2022-02,2023-02", py::arg("timezone") = "Europe/London",
      py::arg("link_window_seconds") = 600, py::arg("jobs") = 1, py::arg("cohort_pre") = py::none(),
      py::arg("cohort_post") = py::none());

  m.def(
      "cmd_audit",
      [](const std::filesystem::path& root, const std::filesystem::path& out, std::optional<std::filesystem::path> rpi,
         std::optional<std::string> rpi_base, std::optional<std::string> cohort_pre,
         std::optional<std::string> cohort_post, bool csv, bool charts, const std::string& era_boundaries,
         const std::string& timezone, long window, int jobs) {
        AuditArgs a;
        a.root = root;
        a.out = out;
        a.rpi = rpi;
        a.rpi_base = rpi_base;
        a.cohort_pre = cohort_pre;
        a.cohort_post = cohort_post;
        a.csv = csv;
        a.charts = charts;
        a.common = common(era_boundaries, timezone, window, jobs);
        py::gil_scoped_release release;
        return cmd_audit(a, std::cerr);
      },
      py::arg("root"), py::arg("out"), py::arg("rpi") = py::none(), py::arg("rpi_base") = py::none(),
      py::arg("cohort_pre") = py::none(), py::arg("cohort_post") = py::none(), py::arg("csv") = false,
      py::arg("charts") = false, py::arg("era_boundaries") = "2022-02,2023-02", py::arg("timezone") = "Europe/London",
      py::arg("link_window_seconds") = 600, py::arg("jobs") = 1);

  m.def(
      "cmd_predict",
      [](const std::filesystem::path& root, const std::filesystem::path& out, const std::string& mode,
         unsigned long long seed, double test_fraction, int jobs) {
        PredictArgs p;
        p.root = root;
        p.out = out;
        p.mode = mode;
        p.seed = seed;
        p.test_fraction = test_fraction;
        p.common.jobs = jobs;
        py::gil_scoped_release release;
        return cmd_predict(p, std::cerr);
      },
      py::arg("root"), py::arg("out"), py::arg("mode") = "both", py::arg("seed") = 7, py::arg("test_fraction") = 0.2,
      py::arg("jobs") = 1);

  m.def(
      "cmd_synth",
      [](const std::filesystem::path& config, const std::filesystem::path& out) {
        py::gil_scoped_release release;
        return cmd_synth(config, out, std::cerr);
      },
      py::arg("config"), py::arg("out"));

  // The salt comes from salt_file or the environment, never from an argument.
  m.def(
      "cmd_anon",
      [](const std::filesystem::path& root, const std::filesystem::path& out, std::optional<std::string> salt_file,
         std::optional<std::vector<std::string>> strip) {
        AnonArgs a;
        a.root = root;
        a.out = out;
        a.salt_file = salt_file;
        a.strip = strip;
        py::gil_scoped_release release;
        return cmd_anon(a, std::cerr);
      },
      py::arg("root"), py::arg("out"), py::arg("salt_file") = py::none(), py::arg("strip") = py::none());

  m.def(
      "fit_ols",
      [](const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
        const auto model = fit_ols(to_matrix(x), y);
        py::dict d;
        d["coefficients"] = model.coefficients;
        d["intercept"] = model.intercept;
        d["dropped_columns"] = model.dropped_columns;
        d["training_r2"] = r2(model, to_matrix(x), y);
        return d;
      },
      py::arg("x"), py::arg("y"));

  m.def("r2_score", [](const std::vector<double>& y, const std::vector<double>& p) { return r2_score(y, p); },
        py::arg("y"), py::arg("predicted"));
}
