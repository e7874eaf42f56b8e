#include "gigaudit/charts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace gigaudit {
namespace {

using json = nlohmann::json;

constexpr double kWidth = 760, kHeight = 420;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 70;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double lo = 0, hi = 1;
  std::size_t n = 1;

  double plot_w() const { return kWidth - kLeft - kRight; }
  double plot_h() const { return kHeight - kTop - kBottom; }
  double y(double v) const { return kTop + plot_h() * (hi - v) / (hi - lo); }
  double slot() const { return plot_w() / static_cast<double>(std::max<std::size_t>(n, 1)); }
  double x_center(std::size_t i) const { return kLeft + slot() * (static_cast<double>(i) + 0.5); }
};

double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

std::string open_svg(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
         "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) +
         "</text>\n";
}

std::string axes(const Frame& f, const std::vector<std::string>& labels, const std::string& y_label) {
  std::string s;
  const double step = nice_step(f.hi - f.lo);
  for (double v = std::ceil(f.lo / step) * step; v <= f.hi + 1e-9; v += step) {
    s += "<line x1=\"" + num(kLeft) + "\" x2=\"" + num(kWidth - kRight) + "\" y1=\"" + num(f.y(v)) + "\" y2=\"" +
         num(f.y(v)) + "\" stroke=\"#e0e0e0\"/>\n";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", std::abs(v) < step * 1e-6 ? 0.0 : v);
    s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(f.y(v) + 4) + "\" text-anchor=\"end\">" + buf + "</text>\n";
  }
  s += "<line x1=\"" + num(kLeft) + "\" x2=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" y2=\"" +
       num(kHeight - kBottom) + "\" stroke=\"black\"/>\n";
  const double zero = f.y(std::clamp(0.0, f.lo, f.hi));
  s += "<line x1=\"" + num(kLeft) + "\" x2=\"" + num(kWidth - kRight) + "\" y1=\"" + num(zero) + "\" y2=\"" +
       num(zero) + "\" stroke=\"black\"/>\n";
  const std::size_t every = std::max<std::size_t>(1, labels.size() / 16);
  for (std::size_t i = 0; i < labels.size(); i += every) {
    const double x = f.x_center(i);
    const double y = kHeight - kBottom + 14;
    s += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"end\" transform=\"rotate(-40 " + num(x) + " " +
         num(y) + ")\">" + escape(labels[i]) + "</text>\n";
  }
  s += "<text x=\"16\" y=\"" + num(kTop + f.plot_h() / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       num(kTop + f.plot_h() / 2) + ")\">" + escape(y_label) + "</text>\n";
  return s;
}

std::string legend(const std::vector<Series>& series) {
  std::string s;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = kTop + 14.0 * static_cast<double>(i) + 6;
    s += "<rect x=\"" + num(kWidth - kRight + 12) + "\" y=\"" + num(y - 8) + "\" width=\"10\" height=\"10\" fill=\"" +
         kPalette[i % 6] + "\"/>\n<text x=\"" + num(kWidth - kRight + 26) + "\" y=\"" + num(y + 1) + "\">" +
         escape(series[i].name) + "</text>\n";
  }
  return s;
}

Frame frame_for(std::size_t n, double lo, double hi) {
  Frame f;
  f.n = n;
  f.lo = std::min(0.0, lo);
  f.hi = std::max(hi, f.lo + 1e-9);
  if (f.hi - f.lo < 1e-9) f.hi = f.lo + 1.0;
  const double pad = (f.hi - f.lo) * 0.05;
  f.hi += pad;
  if (f.lo < 0) f.lo -= pad;
  return f;
}

std::optional<double> opt(const json& v) {
  if (v.is_number()) return v.get<double>();
  return std::nullopt;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::vector<std::string>& x_labels,
                           const std::vector<Series>& series, const std::string& y_label) {
  double lo = 0, hi = 0;
  for (const auto& s : series) {
    for (const auto& v : s.values) {
      if (v) lo = std::min(lo, *v), hi = std::max(hi, *v);
    }
  }
  const Frame f = frame_for(x_labels.size(), lo, hi);
  std::string out = open_svg(title) + axes(f, x_labels, y_label);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = kPalette[k % 6];
    for (std::size_t i = 0; i + 1 < s.values.size(); ++i) {
      if (!s.values[i] || !s.values[i + 1]) continue;
      const bool dash = (i < s.dashed.size() && s.dashed[i]) || (i + 1 < s.dashed.size() && s.dashed[i + 1]);
      out += "<line x1=\"" + num(f.x_center(i)) + "\" y1=\"" + num(f.y(*s.values[i])) + "\" x2=\"" +
             num(f.x_center(i + 1)) + "\" y2=\"" + num(f.y(*s.values[i + 1])) + "\" stroke=\"" + colour +
             "\" stroke-width=\"2\"" + (dash ? " stroke-dasharray=\"5,4\"" : "") + "/>\n";
    }
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (!s.values[i]) continue;
      const bool dash = i < s.dashed.size() && s.dashed[i];
      out += "<circle cx=\"" + num(f.x_center(i)) + "\" cy=\"" + num(f.y(*s.values[i])) + "\" r=\"3\" fill=\"" +
             (dash ? std::string("white") : std::string(colour)) + "\" stroke=\"" + colour + "\"/>\n";
    }
  }
  return out + legend(series) + "</svg>\n";
}

std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& x_labels,
                          const std::vector<Series>& series, const std::string& y_label, bool stacked) {
  double lo = 0, hi = 0;
  for (std::size_t i = 0; i < x_labels.size(); ++i) {
    double pos = 0, neg = 0;
    for (const auto& s : series) {
      const double v = i < s.values.size() ? s.values[i].value_or(0.0) : 0.0;
      if (stacked) {
        (v >= 0 ? pos : neg) += v;
      } else {
        pos = std::max(pos, v);
        neg = std::min(neg, v);
      }
    }
    hi = std::max(hi, pos);
    lo = std::min(lo, neg);
  }
  const Frame f = frame_for(x_labels.size(), lo, hi);
  std::string out = open_svg(title) + axes(f, x_labels, y_label);
  const double width = f.slot() * 0.7;
  for (std::size_t i = 0; i < x_labels.size(); ++i) {
    double pos = 0, neg = 0;
    for (std::size_t k = 0; k < series.size(); ++k) {
      const double v = i < series[k].values.size() ? series[k].values[i].value_or(0.0) : 0.0;
      double x, w, y0, y1;
      if (stacked) {
        x = f.x_center(i) - width / 2;
        w = width;
        double& base = v >= 0 ? pos : neg;
        y0 = base;
        y1 = base + v;
        base = y1;
      } else {
        w = width / static_cast<double>(series.size());
        x = f.x_center(i) - width / 2 + w * static_cast<double>(k);
        y0 = 0;
        y1 = v;
      }
      const double top = f.y(std::max(y0, y1));
      const double h = std::abs(f.y(y0) - f.y(y1));
      out += "<rect x=\"" + num(x) + "\" y=\"" + num(top) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
             "\" fill=\"" + kPalette[k % 6] + "\"/>\n";
    }
  }
  return out + legend(series) + "</svg>\n";
}

std::map<std::string, std::string> render_audit_charts(const json& report) {
  std::map<std::string, std::string> out;
  {
    std::vector<std::string> labels;
    Series trib{"tribunal", {}, {}}, plat{"platform", {}, {}};
    for (const auto& row : report["pay_per_hour"]["monthly"]) {
      labels.push_back(row["month"].get<std::string>());
      trib.values.push_back(opt(row["pay_per_hour_tribunal"]));
      plat.values.push_back(opt(row["pay_per_hour_platform"]));
    }
    out["pay_per_hour.svg"] = svg_line_chart("Pay per hour by working-time definition", labels, {plat, trib}, "GBP / hour");
  }
  {
    std::vector<std::string> labels;
    Series sb{"standby", {}, {}}, er{"en route", {}, {}}, ot{"on trip", {}, {}};
    for (const auto& row : report["utilisation"]) {
      labels.push_back(row["month"].get<std::string>());
      sb.values.push_back(opt(row["standby_hours_per_day"]));
      er.values.push_back(opt(row["en_route_hours_per_day"]));
      ot.values.push_back(opt(row["on_trip_hours_per_day"]));
    }
    out["utilisation.svg"] = svg_bar_chart("Average hours per active day", labels, {ot, er, sb}, "hours / day", true);
  }
  {
    std::vector<std::string> labels;
    Series s{"trips", {}, {}};
    for (const auto& b : report["take_rates"]["histogram"]["bins"]) {
      labels.push_back(b["bin"].get<std::string>() + "%");
      s.values.push_back(opt(b["count"]));
    }
    out["take_rate_histogram.svg"] = svg_bar_chart("Driver share of rider fare", labels, {s}, "trips", false);
  }
  {
    std::vector<std::string> labels;
    Series s{"surplus", {}, {}};
    for (const auto& row : report["surplus"]) {
      labels.push_back(row["month"].get<std::string>());
      s.values.push_back(opt(row["pounds_per_hour"]));
      s.dashed.push_back(row["status"] == "interpolated");
    }
    out["surplus.svg"] = svg_line_chart("Fare minus driver pay per on-trip hour", labels, {s}, "GBP / hour");
  }
  {
    std::vector<std::string> labels;
    Series d{"driver", {}, {}}, p{"platform", {}, {}};
    const auto& bins = report["per_minute_split"]["bins"];
    for (auto it = bins.rbegin(); it != bins.rend(); ++it) {
      labels.push_back((*it)["bin"].get<std::string>() + "%");
      d.values.push_back(opt((*it)["driver_per_min"]));
      p.values.push_back(opt((*it)["platform_per_min"]));
    }
    out["per_minute_split.svg"] = svg_bar_chart("Fare per on-trip minute by driver share", labels, {d, p}, "GBP / min", true);
  }
  return out;
}

}  // namespace gigaudit
