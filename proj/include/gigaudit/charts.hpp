#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace gigaudit {

struct Series {
  std::string name;
  std::vector<std::optional<double>> values;
  std::vector<bool> dashed;  // per point, optional; marks interpolated values
};

std::string svg_line_chart(const std::string& title, const std::vector<std::string>& x_labels,
                           const std::vector<Series>& series, const std::string& y_label);

// Stacked when `stacked`, grouped otherwise. Negative values draw below zero.
std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& x_labels,
                          const std::vector<Series>& series, const std::string& y_label, bool stacked);

// Charts drawn from an audit report: pay per hour, utilisation, take-rate
// histogram, surplus and per-minute split. File name -> SVG text.
std::map<std::string, std::string> render_audit_charts(const nlohmann::json& report);

}  // namespace gigaudit
