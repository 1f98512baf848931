#include "kpo/cli/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace kpo::cli {

namespace {

std::string csv_cell(const Cell& cell) {
  struct Visitor {
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string quoted = "\"";
      for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      return quoted + "\"";
    }
  };
  return std::visit(Visitor{}, cell);
}

nlohmann::json json_cell(const Cell& cell) {
  return std::visit([](const auto& v) { return nlohmann::json(v); }, cell);
}

}  // namespace

std::string version() { return KPO_VERSION; }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_mp(const mp::Float& v) {
  const auto digits = static_cast<int>(std::floor(static_cast<double>(v.bits()) * std::log10(2.0)));
  return v.to_string(std::clamp(digits, 17, 40));
}

std::string render_csv(const Table& table, const nlohmann::json& config,
                       const std::vector<std::string>& notes) {
  std::string out = "# kpo " + version() + "\n";
  out += "# config " + config.dump() + "\n";
  for (const std::string& note : notes) out += "# " + note + "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += csv_cell(row[c]);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json document(const nlohmann::json& config) {
  nlohmann::json doc;
  doc["generator"] = "kpo " + version();
  doc["config"] = config;
  return doc;
}

nlohmann::json records(const Table& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json r = nlohmann::json::object();
    for (std::size_t c = 0; c < row.size() && c < table.columns.size(); ++c) {
      r[table.columns[c]] = json_cell(row[c]);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string render_json(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

}  // namespace kpo::cli
