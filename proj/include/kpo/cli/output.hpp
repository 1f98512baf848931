#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "kpo/mp_float.hpp"

namespace kpo::cli {

std::string version();

// 17 significant digits, the round-trip width of a double.
std::string format_double(double v);

// Decimal string carrying every digit the working precision supports, capped
// at 40 significant digits.
std::string format_mp(const mp::Float& v);

using Cell = std::variant<double, std::int64_t, std::string, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

// Header comments (generator, resolved config, extra notes), the column row,
// then one line per row.
std::string render_csv(const Table& table, const nlohmann::json& config,
                       const std::vector<std::string>& notes = {});

// {"generator": ..., "config": ...}
nlohmann::json document(const nlohmann::json& config);

// Rows as an array of objects keyed by column.
nlohmann::json records(const Table& table);

std::string render_json(const nlohmann::json& doc);

}  // namespace kpo::cli
