#pragma once

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kpo/cli/error.hpp"
#include "kpo/cli/expression.hpp"
#include "kpo/eigensolver.hpp"

namespace kpo::cli {

enum class Command { spectrum, expect, gaps, density, contours, extrema, scaling, overlap };
enum class Format { csv, json };

std::string to_string(Command c);
Command parse_command(const std::string& name);
std::string to_string(Format f);
Format parse_format(const std::string& name);

// A drive parameter is either one value or a sweep range.
using ParamValue = std::variant<double, Range>;

struct RunConfig {
  Command command = Command::spectrum;
  ParamValue xi1 = 0.0;
  ParamValue xi2 = 0.0;
  ParamValue ne = 1.0;
  std::size_t dim = 0;    // 0: automatic truncation
  double epsilon = 0.0;   // 0: default symmetry breaking when localizing
  std::optional<std::size_t> levels;  // command-specific default when absent
  bool localize = false;
  std::optional<std::size_t> gap_index;
  mp::Bits bits = mp::kDoubleBits;    // gaps: > 53 switches to the arbitrary-precision solver
  PrecisionPlan plan;
  std::vector<double> energies;       // contours
  std::size_t resolution = 512;       // contours
  double extent = 0.0;                // contours: half-width, 0 for the default window
  double window = 0.0;                // density: 0 for the adaptive kernel
  std::size_t samples = 4096;         // density
  Format format = Format::csv;
  std::string out;                    // empty: stdout
  std::string fit_out;                // scaling: empty derives from out
  std::size_t threads = 1;

  bool operator==(const RunConfig&) const = default;
};

nlohmann::json to_json(const RunConfig& config);
// Missing keys keep their defaults. Numbers may be given as expressions and
// sweeps as "a:b:n" strings.
RunConfig from_json(const nlohmann::json& j);

// Checks cross-field consistency for the selected command.
void validate(const RunConfig& config);

// Which drive parameter is swept; at most one may be a range.
enum class Axis { none, xi1, xi2, ne };
Axis sweep_axis(const RunConfig& config);
std::string axis_name(Axis axis);

std::vector<double> grid_of(const ParamValue& v);
double scalar_of(const ParamValue& v);

}  // namespace kpo::cli
