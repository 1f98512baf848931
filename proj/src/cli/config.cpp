#include "kpo/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "kpo/error.hpp"

namespace kpo::cli {

namespace {

using nlohmann::json;

const std::vector<std::pair<Command, std::string>> kCommands = {
    {Command::spectrum, "spectrum"}, {Command::expect, "expect"},     {Command::gaps, "gaps"},
    {Command::density, "density"},   {Command::contours, "contours"}, {Command::extrema, "extrema"},
    {Command::scaling, "scaling"},   {Command::overlap, "overlap"},
};

json range_to_json(const Range& r) {
  return {{"start", r.start},
          {"stop", r.stop},
          {"count", r.count},
          {"spacing", r.spacing == Spacing::linear ? "lin" : "geom"}};
}

double number_from(const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return evaluate(v.get<std::string>());
  throw ConfigError("\"" + key + "\" must be a number or an expression string");
}

std::size_t count_from(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::size_t>(v.get<long long>());
  throw ConfigError("\"" + key + "\" must be a non-negative integer");
}

ParamValue param_from(const json& v, const std::string& key) {
  if (v.is_object()) {
    Range r;
    for (const auto& [k, item] : v.items()) {
      if (k == "start") {
        r.start = number_from(item, key + ".start");
      } else if (k == "stop") {
        r.stop = number_from(item, key + ".stop");
      } else if (k == "count") {
        r.count = count_from(item, key + ".count");
      } else if (k == "spacing") {
        const std::string s = item.get<std::string>();
        if (s != "lin" && s != "geom") throw ConfigError("\"" + key + ".spacing\" must be lin or geom");
        r.spacing = s == "lin" ? Spacing::linear : Spacing::geometric;
      } else {
        throw ConfigError("unknown key \"" + key + "." + k + "\"");
      }
    }
    if (r.count == 0) throw ConfigError("\"" + key + ".count\" must be positive");
    return r;
  }
  if (v.is_string() && looks_like_range(v.get<std::string>())) return parse_range(v.get<std::string>());
  return number_from(v, key);
}

json param_to_json(const ParamValue& v) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  return range_to_json(std::get<Range>(v));
}

}  // namespace

std::string to_string(Command c) {
  for (const auto& [cmd, name] : kCommands) {
    if (cmd == c) return name;
  }
  return "unknown";
}

Command parse_command(const std::string& name) {
  for (const auto& [cmd, n] : kCommands) {
    if (n == name) return cmd;
  }
  throw ConfigError("unknown command \"" + name + "\"");
}

std::string to_string(Format f) { return f == Format::csv ? "csv" : "json"; }

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::csv;
  if (name == "json") return Format::json;
  throw ConfigError("format must be csv or json, got \"" + name + "\"");
}

json to_json(const RunConfig& c) {
  json j;
  j["command"] = to_string(c.command);
  j["xi1"] = param_to_json(c.xi1);
  j["xi2"] = param_to_json(c.xi2);
  j["ne"] = param_to_json(c.ne);
  j["dim"] = c.dim;
  j["epsilon"] = c.epsilon;
  j["levels"] = c.levels ? json(*c.levels) : json(nullptr);
  j["localize"] = c.localize;
  j["gap_index"] = c.gap_index ? json(*c.gap_index) : json(nullptr);
  j["bits"] = c.bits;
  j["plan"] = {{"initial_bits", c.plan.initial_bits},
               {"max_bits", c.plan.max_bits},
               {"bits_step", c.plan.bits_step},
               {"dim_step", c.plan.dim_step},
               {"gap_rel_tol", c.plan.gap_rel_tol}};
  j["energies"] = c.energies;
  j["resolution"] = c.resolution;
  j["extent"] = c.extent;
  j["window"] = c.window;
  j["samples"] = c.samples;
  j["format"] = to_string(c.format);
  j["out"] = c.out;
  j["fit_out"] = c.fit_out;
  j["threads"] = c.threads;
  return j;
}

RunConfig from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  bool ne_given = false;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "command") {
        c.command = parse_command(v.get<std::string>());
      } else if (key == "xi1") {
        c.xi1 = param_from(v, key);
      } else if (key == "xi2") {
        c.xi2 = param_from(v, key);
      } else if (key == "ne") {
        c.ne = param_from(v, key);
        ne_given = true;
      } else if (key == "dim") {
        c.dim = count_from(v, key);
      } else if (key == "epsilon") {
        c.epsilon = number_from(v, key);
      } else if (key == "levels") {
        c.levels = v.is_null() ? std::nullopt : std::optional(count_from(v, key));
      } else if (key == "localize") {
        c.localize = v.get<bool>();
      } else if (key == "gap_index") {
        c.gap_index = v.is_null() ? std::nullopt : std::optional(count_from(v, key));
      } else if (key == "bits") {
        c.bits = static_cast<mp::Bits>(count_from(v, key));
      } else if (key == "plan") {
        if (!v.is_object()) throw ConfigError("\"plan\" must be an object");
        for (const auto& [pk, pv] : v.items()) {
          if (pk == "initial_bits") {
            c.plan.initial_bits = static_cast<mp::Bits>(count_from(pv, "plan." + pk));
          } else if (pk == "max_bits") {
            c.plan.max_bits = static_cast<mp::Bits>(count_from(pv, "plan." + pk));
          } else if (pk == "bits_step") {
            c.plan.bits_step = number_from(pv, "plan." + pk);
          } else if (pk == "dim_step") {
            c.plan.dim_step = number_from(pv, "plan." + pk);
          } else if (pk == "gap_rel_tol") {
            c.plan.gap_rel_tol = number_from(pv, "plan." + pk);
          } else {
            throw ConfigError("unknown key \"plan." + pk + "\"");
          }
        }
      } else if (key == "energies") {
        c.energies.clear();
        if (v.is_string()) {
          c.energies = parse_list(v.get<std::string>());
        } else {
          for (const auto& e : v) c.energies.push_back(number_from(e, key));
        }
      } else if (key == "resolution") {
        c.resolution = count_from(v, key);
      } else if (key == "extent") {
        c.extent = number_from(v, key);
      } else if (key == "window") {
        c.window = number_from(v, key);
      } else if (key == "samples") {
        c.samples = count_from(v, key);
      } else if (key == "format") {
        c.format = parse_format(v.get<std::string>());
      } else if (key == "out") {
        c.out = v.get<std::string>();
      } else if (key == "fit_out") {
        c.fit_out = v.get<std::string>();
      } else if (key == "threads") {
        c.threads = count_from(v, key);
      } else {
        throw ConfigError("unknown config key \"" + key + "\"");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  }
  if (c.command == Command::scaling && !ne_given) c.ne = Range{0.5, 4.0, 8, Spacing::geometric};
  return c;
}

std::vector<double> grid_of(const ParamValue& v) {
  if (const double* d = std::get_if<double>(&v)) return {*d};
  return std::get<Range>(v).values();
}

double scalar_of(const ParamValue& v) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  throw ConfigError("expected a single value, got a range");
}

Axis sweep_axis(const RunConfig& c) {
  std::vector<Axis> ranges;
  if (std::holds_alternative<Range>(c.xi1)) ranges.push_back(Axis::xi1);
  if (std::holds_alternative<Range>(c.xi2)) ranges.push_back(Axis::xi2);
  if (std::holds_alternative<Range>(c.ne)) ranges.push_back(Axis::ne);
  if (ranges.size() > 1) throw ConfigError("at most one of xi1, xi2, ne may be a range");
  return ranges.empty() ? Axis::none : ranges.front();
}

std::string axis_name(Axis axis) {
  switch (axis) {
    case Axis::xi1: return "xi1";
    case Axis::xi2: return "xi2";
    case Axis::ne: return "ne";
    case Axis::none: return "none";
  }
  return "none";
}

void validate(const RunConfig& c) {
  const Axis axis = sweep_axis(c);
  for (const ParamValue* v : {&c.xi1, &c.xi2, &c.ne}) {
    for (double x : grid_of(*v)) {
      if (!std::isfinite(x)) throw ConfigError("drive parameters must be finite");
    }
  }
  for (double ne : grid_of(c.ne)) {
    if (!(ne > 0.0)) throw ConfigError("ne must be positive");
  }
  if (c.dim != 0 && c.dim < 3) throw ConfigError("dim must be 0 (automatic) or at least 3");
  if (!(c.epsilon >= 0.0) || !std::isfinite(c.epsilon)) throw ConfigError("epsilon must be >= 0");
  if (c.levels && *c.levels == 0) throw ConfigError("levels must be positive");
  if (c.bits < mp::kDoubleBits) throw ConfigError("bits must be at least 53");
  if (c.threads == 0) throw ConfigError("threads must be positive");
  try {
    c.plan.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("precision plan: ") + e.what());
  }

  switch (c.command) {
    case Command::spectrum:
    case Command::expect:
    case Command::gaps:
      break;
    case Command::density:
    case Command::contours:
    case Command::extrema:
      if (axis != Axis::none) throw ConfigError(to_string(c.command) + " takes single parameter values");
      break;
    case Command::scaling: {
      if (axis != Axis::ne) throw ConfigError("scaling needs an ne range and single xi1, xi2 values");
      const auto grid = grid_of(c.ne);
      if (grid.size() < 4) throw ConfigError("scaling needs at least four ne values");
      if (!std::is_sorted(grid.begin(), grid.end()) ||
          std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
        throw ConfigError("scaling ne grid must be ascending");
      }
      break;
    }
    case Command::overlap:
      if (axis == Axis::xi1 || axis == Axis::xi2) throw ConfigError("overlap sweeps ne only");
      if (scalar_of(c.xi2) == 0.0) throw ConfigError("overlap needs a nonzero xi2");
      break;
  }
  if (c.command == Command::contours) {
    if (c.energies.empty()) throw ConfigError("contours needs at least one energy");
    if (c.resolution < 16) throw ConfigError("contour resolution must be >= 16");
    if (!(c.extent >= 0.0) || !std::isfinite(c.extent)) throw ConfigError("extent must be >= 0");
  }
  if (c.command == Command::density) {
    if (!(c.window >= 0.0) || !std::isfinite(c.window)) throw ConfigError("window must be >= 0");
    if (c.samples < 2) throw ConfigError("density needs at least 2 samples");
  }
  if (c.localize && c.command != Command::spectrum && c.command != Command::expect &&
      c.command != Command::gaps) {
    throw ConfigError("--localize applies to spectrum, expect and gaps");
  }
  if (c.localize && c.bits > mp::kDoubleBits) {
    throw ConfigError("--localize has no arbitrary-precision path; drop --bits");
  }
}

}  // namespace kpo::cli
