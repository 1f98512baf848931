#include "kpo/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <optional>
#include <exception>

#include "kpo/classical.hpp"
#include "kpo/error.hpp"
#include "kpo/cli/output.hpp"
#include "kpo/observables.hpp"
#include "kpo/scaling.hpp"

namespace kpo::cli {

namespace {

using nlohmann::json;

double first_of(const ParamValue& v) {
  return std::holds_alternative<double>(v) ? std::get<double>(v) : std::get<Range>(v).start;
}

struct SweepSetup {
  SweepAxis axis = SweepAxis::two_photon;
  std::string name;
  std::vector<double> grid;
  ModelParams params;  // template; the axis field is overwritten per point
};

// A config without any range becomes a one-point sweep along xi2.
SweepSetup sweep_setup(const RunConfig& c) {
  SweepSetup s;
  s.params.one_photon = first_of(c.xi1);
  s.params.two_photon = first_of(c.xi2);
  s.params.classicality = first_of(c.ne);
  s.params.dim = c.dim;
  s.params.symmetry_breaking = c.epsilon;
  switch (sweep_axis(c)) {
    case Axis::xi1: s.axis = SweepAxis::one_photon; s.name = "xi1"; s.grid = grid_of(c.xi1); break;
    case Axis::ne: s.axis = SweepAxis::classicality; s.name = "ne"; s.grid = grid_of(c.ne); break;
    case Axis::xi2:
    case Axis::none: s.axis = SweepAxis::two_photon; s.name = "xi2"; s.grid = grid_of(c.xi2); break;
  }
  return s;
}

ModelParams point_params(const RunConfig& c) {
  ModelParams p = make_params(scalar_of(c.xi1), scalar_of(c.xi2), scalar_of(c.ne));
  if (c.dim != 0) p.dim = c.dim;
  p.symmetry_breaking = c.epsilon;
  return p;
}

struct Rendered {
  Table table;
  std::vector<std::string> notes;
  json extra = json::object();
  bool rows_in_json = true;
};

std::string render(const RunConfig& c, const Rendered& r) {
  const json config = to_json(c);
  if (c.format == Format::csv) return render_csv(r.table, config, r.notes);
  json doc = document(config);
  for (const auto& [key, value] : r.extra.items()) doc[key] = value;
  if (r.rows_in_json) doc["rows"] = records(r.table);
  return render_json(doc);
}

std::int64_t as_int(std::size_t v) { return static_cast<std::int64_t>(v); }

struct Failure {
  double axis_value = 0.0;
  bool nonconverged = false;
  std::string error;
};

void record_failures(const std::string& axis, const std::vector<Failure>& failures, Rendered& r) {
  json list = json::array();
  for (const Failure& f : failures) {
    r.notes.push_back("failed " + axis + "=" + format_double(f.axis_value) +
                      (f.nonconverged ? " nonconverged: " : ": ") + f.error);
    list.push_back({{"axis_value", f.axis_value}, {"nonconverged", f.nonconverged}, {"error", f.error}});
  }
  r.extra["failures"] = std::move(list);
}

void sweep_header(const SweepSetup& s, std::size_t dim, Rendered& r) {
  r.notes.push_back("axis " + s.name);
  r.notes.push_back("dim " + std::to_string(dim));
  r.extra["axis"] = s.name;
  r.extra["dim"] = dim;
}

CommandResult finish(const RunConfig& c, const Rendered& r, bool failed) {
  CommandResult result;
  result.exit_code = failed ? kExitNonConverged : kExitOk;
  result.files.push_back({c.out, render(c, r)});
  return result;
}

std::vector<Failure> failures_of(const SweepTable& t) {
  std::vector<Failure> out;
  for (const SweepPoint& p : t.points) {
    if (p.failed) out.push_back({p.axis_value, p.nonconverged, p.error});
  }
  return out;
}

CommandResult cmd_spectrum(const RunConfig& c, TaskRunner& runner) {
  const SweepSetup s = sweep_setup(c);
  SweepOutputs o;
  o.levels = c.levels.value_or(10);
  const SweepTable t = sweep(s.params, s.axis, s.grid, o, &runner);

  Rendered r;
  sweep_header(s, t.dim, r);
  r.table.columns = {"axis_value", "level_index", "energy", "energy_per_ne"};
  for (const SweepPoint& p : t.points) {
    for (std::size_t k = 0; k < p.energies.size(); ++k) {
      r.table.rows.push_back({p.axis_value, as_int(k), p.energies[k], p.energies[k] / p.params.classicality});
    }
  }
  const auto failures = failures_of(t);
  record_failures(s.name, failures, r);
  return finish(c, r, !failures.empty());
}

CommandResult cmd_expect(const RunConfig& c, TaskRunner& runner) {
  const SweepSetup s = sweep_setup(c);
  SweepOutputs o;
  o.levels = c.levels.value_or(2);
  o.expectations = true;
  o.localize = c.localize;
  const SweepTable t = sweep(s.params, s.axis, s.grid, o, &runner);

  Rendered r;
  sweep_header(s, t.dim, r);
  r.table.columns = {"axis_value", "state_index", "energy", "energy_per_ne", "q_mean", "p_mean"};
  for (const SweepPoint& p : t.points) {
    for (const ExpectationRecord& e : p.expectations) {
      r.table.rows.push_back({p.axis_value, as_int(e.state_index), e.energy,
                              e.energy / p.params.classicality, e.q_mean, e.p_mean});
    }
  }
  const auto failures = failures_of(t);
  record_failures(s.name, failures, r);
  return finish(c, r, !failures.empty());
}

struct GapPoint {
  double axis_value = 0.0;
  double n_e = 1.0;
  std::vector<GapRecord> gaps;
  bool failed = false;
  bool nonconverged = false;
  std::string error;
};

mp::Float gap_value(const GapRecord& g) {
  return g.precise_gap ? *g.precise_gap : mp::Float(g.gap, mp::kDoubleBits);
}

// Pairs (j, j+1) whose gap is small against the next one, scanned bottom-up
// without overlap.
std::vector<bool> doublet_flags(const std::vector<GapRecord>& gaps) {
  std::vector<bool> flags(gaps.size(), false);
  for (std::size_t j = 0; j + 1 < gaps.size(); ++j) {
    mp::Float outer = gap_value(gaps[j + 1]);
    outer *= kDoubletRatio;
    if (gap_value(gaps[j]) < outer) {
      flags[j] = true;
      ++j;
    }
  }
  return flags;
}

CommandResult cmd_gaps(const RunConfig& c, TaskRunner& runner) {
  const SweepSetup s = sweep_setup(c);
  const std::size_t levels = c.levels.value_or(40);
  std::vector<GapPoint> points(s.grid.size());
  std::size_t dim = 0;

  if (c.bits <= mp::kDoubleBits) {
    SweepOutputs o;
    o.levels = levels + 1;
    o.gaps = true;
    o.localize = c.localize;
    const SweepTable t = sweep(s.params, s.axis, s.grid, o, &runner);
    dim = t.dim;
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      const SweepPoint& p = t.points[i];
      points[i] = {p.axis_value, p.params.classicality, p.gaps, p.failed, p.nonconverged, p.error};
    }
  } else {
    dim = sweep_dimension(s.params, s.axis, s.grid);
    ModelParams checked = with_axis_value(s.params, s.axis, s.grid.front());
    checked.dim = dim;
    validate(checked);
    runner.run(s.grid.size(), [&](std::size_t i) {
      GapPoint& g = points[i];
      g.axis_value = s.grid[i];
      ModelParams p = with_axis_value(s.params, s.axis, s.grid[i]);
      p.dim = dim;
      g.n_e = p.classicality;
      try {
        const Spectrum sp = diagonalize_mp(build_hamiltonian_mp(p, c.bits), std::min(levels + 2, dim));
        auto gaps = adjacent_gaps(sp);
        if (gaps.size() > levels + 1) gaps.resize(levels + 1);
        g.gaps = std::move(gaps);
        if (!sp.converged) {
          g.failed = g.nonconverged = true;
          g.error = "arbitrary-precision solve did not converge";
        }
      } catch (const ConvergenceError& e) {
        g.failed = g.nonconverged = true;
        g.error = e.what();
      } catch (const std::exception& e) {
        g.failed = true;
        g.error = e.what();
      }
    });
  }

  Rendered r;
  sweep_header(s, dim, r);
  r.table.columns = {"axis_value", "j", "energy", "energy_per_ne", "gap", "gap_mp", "bits", "doublet"};
  std::vector<Failure> failures;
  for (const GapPoint& p : points) {
    if (p.failed) failures.push_back({p.axis_value, p.nonconverged, p.error});
    const std::vector<bool> flags = doublet_flags(p.gaps);
    const std::size_t shown = std::min(levels, p.gaps.size());
    for (std::size_t k = 0; k < shown; ++k) {
      const GapRecord& g = p.gaps[k];
      const std::string mp_text = g.precise_gap ? format_mp(*g.precise_gap) : format_double(g.gap);
      const mp::Bits bits = g.precise_gap ? g.precise_gap->bits() : mp::kDoubleBits;
      r.table.rows.push_back({p.axis_value, as_int(g.j), g.energy, g.energy / p.n_e, g.gap, mp_text,
                              static_cast<std::int64_t>(bits), static_cast<bool>(flags[k])});
    }
  }
  record_failures(s.name, failures, r);
  return finish(c, r, !failures.empty());
}

std::optional<double> separatrix_or_none(double xi1, double xi2) {
  try {
    return separatrix_energy(xi1, xi2);
  } catch (const InvalidParameter&) {
    return std::nullopt;
  }
}

CommandResult cmd_density(const RunConfig& c) {
  const ModelParams p = point_params(c);
  const Spectrum full = diagonalize(build_hamiltonian(p), false);
  const std::size_t levels = std::min(c.levels.value_or(full.size() / 2), full.size());

  Spectrum sub;
  sub.dim = full.dim;
  sub.energies.assign(full.energies.begin(), full.energies.begin() + static_cast<std::ptrdiff_t>(levels));
  const DensityCurve curve = c.window > 0.0 ? level_density(sub, c.window, c.samples)
                                            : level_density(sub, c.samples);
  const DensityPeak peak = density_peak(curve, sub.energies.front(), sub.energies.back());
  const SpacingMinimum minimum = second_neighbour_minimum(sub, levels);
  const std::optional<double> separatrix = separatrix_or_none(p.one_photon, p.two_photon);
  const double ne = p.classicality;

  Rendered r;
  r.notes.push_back("dim " + std::to_string(p.dim));
  r.notes.push_back("levels " + std::to_string(levels));
  r.notes.push_back("peak energy=" + format_double(peak.energy) + " energy_per_ne=" +
                    format_double(peak.energy / ne) + " window=" + format_double(peak.window));
  r.notes.push_back("spacing_minimum j=" + std::to_string(minimum.j) + " energy=" +
                    format_double(minimum.energy) + " energy_per_ne=" + format_double(minimum.energy / ne) +
                    " spacing=" + format_double(minimum.spacing) +
                    " window=" + format_double(curve.window_at(minimum.energy)));
  r.extra["dim"] = p.dim;
  r.extra["levels"] = levels;
  r.extra["peak"] = {{"energy", peak.energy}, {"energy_per_ne", peak.energy / ne},
                     {"density", peak.density}, {"window", peak.window}};
  r.extra["spacing_minimum"] = {{"j", minimum.j}, {"energy", minimum.energy},
                                {"energy_per_ne", minimum.energy / ne}, {"spacing", minimum.spacing},
                                {"window", curve.window_at(minimum.energy)}};
  if (separatrix) {
    r.notes.push_back("separatrix energy=" + format_double(*separatrix * ne) +
                      " energy_per_ne=" + format_double(*separatrix));
    r.extra["separatrix"] = {{"energy", *separatrix * ne}, {"energy_per_ne", *separatrix}};
  } else {
    r.extra["separatrix"] = nullptr;
  }
  r.table.columns = {"energy", "energy_per_ne", "density"};
  for (std::size_t i = 0; i < curve.energy.size(); ++i) {
    r.table.rows.push_back({curve.energy[i], curve.energy[i] / ne, curve.density[i]});
  }
  return finish(c, r, false);
}

CommandResult cmd_contours(const RunConfig& c) {
  const double xi1 = scalar_of(c.xi1);
  const double xi2 = scalar_of(c.xi2);
  ContourGrid grid = default_contour_grid(xi1, xi2);
  if (c.extent > 0.0) grid = {-c.extent, c.extent, -c.extent, c.extent, grid.resolution};
  grid.resolution = c.resolution;
  const std::vector<ContourSet> sets = contours(xi1, xi2, c.energies, grid);

  Rendered r;
  r.notes.push_back("grid q=" + format_double(grid.q_min) + ":" + format_double(grid.q_max) +
                    " p=" + format_double(grid.p_min) + ":" + format_double(grid.p_max) +
                    " resolution=" + std::to_string(grid.resolution));
  r.extra["grid"] = {{"q_min", grid.q_min}, {"q_max", grid.q_max}, {"p_min", grid.p_min},
                     {"p_max", grid.p_max}, {"resolution", grid.resolution}};
  r.table.columns = {"energy", "curve", "closed", "enclosed", "point", "q", "p"};
  json nested = json::array();
  for (const ContourSet& set : sets) {
    json curves = json::array();
    for (std::size_t k = 0; k < set.curves.size(); ++k) {
      const Polyline& line = set.curves[k];
      json minima = json::array();
      for (const PhasePoint& m : line.enclosed_minima) {
        minima.push_back({{"q", m.q}, {"p", m.p}, {"energy", m.energy}});
      }
      json pts = json::array();
      for (std::size_t i = 0; i < line.points.size(); ++i) {
        const auto& [q, pp] = line.points[i];
        pts.push_back({q, pp});
        r.table.rows.push_back({set.energy, as_int(k), line.closed, as_int(line.enclosed_minima.size()),
                                as_int(i), q, pp});
      }
      curves.push_back({{"closed", line.closed}, {"enclosed_minima", minima}, {"points", pts}});
    }
    nested.push_back({{"energy", set.energy}, {"curves", curves}});
  }
  r.extra["contours"] = std::move(nested);
  r.rows_in_json = false;
  return finish(c, r, false);
}

CommandResult cmd_extrema(const RunConfig& c) {
  const double xi1 = scalar_of(c.xi1);
  const double xi2 = scalar_of(c.xi2);
  const double ne = scalar_of(c.ne);
  const auto extrema = find_extrema(xi1, xi2);

  Rendered r;
  r.table.columns = {"kind",         "q",           "p",           "energy",
                     "energy_quantum", "hessian_min", "hessian_max", "degenerate"};
  for (const ClassicalExtremum& e : extrema) {
    r.table.rows.push_back({std::string(to_string(e.kind)), e.point.q, e.point.p, e.point.energy,
                            e.point.energy * ne, e.hessian_eigenvalues[0], e.hessian_eigenvalues[1],
                            e.degenerate});
  }
  const std::optional<double> separatrix = separatrix_or_none(xi1, xi2);
  if (separatrix) {
    r.notes.push_back("separatrix energy=" + format_double(*separatrix) +
                      " energy_quantum=" + format_double(*separatrix * ne));
    r.extra["separatrix"] = {{"energy", *separatrix}, {"energy_quantum", *separatrix * ne}};
  } else {
    r.extra["separatrix"] = nullptr;
  }
  return finish(c, r, false);
}

std::string fit_path(const RunConfig& c) {
  if (!c.fit_out.empty()) return c.fit_out;
  if (c.out.empty()) return {};
  std::filesystem::path p(c.out);
  p.replace_extension(".fit.json");
  return p.string();
}

CommandResult cmd_scaling(const RunConfig& c, TaskRunner& runner) {
  const double xi1 = scalar_of(c.xi1);
  const double xi2 = scalar_of(c.xi2);
  const std::vector<ScalingPoint> points =
      gap_scaling_sweep(xi1, xi2, c.gap_index, grid_of(c.ne), c.plan, &runner);

  Rendered r;
  r.table.columns = {"n_e", "gap_index", "gap", "gap_mp", "log_gap", "bits", "dim", "stages", "converged"};
  bool all_converged = true;
  for (const ScalingPoint& p : points) {
    all_converged = all_converged && p.converged;
    const double log_gap = p.gap.sign() > 0 ? mp::log(p.gap).to_double() : std::nan("");
    r.table.rows.push_back({p.n_e, as_int(p.gap_index), p.gap.to_double(), format_mp(p.gap), log_gap,
                            static_cast<std::int64_t>(p.bits), as_int(p.dim), as_int(p.stages), p.converged});
  }

  json fit_doc = document(to_json(c));
  bool have_fit = true;
  try {
    const GapScalingFit fit = fit_scaling(points);
    const std::size_t used = static_cast<std::size_t>(
        std::count_if(points.begin(), points.end(), [](const ScalingPoint& p) { return p.converged; }));
    fit_doc["delta"] = fit.delta;
    fit_doc["delta_stderr"] = fit.delta_stderr;
    fit_doc["delta_app"] = delta_app(xi2);
    fit_doc["prefactor_log"] = fit.prefactor_log;
    fit_doc["r_squared"] = fit.r_squared;
    fit_doc["gap_index"] = points.front().gap_index;
    fit_doc["fitted_points"] = used;
  } catch (const ConvergenceError& e) {
    have_fit = false;
    r.notes.push_back(std::string("no fit: ") + e.what());
  }
  fit_doc["points"] = records(r.table);

  CommandResult result;
  result.exit_code = all_converged && have_fit ? kExitOk : kExitNonConverged;
  const std::string path = fit_path(c);
  json summary = fit_doc;
  summary.erase("generator");
  summary.erase("config");
  summary.erase("points");
  if (c.format == Format::json) {
    r.extra["fit"] = have_fit ? summary : json(nullptr);
  } else if (path.empty() && have_fit) {
    r.notes.push_back("fit " + summary.dump());
  }
  result.files.push_back({c.out, render(c, r)});
  if (!path.empty() && have_fit) result.files.push_back({path, render_json(fit_doc)});
  return result;
}

CommandResult cmd_overlap(const RunConfig& c) {
  const double xi2 = scalar_of(c.xi2);
  Rendered r;
  r.table.columns = {"xi2", "n_e", "dim", "numeric", "analytic", "abs_error", "norm_warning"};
  std::vector<std::string> warnings;
  for (double ne : grid_of(c.ne)) {
    const std::size_t dim =
        c.dim != 0 ? c.dim
                   : std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(32 * std::abs(xi2) * ne - 1e-9)));
    const OverlapResult o = coherent_overlap(xi2, ne, dim);
    if (o.norm_warning) warnings.push_back("truncated coherent state norm deviates from 1 at ne=" + format_double(ne));
    r.table.rows.push_back({xi2, ne, as_int(dim), o.numeric, o.analytic, std::abs(o.numeric - o.analytic),
                            o.norm_warning});
  }
  CommandResult result = finish(c, r, false);
  result.warnings = std::move(warnings);
  return result;
}

}  // namespace

CommandResult execute(const RunConfig& config, TaskRunner& runner) {
  validate(config);
  switch (config.command) {
    case Command::spectrum: return cmd_spectrum(config, runner);
    case Command::expect: return cmd_expect(config, runner);
    case Command::gaps: return cmd_gaps(config, runner);
    case Command::density: return cmd_density(config);
    case Command::contours: return cmd_contours(config);
    case Command::extrema: return cmd_extrema(config);
    case Command::scaling: return cmd_scaling(config, runner);
    case Command::overlap: return cmd_overlap(config);
  }
  throw ConfigError("unknown command");
}

}  // namespace kpo::cli
