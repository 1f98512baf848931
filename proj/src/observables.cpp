#include "kpo/observables.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <exception>
#include <numbers>

#include "kpo/error.hpp"

namespace kpo {

namespace {

void require_vectors(const Spectrum& spectrum, const QuadratureMatrices& quads) {
  if (!spectrum.has_vectors()) throw InvalidParameter("expectations need eigenvectors");
  if (spectrum.dim != quads.dim) {
    throw InvalidParameter("spectrum and quadratures have different dimensions");
  }
}

std::vector<double> sample_grid(double lo, double hi, std::size_t samples) {
  std::vector<double> grid(samples);
  const double step = samples > 1 ? (hi - lo) / static_cast<double>(samples - 1) : 0.0;
  for (std::size_t i = 0; i < samples; ++i) grid[i] = lo + step * static_cast<double>(i);
  return grid;
}

DensityCurve kernel_density(const Spectrum& spectrum, std::vector<double> widths,
                            std::size_t samples) {
  if (spectrum.size() == 0) throw InvalidParameter("level density of an empty spectrum");
  if (samples < 2) throw InvalidParameter("level density needs at least 2 samples");
  DensityCurve curve;
  curve.level_energy = spectrum.energies;
  curve.level_window = std::move(widths);
  const double lo = spectrum.energies.front() - 3 * curve.level_window.front();
  const double hi = spectrum.energies.back() + 3 * curve.level_window.back();
  curve.energy = sample_grid(lo, hi, samples);
  curve.density.assign(samples, 0.0);
  const double norm = 1.0 / std::sqrt(2 * std::numbers::pi);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const double w = curve.level_window[k];
    const double ek = spectrum.energies[k];
    for (std::size_t i = 0; i < samples; ++i) {
      const double x = (curve.energy[i] - ek) / w;
      if (std::abs(x) > 12) continue;
      curve.density[i] += norm * std::exp(-0.5 * x * x) / w;
    }
  }
  return curve;
}

}  // namespace

std::vector<ExpectationRecord> expectations(const Spectrum& spectrum,
                                            const QuadratureMatrices& quads,
                                            const std::vector<std::size_t>& indices) {
  require_vectors(spectrum, quads);
  std::vector<ExpectationRecord> records;
  records.reserve(indices.size());
  const std::size_t n = quads.dim;
  for (std::size_t j : indices) {
    if (j >= spectrum.size()) throw InvalidParameter("state index out of range");
    ExpectationRecord r;
    r.state_index = j;
    r.energy = spectrum.energies[j];
    if (spectrum.real_valued()) {
      const auto v = spectrum.real_vectors.col(static_cast<Eigen::Index>(j));
      double q = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        q += quads.ladder[i] * v(static_cast<Eigen::Index>(i)) * v(static_cast<Eigen::Index>(i + 1));
      }
      r.q_mean = 2 * q;
      r.p_mean = 0.0;
    } else {
      const auto v = spectrum.complex_vectors.col(static_cast<Eigen::Index>(j));
      double q = 0.0;
      double p = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::complex<double> z =
            std::conj(v(static_cast<Eigen::Index>(i + 1))) * v(static_cast<Eigen::Index>(i));
        q += quads.ladder[i] * z.real();
        p -= quads.ladder[i] * z.imag();
      }
      r.q_mean = 2 * q;
      r.p_mean = 2 * p;
    }
    records.push_back(r);
  }
  return records;
}

std::pair<ExpectationRecord, ExpectationRecord> localize_doublet(const ModelParams& params) {
  ModelParams p = params;
  if (p.symmetry_breaking == 0.0) {
    p.symmetry_breaking = default_symmetry_breaking(p.two_photon, p.classicality);
  }
  const Spectrum s = diagonalize(build_perturbed(p), true);
  const auto records = expectations(s, build_quadratures(p), {0, 1});
  return {records[0], records[1]};
}

std::vector<GapRecord> adjacent_gaps(const Spectrum& spectrum) {
  std::vector<GapRecord> gaps;
  if (spectrum.size() < 2) return gaps;
  gaps.reserve(spectrum.size() - 1);
  const bool precise = !spectrum.precise_energies.empty();
  for (std::size_t j = 0; j + 1 < spectrum.size(); ++j) {
    GapRecord g;
    g.j = j;
    g.energy = spectrum.energies[j];
    if (precise) {
      g.precise_gap = spectrum.gap(j);
      g.gap = g.precise_gap->to_double();
    } else {
      g.gap = spectrum.energies[j + 1] - spectrum.energies[j];
    }
    gaps.push_back(std::move(g));
  }
  return gaps;
}

std::vector<std::size_t> doublet_starts(const Spectrum& spectrum) {
  std::vector<std::size_t> starts;
  if (spectrum.size() < 3) return starts;
  for (std::size_t j = 0; j + 2 < spectrum.size(); ++j) {
    const mp::Float inner = spectrum.gap(j);
    mp::Float outer = spectrum.gap(j + 1);
    outer *= kDoubletRatio;
    if (inner < outer) {
      starts.push_back(j);
      ++j;
    }
  }
  return starts;
}

double DensityCurve::window_at(double e) const {
  if (level_energy.empty()) return 0.0;
  const auto it = std::lower_bound(level_energy.begin(), level_energy.end(), e);
  std::size_t k = static_cast<std::size_t>(it - level_energy.begin());
  if (k == level_energy.size()) return level_window.back();
  if (k > 0 && e - level_energy[k - 1] < level_energy[k] - e) --k;
  return level_window[k];
}

DensityCurve level_density(const Spectrum& spectrum, double window, std::size_t samples) {
  if (!(window > 0.0) || !std::isfinite(window)) {
    throw InvalidParameter("level density window must be positive");
  }
  return kernel_density(spectrum, std::vector<double>(spectrum.size(), window), samples);
}

DensityCurve level_density(const Spectrum& spectrum, std::size_t samples) {
  if (spectrum.size() < 2) throw InvalidParameter("adaptive level density needs two levels");
  std::vector<double> widths(spectrum.size());
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    widths[k] = kDensityWindowSpacings * spectrum.local_mean_spacing(k);
    if (!(widths[k] > 0.0)) throw InvalidParameter("degenerate spectrum has no level spacing");
  }
  return kernel_density(spectrum, std::move(widths), samples);
}

DensityPeak density_peak(const DensityCurve& curve, double e_min, double e_max) {
  DensityPeak peak;
  bool found = false;
  for (std::size_t i = 0; i < curve.energy.size(); ++i) {
    if (curve.energy[i] < e_min || curve.energy[i] > e_max) continue;
    if (!found || curve.density[i] > peak.density) {
      peak.energy = curve.energy[i];
      peak.density = curve.density[i];
      found = true;
    }
  }
  if (!found) throw InvalidParameter("density peak search range holds no samples");
  peak.window = curve.window_at(peak.energy);
  return peak;
}

SpacingMinimum second_neighbour_minimum(const Spectrum& spectrum, std::size_t levels) {
  levels = std::min(levels, spectrum.size());
  if (levels < 3) throw InvalidParameter("second-neighbour spacing needs three levels");
  SpacingMinimum best;
  for (std::size_t j = 0; j + 2 < levels; ++j) {
    const double s = spectrum.energies[j + 2] - spectrum.energies[j];
    if (j == 0 || s < best.spacing) {
      best.j = j;
      best.spacing = s;
      best.energy = 0.5 * (spectrum.energies[j] + spectrum.energies[j + 2]);
    }
  }
  return best;
}

ModelParams with_axis_value(ModelParams params, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::one_photon: params.one_photon = value; break;
    case SweepAxis::two_photon: params.two_photon = value; break;
    case SweepAxis::classicality: params.classicality = value; break;
  }
  return params;
}

std::size_t sweep_dimension(const ModelParams& params_template, SweepAxis axis,
                            const std::vector<double>& grid) {
  if (params_template.dim != 0 || grid.empty()) return params_template.dim;
  std::size_t dim = 0;
  for (double v : {grid.front(), grid.back()}) {
    const ModelParams p = with_axis_value(params_template, axis, v);
    dim = std::max(dim, default_dimension(p.one_photon, p.two_photon, p.classicality));
  }
  return dim;
}

SweepTable sweep(const ModelParams& params_template, SweepAxis axis, const std::vector<double>& grid,
                 const SweepOutputs& outputs, TaskRunner* runner) {
  if (grid.empty()) throw InvalidParameter("sweep grid is empty");
  for (double v : grid) {
    if (!std::isfinite(v)) throw InvalidParameter("sweep grid holds a non-finite value");
  }
  if (grid.size() > 1) {
    const bool up = grid[1] > grid[0];
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (up ? !(grid[i] > grid[i - 1]) : !(grid[i] < grid[i - 1])) {
        throw InvalidParameter("sweep grid must be strictly monotone");
      }
    }
  }
  if (outputs.levels == 0) throw InvalidParameter("sweep must report at least one level");

  SweepTable table;
  table.axis = axis;
  table.dim = sweep_dimension(params_template, axis, grid);
  ModelParams checked = with_axis_value(params_template, axis, grid.front());
  checked.dim = table.dim;
  validate(checked);

  table.points.resize(grid.size());
  auto evaluate = [&](std::size_t i) {
    SweepPoint& point = table.points[i];
    point.axis_value = grid[i];
    point.params = with_axis_value(params_template, axis, grid[i]);
    point.params.dim = table.dim;
    try {
      const bool vectors = outputs.expectations;
      Spectrum s;
      if (outputs.localize) {
        if (point.params.symmetry_breaking == 0.0) {
          point.params.symmetry_breaking =
              default_symmetry_breaking(point.params.two_photon, point.params.classicality);
        }
        s = diagonalize(build_perturbed(point.params), vectors);
      } else {
        s = diagonalize(build_hamiltonian(point.params), vectors);
      }
      const std::size_t k = std::min(outputs.levels, s.size());
      point.energies.assign(s.energies.begin(), s.energies.begin() + static_cast<std::ptrdiff_t>(k));
      if (outputs.expectations) {
        std::vector<std::size_t> indices(k);
        for (std::size_t j = 0; j < k; ++j) indices[j] = j;
        point.expectations = expectations(s, build_quadratures(point.params), indices);
      }
      if (outputs.gaps) {
        auto gaps = adjacent_gaps(s);
        if (gaps.size() > k) gaps.resize(k);
        point.gaps = std::move(gaps);
      }
    } catch (const ConvergenceError& e) {
      point.failed = true;
      point.nonconverged = true;
      point.error = e.what();
    } catch (const std::exception& e) {
      point.failed = true;
      point.error = e.what();
    }
  };

  SequentialRunner sequential;
  (runner ? *runner : sequential).run(grid.size(), evaluate);
  return table;
}

}  // namespace kpo
