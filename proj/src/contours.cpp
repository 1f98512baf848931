#include <algorithm>
#include <cstdint>
#include <unordered_map>

#include "kpo/classical.hpp"

namespace kpo {

namespace {

// Edge identifiers: horizontal edge (i, j)-(i+1, j) is 2 * (j * n + i),
// vertical edge (i, j)-(i, j+1) is 2 * (j * n + i) + 1, with i along q.
struct Segment {
  std::uint64_t a;
  std::uint64_t b;
};

bool inside(const std::vector<std::array<double, 2>>& ring, double q, double p) {
  bool in = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const auto& u = ring[i];
    const auto& v = ring[j];
    if ((u[1] > p) != (v[1] > p)) {
      const double x = u[0] + (p - u[1]) * (v[0] - u[0]) / (v[1] - u[1]);
      if (q < x) in = !in;
    }
  }
  return in;
}

class LevelTracer {
 public:
  LevelTracer(const ContourGrid& grid, std::vector<double> values, double xi1, double xi2, double energy)
      : grid_(grid), n_(grid.resolution), f_(std::move(values)), xi1_(xi1), xi2_(xi2), energy_(energy) {
    dq_ = (grid.q_max - grid.q_min) / static_cast<double>(n_ - 1);
    dp_ = (grid.p_max - grid.p_min) / static_cast<double>(n_ - 1);
  }

  std::vector<Polyline> trace() {
    collect_segments();
    return link();
  }

 private:
  double value(std::size_t i, std::size_t j) const { return f_[j * n_ + i]; }
  double q_at(std::size_t i) const { return grid_.q_min + dq_ * static_cast<double>(i); }
  double p_at(std::size_t j) const { return grid_.p_min + dp_ * static_cast<double>(j); }

  std::uint64_t horizontal(std::size_t i, std::size_t j) const { return 2 * (j * n_ + i); }
  std::uint64_t vertical(std::size_t i, std::size_t j) const { return 2 * (j * n_ + i) + 1; }

  std::array<double, 2> crossing(std::uint64_t edge) const {
    const std::size_t node = edge / 2;
    const std::size_t i = node % n_;
    const std::size_t j = node / n_;
    const double f0 = value(i, j);
    if (edge % 2 == 0) {
      const double t = f0 / (f0 - value(i + 1, j));
      return {q_at(i) + t * dq_, p_at(j)};
    }
    const double t = f0 / (f0 - value(i, j + 1));
    return {q_at(i), p_at(j) + t * dp_};
  }

  void collect_segments() {
    for (std::size_t j = 0; j + 1 < n_; ++j) {
      for (std::size_t i = 0; i + 1 < n_; ++i) {
        // Corners counter-clockwise from (i, j); bit set when f >= 0.
        const int code = (value(i, j) >= 0 ? 1 : 0) | (value(i + 1, j) >= 0 ? 2 : 0) |
                         (value(i + 1, j + 1) >= 0 ? 4 : 0) | (value(i, j + 1) >= 0 ? 8 : 0);
        if (code == 0 || code == 15) continue;
        const std::uint64_t bottom = horizontal(i, j);
        const std::uint64_t right = vertical(i + 1, j);
        const std::uint64_t top = horizontal(i, j + 1);
        const std::uint64_t left = vertical(i, j);
        switch (code) {
          case 1: case 14: add(left, bottom); break;
          case 2: case 13: add(bottom, right); break;
          case 3: case 12: add(left, right); break;
          case 4: case 11: add(right, top); break;
          case 6: case 9: add(bottom, top); break;
          case 7: case 8: add(left, top); break;
          case 5: case 10: {
            const double centre =
                h_class(q_at(i) + 0.5 * dq_, p_at(j) + 0.5 * dp_, xi1_, xi2_) - energy_;
            // Corners 0 and 2 share a sign; decide whether the centre joins them.
            const bool centre_with_02 = (centre >= 0) == (code == 5);
            if (centre_with_02) {
              add(left, top);
              add(bottom, right);
            } else {
              add(left, bottom);
              add(right, top);
            }
            break;
          }
          default: break;
        }
      }
    }
  }

  void add(std::uint64_t a, std::uint64_t b) {
    const std::size_t id = segments_.size();
    segments_.push_back({a, b});
    incident_[a].push_back(id);
    incident_[b].push_back(id);
  }

  std::vector<Polyline> link() {
    std::vector<bool> used(segments_.size(), false);
    std::vector<Polyline> lines;

    auto walk = [&](std::size_t first, std::uint64_t start) {
      Polyline line;
      line.points.push_back(crossing(start));
      std::uint64_t at = start;
      std::size_t seg = first;
      while (true) {
        used[seg] = true;
        const Segment& s = segments_[seg];
        at = s.a == at ? s.b : s.a;
        if (at == start) {
          line.closed = true;
          line.points.push_back(line.points.front());
          break;
        }
        line.points.push_back(crossing(at));
        const auto& next = incident_[at];
        auto it = std::find_if(next.begin(), next.end(), [&](std::size_t k) { return !used[k]; });
        if (it == next.end()) break;
        seg = *it;
      }
      return line;
    };

    // Open curves start on the boundary, where an edge meets a single segment.
    // Segment order is deterministic, so the output is too.
    for (std::size_t k = 0; k < segments_.size(); ++k) {
      if (used[k]) continue;
      for (std::uint64_t end : {segments_[k].a, segments_[k].b}) {
        if (!used[k] && incident_[end].size() == 1) lines.push_back(walk(k, end));
      }
    }
    for (std::size_t k = 0; k < segments_.size(); ++k) {
      if (!used[k]) lines.push_back(walk(k, segments_[k].a));
    }
    return lines;
  }

  const ContourGrid& grid_;
  std::size_t n_;
  std::vector<double> f_;
  double xi1_;
  double xi2_;
  double energy_;
  double dq_ = 0.0;
  double dp_ = 0.0;
  std::vector<Segment> segments_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> incident_;
};

}  // namespace

std::vector<ContourSet> contours(double xi1, double xi2, const std::vector<double>& energies,
                                 const ContourGrid& grid) {
  grid.validate();
  const std::size_t n = grid.resolution;
  const double dq = (grid.q_max - grid.q_min) / static_cast<double>(n - 1);
  const double dp = (grid.p_max - grid.p_min) / static_cast<double>(n - 1);
  std::vector<double> surface(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      surface[j * n + i] = h_class(grid.q_min + dq * static_cast<double>(i),
                                   grid.p_min + dp * static_cast<double>(j), xi1, xi2);
    }
  }

  std::vector<PhasePoint> minima;
  for (const ClassicalExtremum& e : find_extrema(xi1, xi2)) {
    if (e.kind == ExtremumKind::minimum) minima.push_back(e.point);
  }

  std::vector<ContourSet> sets;
  sets.reserve(energies.size());
  for (double energy : energies) {
    std::vector<double> shifted(surface.size());
    std::transform(surface.begin(), surface.end(), shifted.begin(),
                   [energy](double h) { return h - energy; });
    ContourSet set;
    set.energy = energy;
    set.curves = LevelTracer(grid, std::move(shifted), xi1, xi2, energy).trace();
    for (Polyline& line : set.curves) {
      if (!line.closed) continue;
      for (const PhasePoint& m : minima) {
        if (inside(line.points, m.q, m.p)) line.enclosed_minima.push_back(m);
      }
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

}  // namespace kpo
