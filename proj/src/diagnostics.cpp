#include "pmetube/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "pmetube/numerics.hpp"

namespace pmetube {

ErrorSample relative_error_window(const TubeField& field, const SectionProfile& profile,
                                  double c) {
  if (field.variable != Variable::rescaled_v) {
    throw invalid_parameter("relative_error_window expects the rescaled variable");
  }
  if (field.nz() != profile.grid.n) {
    throw invalid_parameter("relative_error_window: grids differ");
  }
  if (!(c > 0)) throw invalid_parameter("relative_error_window: c must be positive");

  ErrorSample s;
  s.tau = field.time;
  s.c = c;
  const double half = c * field.time;
  if (half < field.grid.hy()) {
    s.empty = true;
    return s;
  }
  double worst = 0;
  long long count = 0;
  for (int i = 1; i + 1 < field.nz(); ++i) {
    const double phi = profile.phi[i];
    for (int j = 0; j < field.ny(); ++j) {
      if (std::abs(field.grid.y(j)) > half) continue;
      worst = std::max(worst, std::abs(field.at(i, j) / phi - 1));
      ++count;
    }
  }
  s.error = worst;
  s.count = count;
  s.empty = count == 0;
  return s;
}

OuterMax outer_support_max(const TubeField& field, double c, double support_threshold,
                           int guard_nodes) {
  if (!(c > 0)) throw invalid_parameter("outer_support_max: c must be positive");
  OuterMax out;
  const double half = c * field.time;
  const int ny = field.ny();
  for (int i = 1; i + 1 < field.nz(); ++i) {
    const double* vi = field.values.data() + static_cast<std::size_t>(i) * ny;
    for (int j = 0; j < ny; ++j) {
      if (std::abs(field.grid.y(j)) >= half) out.value = std::max(out.value, vi[j]);
    }
    for (int j = 0; j < guard_nodes; ++j) {
      if (vi[j] > support_threshold || vi[ny - 1 - j] > support_threshold) {
        out.conclusive = false;
      }
    }
  }
  return out;
}

FrontSeries front_series_of(const RunRecord& run, double threshold) {
  if (run.snapshots.empty()) {
    throw invalid_parameter("front_series_of: run holds no in-memory snapshots");
  }
  FrontSeries series;
  for (const auto& f : run.snapshots) {
    FrontSample s;
    s.tau = f.time;
    s.gamma = front_curve(f, threshold);
    s.any_empty_interior = false;
    double mx = empty_front(), mn = empty_front();
    for (int i = 1; i + 1 < f.nz(); ++i) {
      if (is_empty_front(s.gamma[i])) {
        s.any_empty_interior = true;
        continue;
      }
      if (is_empty_front(mx) || s.gamma[i] > mx) mx = s.gamma[i];
      if (is_empty_front(mn) || s.gamma[i] < mn) mn = s.gamma[i];
    }
    s.max_front = mx;
    s.min_front = mn;
    series.samples.push_back(std::move(s));
  }
  return series;
}

OrderingReport ordering_audit(const RunRecord& run, const BarrierPath& sub,
                              const BarrierPath& super, const WaveProfile& wave,
                              const AlignmentGrid& alignment) {
  if (run.snapshots.empty()) {
    throw invalid_parameter("ordering_audit: run holds no in-memory snapshots");
  }
  if (!wave.normalized) throw invalid_parameter("ordering_audit: wave must be normalized");
  if (sub.params.kind != BarrierKind::sub || super.params.kind != BarrierKind::super) {
    throw invalid_parameter("ordering_audit: barrier kinds are swapped");
  }
  if (run.snapshots.front().nz() != wave.section.n) {
    throw invalid_parameter("ordering_audit: wave and run section grids differ");
  }

  OrderingReport rep;
  rep.tolerance = 1e-8 * run.profile.sup_phi;

  const auto& snaps = run.snapshots;
  const int nz = snaps.front().nz(), ny = snaps.front().ny();
  const TubeGrid& grid = snaps.front().grid;

  // One barrier side at a time: violations are independent of the other side.
  auto audit_side = [&](const BarrierPath& path, bool is_sub, double offset, double& worst,
                        double& wtau, double& wy, int& wrow) -> bool {
    worst = 0;
    wtau = 0;
    wy = 0;
    wrow = -1;
    bool any = false;
    for (const auto& f : snaps) {
      const double ptau = f.time - offset;
      if (ptau < -1e-9 || ptau > path.tau_end() + 1e-9) continue;
      any = true;
      const double amp = path.f_at(std::max(ptau, 0.0));
      const double shift = path.g_at(std::max(ptau, 0.0));
      for (int i = 1; i + 1 < nz; ++i) {
        for (int j = 0; j < ny; ++j) {
          const double y = grid.y(j);
          if (y < 0) continue;
          const double xi = y - shift;
          double w = 0;
          if (xi < wave.xi0) w = amp * wave.value_at_xi(i, xi);
          const double v = f.at(i, j);
          const double viol = is_sub ? w - v : v - w;
          if (viol > worst) {
            worst = viol;
            wtau = f.time;
            wy = y;
            wrow = i;
          }
        }
      }
    }
    return any;
  };

  bool overlap = false;
  double best_sub = std::numeric_limits<double>::infinity();
  for (double off : alignment.sub_offsets) {
    double worst, wtau, wy;
    int wrow;
    if (!audit_side(sub, true, off, worst, wtau, wy, wrow)) continue;
    overlap = true;
    if (worst < best_sub) {
      best_sub = worst;
      rep.sub_violation = worst;
      rep.sub_offset = off;
      rep.worst_sub_tau = wtau;
      rep.worst_sub_y = wy;
      rep.worst_sub_row = wrow;
    }
  }
  if (!overlap) {
    throw range_failure("ordering_audit: no snapshot overlaps the sub barrier path");
  }
  overlap = false;
  double best_sup = std::numeric_limits<double>::infinity();
  for (double off : alignment.sup_offsets) {
    double worst, wtau, wy;
    int wrow;
    if (!audit_side(super, false, off, worst, wtau, wy, wrow)) continue;
    overlap = true;
    if (worst < best_sup) {
      best_sup = worst;
      rep.super_violation = worst;
      rep.sup_offset = off;
      rep.worst_sup_tau = wtau;
      rep.worst_sup_y = wy;
      rep.worst_sup_row = wrow;
    }
  }
  if (!overlap) {
    throw range_failure("ordering_audit: no snapshot overlaps the super barrier path");
  }
  rep.passed = rep.sub_violation <= rep.tolerance && rep.super_violation <= rep.tolerance;
  return rep;
}

FitResult exp_rate_fit(const RunRecord& run, const SectionProfile& profile, int z_station,
                       double tau_a, double tau_b) {
  if (run.snapshots.empty()) {
    throw invalid_parameter("exp_rate_fit: run holds no in-memory snapshots");
  }
  if (z_station <= 0 || z_station >= profile.grid.n - 1) {
    throw invalid_parameter("exp_rate_fit: station must be an interior row");
  }
  if (run.snapshots.front().nz() != profile.grid.n) {
    throw invalid_parameter("exp_rate_fit: run and profile section grids differ");
  }
  const TubeGrid& grid = run.snapshots.front().grid;
  int jc = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid.ny; ++j) {
    if (std::abs(grid.y(j)) < best) {
      best = std::abs(grid.y(j));
      jc = j;
    }
  }
  std::vector<double> ts, ys;
  for (const auto& f : run.snapshots) {
    if (f.time < tau_a - 1e-12 || f.time > tau_b + 1e-12) continue;
    const double gap = 1 - f.at(z_station, jc) / profile.phi[z_station];
    if (gap < 1e-14) {
      throw window_too_late("exp_rate_fit: gap underflow at tau=" + std::to_string(f.time));
    }
    ts.push_back(f.time);
    ys.push_back(std::log(gap));
  }
  if (ts.size() < 3) throw estimation_failure("exp_rate_fit: too few snapshots in the window");
  LineFit fit = fit_line(ts, ys);
  return FitResult{fit.slope, fit.intercept, fit.residual_sup, fit.r2, fit.samples};
}

FlatChecksReport flat_problem_checks(double A, double k, double eps, double B, double m,
                                     int n, double dtau, double tau_end) {
  if (!(A > 0) || !(k > 0)) throw invalid_parameter("flat checks: A and k must be positive");
  if (!(eps >= 0 && eps < 0.5)) throw invalid_parameter("flat checks: eps must lie in [0, 1/2)");
  if (!(B >= 0 && B < A)) throw invalid_parameter("flat checks: need 0 <= B < A");
  if (!(m > 1)) throw degenerate_exponent("flat checks: m must exceed 1");
  if (n < 5) throw invalid_parameter("flat checks: need at least 5 nodes");
  if (!(tau_end > 0)) throw invalid_parameter("flat checks: tau_end must be positive");

  const double h = 2 * A / (n - 1);
  const double stable = h * h / (2 * k * m) * (m - 1) / ((m - 1) + h * h / (2 * k * m));
  // Conservative explicit bound: k m f^{m-1} <= k m on f in (0,1].
  const double bound = 1.0 / (2 * k * m / (h * h) + 1.0 / (m - 1));
  (void)stable;
  if (dtau <= 0) {
    dtau = 0.4 * bound;
  } else if (dtau > bound * (1 + 1e-12)) {
    throw stability_violation("flat checks: dtau exceeds the stable bound " +
                              std::to_string(bound));
  }

  std::vector<double> f(n, 1 - eps), fm(n), next(n, 1 - eps);
  FlatChecksReport rep;
  rep.min_increment = 0;

  const double snap_dt = std::max(dtau, tau_end / 4000);
  std::vector<double> snap_tau, snap_min;
  auto window_min = [&](const std::vector<double>& vals) {
    double mn = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (std::abs(-A + i * h) <= B + 1e-12) mn = std::min(mn, vals[i]);
    }
    return mn;
  };

  double tau = 0;
  double next_snap = 0;
  long long steps = std::llround(std::ceil(tau_end / dtau));
  const double hstep = tau_end / static_cast<double>(steps);
  for (long long s = 0; s <= steps; ++s) {
    pow_field(f.data(), fm.data(), n, m);
    for (int i = 1; i + 1 < n; ++i) {
      const double d2 = (fm[i - 1] - 2 * fm[i] + fm[i + 1]) / (h * h);
      rep.max_second_diff = std::max(rep.max_second_diff, d2);
    }
    if (tau >= next_snap - 1e-12 || s == steps) {
      snap_tau.push_back(tau);
      snap_min.push_back(window_min(f));
      next_snap += snap_dt;
    }
    if (s == steps) break;
    for (int i = 1; i + 1 < n; ++i) {
      const double d2 = (fm[i - 1] - 2 * fm[i] + fm[i + 1]) / (h * h);
      next[i] = f[i] + hstep * (k * d2 + f[i] * (1 - pow_m(f[i], m - 1)) / (m - 1));
      rep.min_increment = std::min(rep.min_increment, next[i] - f[i]);
    }
    std::swap(f, next);
    tau += hstep;
  }

  rep.concavity_ok = rep.max_second_diff <= 1e-10;
  rep.monotone_ok = rep.min_increment >= -1e-13;
  rep.steady_gap = 1 - snap_min.back();

  // Exponential approach of the window minimum to its steady level.
  const double s_end = 1 - snap_min.back();
  const double d0 = (1 - snap_min.front()) - s_end;
  if (d0 < 1e-13) {
    rep.rate_ok = true;  // already at equilibrium (eps ~ 0)
    rep.fit = FitResult{0, 0, 0, 1, 0};
    return rep;
  }
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < snap_tau.size(); ++i) {
    const double d = (1 - snap_min[i]) - s_end;
    if (d > 0.35 * d0) continue;                      // early transient
    if (d < std::max(1e-12, 1e-4 * d0)) break;        // saturated
    ts.push_back(snap_tau[i]);
    ys.push_back(std::log(d));
  }
  if (ts.size() < 10) {
    rep.rate_ok = false;
    return rep;
  }
  LineFit fit = fit_line(ts, ys);
  rep.fit = FitResult{fit.slope, fit.intercept, fit.residual_sup, fit.r2, fit.samples};
  rep.envelope_delta = std::exp(fit.intercept + fit.residual_sup);
  rep.rate_ok = fit.slope < 0 && fit.r2 >= 0.99;
  return rep;
}

FrontLawReport front_law_audit(const FrontSeries& fronts, double cstar,
                               const WaveProfile& wave, double T) {
  if (!wave.normalized) throw invalid_parameter("front_law_audit: wave must be normalized");
  if (fronts.samples.empty()) throw invalid_parameter("front_law_audit: empty series");
  const int nz = wave.section.n;

  FrontLawReport rep;
  rep.conclusive = true;

  // Rows adjacent to the section boundary are threshold-sensitive; skip them.
  const int row_lo = 2, row_hi = nz - 3;
  if (row_hi < row_lo) throw invalid_parameter("front_law_audit: section grid too coarse");

  std::vector<double> zs, gphi;
  for (int i = row_lo; i <= row_hi; ++i) {
    if (is_empty_front(wave.front[i])) {
      throw degenerate_profile("front_law_audit: wave front empty at row " + std::to_string(i));
    }
    zs.push_back(wave.section.node(i));
    gphi.push_back(wave.front[i]);
  }
  rep.concave_envelope_gap = concave_envelope_gap(zs, gphi);

  const double tau_endv = fronts.samples.back().tau;
  std::vector<double> taus, sups;
  for (const auto& s : fronts.samples) {
    if (s.tau < T) continue;
    if (static_cast<int>(s.gamma.size()) != nz) {
      throw invalid_parameter("front_law_audit: row count mismatch");
    }
    double sup = 0;
    for (int i = row_lo; i <= row_hi; ++i) {
      if (is_empty_front(s.gamma[i])) {
        rep.conclusive = false;
        continue;
      }
      sup = std::max(sup, std::abs(s.gamma[i] - wave.front[i] - cstar * s.tau));
    }
    taus.push_back(s.tau);
    sups.push_back(sup);
  }
  if (taus.size() < 8) {
    rep.conclusive = false;
    return rep;
  }
  rep.c_emp = *std::max_element(sups.begin(), sups.end());

  const double R = tau_endv - T;
  double mid = 0, late = 0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double frac = (taus[i] - T) / R;
    if (frac >= 0.25 && frac <= 0.75) mid = std::max(mid, sups[i]);
    if (frac > 0.75) late = std::max(late, sups[i]);
  }
  rep.mid_max = mid;
  rep.late_max = late;
  rep.non_drifting = late <= 1.1 * mid;

  const auto& last = fronts.samples.back();
  double fmax = -std::numeric_limits<double>::infinity();
  for (int i = row_lo; i <= row_hi; ++i) {
    if (!is_empty_front(last.gamma[i])) fmax = std::max(fmax, last.gamma[i]);
  }
  rep.final_ratio = fmax / last.tau;
  rep.ratio_gap = std::abs(rep.final_ratio - cstar) / cstar;
  rep.passed = rep.conclusive && rep.non_drifting && std::isfinite(rep.c_emp);
  return rep;
}

InnerUniformResult inner_uniform_check(const RunRecord& run, const SectionProfile& profile,
                                       double eps, double c) {
  if (run.snapshots.empty()) {
    throw invalid_parameter("inner_uniform_check: run holds no in-memory snapshots");
  }
  if (!(eps > 0)) throw invalid_parameter("inner_uniform_check: eps must be positive");
  if (!(c > 0)) throw invalid_parameter("inner_uniform_check: c must be positive");

  InnerUniformResult res;
  if (eps >= 1) {
    res.achieved = true;
    res.tau = run.snapshots.front().time;
    return res;
  }
  double last_gap = 1;
  for (const auto& f : run.snapshots) {
    const double half = c * f.time;
    double min_ratio = std::numeric_limits<double>::infinity();
    double excess = -std::numeric_limits<double>::infinity();
    long long count = 0;
    for (int i = 1; i + 1 < f.nz(); ++i) {
      for (int j = 0; j < f.ny(); ++j) {
        if (std::abs(f.grid.y(j)) > half) continue;
        const double ratio = f.at(i, j) / profile.phi[i];
        min_ratio = std::min(min_ratio, ratio);
        excess = std::max(excess, f.at(i, j) - profile.phi[i]);
        ++count;
      }
    }
    if (count == 0) continue;
    last_gap = 1 - min_ratio;
    if (min_ratio >= 1 - eps) {
      res.achieved = true;
      res.tau = f.time;
      res.ceiling_excess = excess;
      return res;
    }
  }
  res.final_gap = last_gap;
  return res;
}

double concave_envelope_gap(const std::vector<double>& z, const std::vector<double>& vals) {
  if (z.size() != vals.size() || z.size() < 2) return 0;
  // Upper hull by the monotone chain over (z, value).
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < z.size(); ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2], b = hull[hull.size() - 1];
      const double cross = (z[b] - z[a]) * (vals[i] - vals[a]) -
                           (z[i] - z[a]) * (vals[b] - vals[a]);
      if (cross >= 0) hull.pop_back();  // b below the chord a-i: not on the upper hull
      else break;
    }
    hull.push_back(i);
  }
  double gap = 0;
  std::size_t seg = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    while (seg + 1 < hull.size() && z[hull[seg + 1]] < z[i]) ++seg;
    const std::size_t a = hull[seg], b = hull[std::min(seg + 1, hull.size() - 1)];
    double env = vals[a];
    if (b != a && z[b] != z[a]) {
      const double t = (z[i] - z[a]) / (z[b] - z[a]);
      env = vals[a] + t * (vals[b] - vals[a]);
    }
    gap = std::max(gap, env - vals[i]);
  }
  return gap;
}

}  // namespace pmetube
