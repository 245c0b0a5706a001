#include "pmetube/dynamics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "pmetube/io.hpp"
#include "pmetube/numerics.hpp"

namespace pmetube {

namespace {

void validate_exponent(double m) {
  if (!(m > 1)) throw degenerate_exponent("diffusion exponent must satisfy m > 1");
}

double diffusion_sum(const TubeGrid& g) {
  const double hz = g.section.h(), hy = g.hy();
  return 1.0 / (hz * hz) + 1.0 / (hy * hy);
}

// Diffusion sub-step: out = in + dt * Laplacian_h(in^m), with zero Dirichlet
// rows in z (or reflected rows in harness mode) and zero/held y-end columns.
// Scratch w receives in^m.
void diffusion_step(const TubeField& f, double dt, const StepOptions& opts,
                    std::vector<double>& w, std::vector<double>& out) {
  const int nz = f.nz(), ny = f.ny();
  const double ihz2 = 1.0 / (f.grid.section.h() * f.grid.section.h());
  const double ihy2 = 1.0 / (f.grid.hy() * f.grid.hy());
  pow_field(f.values.data(), w.data(), f.values.size(), f.m);

  auto row = [&](int i) { return f.values.data() + static_cast<std::size_t>(i) * ny; };
  auto wrow = [&](int i) { return w.data() + static_cast<std::size_t>(i) * ny; };
  auto orow = [&](int i) { return out.data() + static_cast<std::size_t>(i) * ny; };

  for (int i = 0; i < nz; ++i) {
    const bool zbound = (i == 0 || i == nz - 1);
    if (zbound && !opts.reflect_z) {
      std::fill(orow(i), orow(i) + ny, 0.0);
      continue;
    }
    const double* vi = row(i);
    const double* wi = wrow(i);
    const double* wm = zbound ? wrow(i == 0 ? 1 : nz - 2) : wrow(i - 1);
    const double* wp = zbound ? wrow(i == 0 ? 1 : nz - 2) : wrow(i + 1);
    double* oi = orow(i);
    for (int j = 1; j + 1 < ny; ++j) {
      oi[j] = vi[j] + dt * ((wm[j] - 2 * wi[j] + wp[j]) * ihz2 +
                            (wi[j - 1] - 2 * wi[j] + wi[j + 1]) * ihy2);
    }
    if (opts.hold_y_ends) {
      oi[0] = vi[0];
      oi[ny - 1] = vi[ny - 1];
    } else {
      oi[0] = 0;
      oi[ny - 1] = 0;
    }
  }
}

// Upwind transport out = in + c dt (in_{j+1} - in_j)/hy, the comoving-frame
// drift toward decreasing xi for c > 0; monotone for c dt <= hy.
void advection_step(const TubeGrid& grid, double c, double dt, const StepOptions& opts,
                    const std::vector<double>& in, std::vector<double>& out) {
  const int nz = grid.section.n, ny = grid.ny;
  const double theta = c * dt / grid.hy();
  for (int i = 0; i < nz; ++i) {
    const double* vi = in.data() + static_cast<std::size_t>(i) * ny;
    double* oi = out.data() + static_cast<std::size_t>(i) * ny;
    for (int j = 1; j + 1 < ny; ++j) oi[j] = vi[j] + theta * (vi[j + 1] - vi[j]);
    if (opts.hold_y_ends) {
      oi[0] = vi[0];
      oi[ny - 1] = vi[ny - 1];
    } else {
      oi[0] = 0;
      oi[ny - 1] = 0;
    }
  }
}

long long clamp_negatives(std::vector<double>& values) {
  long long clamped = 0;
  for (double& v : values) {
    if (v < 0) {
      if (v < -1e-14) {
        throw scheme_failure("stepper produced a negative value " + std::to_string(v));
      }
      v = 0;
      ++clamped;
    }
  }
  return clamped;
}

}  // namespace

namespace detail {

void advance_rescaled(TubeField& v, double dtau, const StepOptions& opts,
                      std::vector<double>& w, std::vector<double>& next,
                      long long& clamps) {
  diffusion_step(v, dtau, opts, w, next);
  if (v.frame == Frame::comoving) {
    advection_step(v.grid, v.frame_speed, dtau, opts, next, w);
    std::swap(next, w);
  }
  const double factor = std::exp(dtau / (v.m - 1));
  const int nz = v.nz(), ny = v.ny();
  for (int i = 0; i < nz; ++i) {
    const bool zbound = (i == 0 || i == nz - 1);
    if (zbound && !opts.reflect_z) continue;
    double* oi = next.data() + static_cast<std::size_t>(i) * ny;
    const int j0 = opts.hold_y_ends ? 1 : 0;
    const int j1 = opts.hold_y_ends ? ny - 1 : ny;
    for (int j = j0; j < j1; ++j) oi[j] *= factor;
  }
  clamps += clamp_negatives(next);
  std::swap(v.values, next);
  v.time += dtau;
}

}  // namespace detail

double TubeField::max_value() const {
  double mx = 0;
  for (double v : values) mx = std::max(mx, v);
  return mx;
}

TubeField make_field(const TubeGrid& grid, double m, Variable var, double time,
                     Frame frame, double frame_speed, double t0) {
  validate_exponent(m);
  TubeField f;
  f.grid = grid;
  f.values.assign(static_cast<std::size_t>(grid.section.n) * grid.ny, 0.0);
  f.time = time;
  f.variable = var;
  f.frame = frame;
  f.frame_speed = frame_speed;
  f.m = m;
  f.t0 = t0;
  return f;
}

double cfl_dt(const TubeField& field, double safety) {
  if (!(safety > 0 && safety <= 1)) throw invalid_parameter("cfl safety must lie in (0, 1]");
  const double hz = field.grid.section.h(), hy = field.grid.hy();
  const double dmax = field.m * pow_m(field.max_value(), field.m - 1);
  if (dmax <= 0) return safety * std::min(hz * hz, hy * hy);
  double denom = 2 * diffusion_sum(field.grid) * dmax;
  if (field.variable == Variable::rescaled_v) {
    denom += 1.0 / (field.m - 1);
    if (field.frame == Frame::comoving) denom += std::abs(field.frame_speed) / hy;
  }
  return safety / denom;
}

TubeField step_pme(const TubeField& field, double dt, const StepOptions& opts,
                   long long* clamp_count) {
  if (field.variable != Variable::physical_u) {
    throw invalid_parameter("step_pme expects the physical variable");
  }
  if (!(dt > 0)) throw invalid_parameter("step_pme: dt must be positive");
  if (dt > cfl_dt(field, 1.0) * (1 + 1e-12)) {
    throw stability_violation("step_pme: dt exceeds the stable bound");
  }
  TubeField out = field;
  std::vector<double> w(field.values.size());
  diffusion_step(field, dt, opts, w, out.values);
  long long c = clamp_negatives(out.values);
  if (clamp_count) *clamp_count += c;
  out.time = field.time + dt;
  return out;
}

TubeField step_rescaled(const TubeField& field, double dtau, const StepOptions& opts,
                        long long* clamp_count) {
  if (field.variable != Variable::rescaled_v) {
    throw invalid_parameter("step_rescaled expects the rescaled variable");
  }
  if (!(dtau > 0)) throw invalid_parameter("step_rescaled: dtau must be positive");
  if (dtau > cfl_dt(field, 1.0) * (1 + 1e-12)) {
    throw stability_violation("step_rescaled: dtau exceeds the stable bound");
  }
  if (field.frame == Frame::comoving &&
      std::abs(field.frame_speed) * dtau > field.grid.hy() * (1 + 1e-12)) {
    throw stability_violation("step_rescaled: advection CFL c*dtau <= hy violated");
  }
  TubeField out = field;
  std::vector<double> w(field.values.size());
  std::vector<double> next(field.values.size());
  long long clamps = 0;
  detail::advance_rescaled(out, dtau, opts, w, next, clamps);
  if (clamp_count) *clamp_count += clamps;
  return out;
}

TubeField to_rescaled(const TubeField& u_field, double t0) {
  if (u_field.variable != Variable::physical_u) {
    throw invalid_parameter("to_rescaled expects the physical variable");
  }
  if (!(u_field.time + t0 > 0)) throw invalid_parameter("to_rescaled: t + t0 must be positive");
  TubeField v = u_field;
  v.variable = Variable::rescaled_v;
  v.t0 = t0;
  const double shifted = u_field.time + t0;
  const double factor = std::pow(shifted, 1.0 / (u_field.m - 1));
  for (double& x : v.values) x *= factor;
  v.time = std::log(shifted);
  return v;
}

TubeField from_rescaled(const TubeField& v_field) {
  if (v_field.variable != Variable::rescaled_v) {
    throw invalid_parameter("from_rescaled expects the rescaled variable");
  }
  TubeField u = v_field;
  u.variable = Variable::physical_u;
  const double shifted = std::exp(v_field.time);  // t + t0
  const double factor = std::pow(shifted, -1.0 / (v_field.m - 1));
  for (double& x : u.values) x *= factor;
  u.time = shifted - v_field.t0;
  return u;
}

double admissible_t0(const TubeField& u0, const SectionProfile& profile) {
  if (u0.variable != Variable::physical_u) {
    throw invalid_parameter("admissible_t0 expects the physical variable");
  }
  if (u0.nz() != profile.grid.n) {
    throw invalid_parameter("admissible_t0: datum and profile grids differ");
  }
  const int nz = u0.nz(), ny = u0.ny();
  double t0 = std::numeric_limits<double>::infinity();
  bool any = false;
  for (int i = 0; i < nz; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double u = u0.at(i, j);
      if (u <= 0) continue;
      any = true;
      if (profile.phi[i] <= 0) {
        throw inadmissible_datum("datum positive where the stationary profile vanishes");
      }
      t0 = std::min(t0, std::pow(profile.phi[i] / (2 * u), u0.m - 1));
    }
  }
  if (!any) throw invalid_parameter("admissible_t0: datum is identically zero");
  return std::max(t0, 1e-8);
}

double barenblatt_1d(double y, double t, double m, double C) {
  validate_exponent(m);
  if (!(t > 0)) throw invalid_parameter("barenblatt_1d: t must be positive");
  const double a = 1.0 / (m + 1);
  const double kappa = (m - 1) / (2 * m * (m + 1));
  const double core = C - kappa * y * y * std::pow(t, -2 * a);
  if (core <= 0) return 0;
  return std::pow(t, -a) * std::pow(core, 1.0 / (m - 1));
}

TubeField build_initial_datum(const TubeGrid& grid, double m, const DatumSpec& spec,
                              const SectionProfile& profile) {
  if (profile.grid.n != grid.section.n) {
    throw invalid_parameter("initial datum: profile and tube grids differ");
  }
  if (spec.kind == DatumKind::csv) return load_field_csv(spec.csv_path, grid, m);
  if (!(spec.amplitude > 0)) throw invalid_parameter("initial datum: amplitude must be positive");
  if (!(spec.width > 0)) throw invalid_parameter("initial datum: width must be positive");

  TubeField u = make_field(grid, m, Variable::physical_u, 0.0);
  const int nz = grid.section.n, ny = grid.ny;
  const double L = grid.section.length;
  for (int i = 1; i + 1 < nz; ++i) {
    const double z = grid.section.node(i);
    for (int j = 1; j + 1 < ny; ++j) {
      const double y = grid.y(j);
      double val = 0;
      switch (spec.kind) {
        case DatumKind::phi_bump:
          if (std::abs(y - spec.center) <= spec.width) val = spec.amplitude * profile.phi[i];
          break;
        case DatumKind::plateau:
          if (std::abs(y - spec.center) <= spec.width) {
            val = spec.amplitude * profile.sup_phi * 4 * z * (L - z) / (L * L);
          }
          break;
        case DatumKind::two_bump: {
          const double d = spec.separation / 2;
          if (std::abs(y - spec.center - d) <= spec.width ||
              std::abs(y - spec.center + d) <= spec.width) {
            val = spec.amplitude * profile.phi[i];
          }
          break;
        }
        case DatumKind::csv:
          break;
      }
      u.at(i, j) = val;
    }
  }
  return u;
}

RunRecord run_evolution(const RunConfig& config, const SectionProfile& profile,
                        const std::vector<Observer>& observers) {
  validate_exponent(config.m);
  if (!(config.snapshot_dtau > 0)) throw invalid_parameter("snapshot cadence must be positive");
  if (!(config.safety > 0 && config.safety <= 1)) {
    throw invalid_parameter("run safety factor must lie in (0, 1]");
  }
  const auto wall_start = std::chrono::steady_clock::now();

  RunRecord rec;
  rec.config = config;
  rec.profile = profile;

  TubeField u0 = build_initial_datum(config.grid, config.m, config.datum, profile);
  rec.t0_used = config.t0 > 0 ? config.t0 : admissible_t0(u0, profile);
  TubeField v = to_rescaled(u0, rec.t0_used);
  v.frame = config.frame;
  v.frame_speed = config.frame_speed;
  rec.tau_start = v.time;
  if (config.tau_end < rec.tau_start - 1e-12) {
    throw invalid_parameter("run tau_end precedes the rescaled start time ln(t0)");
  }
  // The fixed step below is stable because sup Phi is an invariant ceiling of
  // the monotone scheme; that requires the initial state to sit under it.
  for (int i = 0; i < v.nz(); ++i) {
    for (int j = 0; j < v.ny(); ++j) {
      if (v.at(i, j) > profile.phi[i] * (1 + 1e-9) + 1e-300) {
        throw inadmissible_datum("rescaled datum exceeds the stationary ceiling; t0 too large");
      }
    }
  }

  double denom = 2 * diffusion_sum(config.grid) * config.m * pow_m(profile.sup_phi, config.m - 1) +
                 1.0 / (config.m - 1);
  if (config.frame == Frame::comoving) {
    denom += std::abs(config.frame_speed) / config.grid.hy();
  }
  const double dtau_base = config.safety / denom;
  const double support_abs = config.support_threshold_rel * profile.sup_phi;
  const int guard = config.support_guard_nodes;

  auto check_guard = [&](const TubeField& f) {
    const int ny = f.ny();
    for (int i = 1; i + 1 < f.nz(); ++i) {
      const double* vi = f.values.data() + static_cast<std::size_t>(i) * ny;
      for (int j = 0; j < guard; ++j) {
        if (vi[j] > support_abs || vi[ny - 1 - j] > support_abs) {
          throw scheme_failure(
              "numerical support reached the y-truncation guard; enlarge the y extent");
        }
      }
      if (vi[0] != 0.0 || vi[ny - 1] != 0.0) {
        throw scheme_failure("y-truncation columns must stay at zero");
      }
    }
  };

  auto emit = [&](const TubeField& f) {
    check_guard(f);
    rec.snapshot_times.push_back(f.time);
    if (!config.out_dir.empty()) {
      const std::string path = write_snapshot(config.out_dir, f, rec.snapshot_times.size() - 1);
      rec.snapshot_paths.push_back(path);
    }
    for (const auto& obs : observers) obs(f);
    if (config.keep_snapshots) rec.snapshots.push_back(f);
  };

  std::vector<double> w(v.values.size());
  std::vector<double> next(v.values.size());
  const StepOptions opts{};

  emit(v);
  double next_snap = rec.tau_start + config.snapshot_dtau;
  while (v.time < config.tau_end - 1e-12) {
    const double target = std::min(next_snap, config.tau_end);
    while (v.time < target - 1e-12) {
      const double dtau = std::min(dtau_base, target - v.time);
      detail::advance_rescaled(v, dtau, opts, w, next, rec.clamps);
      ++rec.steps;
    }
    v.time = target;  // keep snapshot times exact
    emit(v);
    next_snap += config.snapshot_dtau;
  }

  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  if (!config.out_dir.empty()) write_run_manifest(config.out_dir, rec);
  return rec;
}

}  // namespace pmetube
