#pragma once

// Explicit time integration on the truncated strip D x (y_min, y_max):
//
//   physical variable   du/dt   = Laplacian(u^m)
//   rescaled variable   dv/dtau = Laplacian(v^m) + v/(m-1)   [+ c dv/dxi comoving]
//
// linked by v(x, tau) = (t + t0)^{1/(m-1)} u(x, t), tau = ln(t + t0).
//
// The scheme is the 5-point explicit one, kept monotone by the CFL bound, so
// the discrete comparison principle holds exactly: ordered states stay
// ordered, nonnegativity is preserved, and the stationary profile is an
// invariant ceiling. The reaction term is applied as the exact factor
// e^{dtau/(m-1)} per step (Lie splitting); comoving advection is first-order
// upwind.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pmetube/section.hpp"
#include "pmetube/types.hpp"

namespace pmetube {

enum class Frame { lab, comoving };
enum class Variable { physical_u, rescaled_v };

struct TubeField {
  TubeGrid grid;
  std::vector<double> values;  // nz rows by ny columns, row-major
  double time = 0;             // t for physical_u, tau for rescaled_v
  Variable variable = Variable::rescaled_v;
  Frame frame = Frame::lab;
  double frame_speed = 0;      // comoving speed c (toward +y)
  double m = 2;
  double t0 = 1;

  int nz() const { return grid.section.n; }
  int ny() const { return grid.ny; }
  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * grid.ny + j]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * grid.ny + j]; }
  double max_value() const;
};

TubeField make_field(const TubeGrid& grid, double m, Variable var, double time = 0,
                     Frame frame = Frame::lab, double frame_speed = 0, double t0 = 1);

struct StepOptions {
  bool reflect_z = false;     // harness: zero-flux section boundary (1-D in y)
  bool hold_y_ends = false;   // harness: keep the y-end columns at their values
};

// Stable step size: safety / (2 (1/hz^2 + 1/hy^2) max_m m v^{m-1} + margin),
// margin = 1/(m-1) for rescaled fields plus c/hy in the comoving frame.
// An all-zero field gets the grid-only fallback safety * min(hz^2, hy^2).
double cfl_dt(const TubeField& field, double safety);

// One explicit step of du/dt = Laplacian(u^m). Returns the advanced field;
// clamp_count (if given) accumulates how many round-off negatives were
// clamped to zero.
TubeField step_pme(const TubeField& field, double dt, const StepOptions& opts = {},
                   long long* clamp_count = nullptr);

// One split step of the rescaled equation: diffusion, then (comoving only)
// upwind advection with speed c toward decreasing xi, then the exact
// reaction factor e^{dtau/(m-1)}.
TubeField step_rescaled(const TubeField& field, double dtau, const StepOptions& opts = {},
                        long long* clamp_count = nullptr);

// Pointwise change of variables; round trips are exact to machine precision.
TubeField to_rescaled(const TubeField& u_field, double t0);
TubeField from_rescaled(const TubeField& v_field);

// Largest t0 with t0^{1/(m-1)} u0 <= Phi/2 everywhere, floored at 1e-8.
// Data positive where Phi vanishes (the z-boundary) are rejected.
double admissible_t0(const TubeField& u0, const SectionProfile& profile);

// Closed-form source solution of the 1-D porous medium equation,
//   u(y, t) = t^{-a} (C - kappa y^2 t^{-2a})_+^{1/(m-1)},
// a = 1/(m+1), kappa = (m-1)/(2m(m+1)); the stepper oracle.
double barenblatt_1d(double y, double t, double m, double C);

// ---- run orchestration ----------------------------------------------------

enum class DatumKind { phi_bump, plateau, two_bump, csv };

struct DatumSpec {
  DatumKind kind = DatumKind::phi_bump;
  double amplitude = 0.5;  // relative to Phi (phi_bump/two_bump) or sup Phi (plateau)
  double width = 1.0;      // half-width of each bump in y
  double separation = 4.0; // center distance for two_bump
  double center = 0.0;
  std::string csv_path;
};

// Physical-variable initial state at t = 0.
TubeField build_initial_datum(const TubeGrid& grid, double m, const DatumSpec& spec,
                              const SectionProfile& profile);

struct RunConfig {
  TubeGrid grid;
  double m = 2;
  double t0 = 0;  // <= 0: choose admissible_t0 from the datum
  DatumSpec datum;
  Frame frame = Frame::lab;
  double frame_speed = 0;
  double tau_end = 20;
  double snapshot_dtau = 0.5;
  double safety = 0.9;
  double support_threshold_rel = 1e-10;  // support cutoff as a fraction of sup Phi
  int support_guard_nodes = 5;
  bool keep_snapshots = true;
  std::string out_dir;  // when set, snapshots and a manifest are persisted here
};

struct RunRecord {
  RunConfig config;
  SectionProfile profile;
  double t0_used = 1;
  double tau_start = 0;
  std::vector<double> snapshot_times;
  std::vector<TubeField> snapshots;       // populated when keep_snapshots
  std::vector<std::string> snapshot_paths;  // populated when out_dir is set
  long long steps = 0;
  long long clamps = 0;
  double wall_seconds = 0;
};

using Observer = std::function<void(const TubeField&)>;

// Drives step_rescaled from tau_start = ln(t0) to tau_end, invoking the
// observers at the snapshot cadence. Deterministic for a fixed config; the
// step size is fixed from the Phi ceiling. Errors if the numerical support
// comes within support_guard_nodes of a y-end.
RunRecord run_evolution(const RunConfig& config, const SectionProfile& profile,
                        const std::vector<Observer>& observers = {});

namespace detail {
// In-place split step with caller-provided scratch buffers of field size.
// The caller guarantees the diffusion and advection CFL bounds.
void advance_rescaled(TubeField& v, double dtau, const StepOptions& opts,
                      std::vector<double>& w, std::vector<double>& next,
                      long long& clamps);
}  // namespace detail

}  // namespace pmetube
