#pragma once

// Traveling-wave profiles phi(z, xi) of the rescaled flow: weak solutions of
//
//   Laplacian(phi^m) + c dphi/dxi + phi/(m-1) = 0,   phi = 0 on the walls,
//
// monotone nonincreasing in xi, equal to the stationary profile Phi in the
// xi -> -inf limit and identically zero right of a finite front. The profile
// is found as the steady state of the comoving parabolic flow; the front is
// re-pinned to a fixed station by integer node shifts so drift cannot eat
// the window, and the speed mismatch shows up as that drift rate.

#include <vector>

#include "pmetube/dynamics.hpp"
#include "pmetube/section.hpp"
#include "pmetube/series.hpp"
#include "pmetube/types.hpp"

namespace pmetube {

struct WaveProfile {
  SectionGrid section;
  double m = 2;
  double xi_min = 0, xi_max = 0;
  int n_xi = 0;
  std::vector<double> values;  // section.n rows by n_xi columns, row-major
  double speed = 0;            // requested comoving speed c
  std::vector<double> front;   // Gamma_phi^+(z) per row, NaN when empty
  double xi0 = 0;              // right support bound = max front
  bool normalized = false;     // max_z Gamma = 0 within one spacing
  double front_threshold = 0;  // absolute cutoff used for the front
  double drift_rate = 0;       // free-running front drift per unit pseudo-time
  double locked_speed = 0;     // grid-stationary speed the relaxation locked onto
  double final_residual = 0;   // shape change per unit pseudo-time at exit

  double h_xi() const { return (xi_max - xi_min) / (n_xi - 1); }
  double xi(int k) const { return xi_min + k * h_xi(); }
  double at(int i, int k) const { return values[static_cast<std::size_t>(i) * n_xi + k]; }
  double& at(int i, int k) { return values[static_cast<std::size_t>(i) * n_xi + k]; }

  // Linear interpolation in xi; clamps to the plateau column left of the
  // window and to zero right of it.
  double value_at_xi(int i, double x) const;
};

struct WaveRelaxOptions {
  double tau_max = 60;
  int pin_interval = 100;        // steps between front re-pins
  double threshold_rel = 1e-8;   // front cutoff as a fraction of sup Phi
  int guard_nodes = 5;           // window-too-short margin
  double safety = 0.9;
  // The discrete wave is stationary at a speed O(h) away from the requested
  // one; without compensation the front crawls through grid cells in a
  // stick-slip orbit and the shape never freezes. After free_stage_tau of
  // free running the measured drift is folded into the advection speed
  // (when within lock_threshold of c), letting the front pin to the lattice
  // and the shape converge to a genuine fixed point.
  bool lock_to_grid = true;
  double free_stage_tau = 12;
  double lock_threshold = 0.10;  // max relative speed adjustment
  bool require_convergence = true;
};

// Relaxes the comoving flow at speed c with phi = Phi at xi_min and phi = 0
// at xi_max until the shape change per unit pseudo-time between re-pinned
// states drops below tol.
WaveProfile relax_wave(const SectionProfile& profile, double c, double xi_min,
                       double xi_max, int n_xi, double tol,
                       const WaveRelaxOptions& opts = {});

// Integer-node shift putting max_z Gamma_phi^+ at 0 within one spacing.
WaveProfile normalize_wave(const WaveProfile& w);

// xi -> -xi; the reflected profile travels at speed -c.
WaveProfile reflect_wave(const WaveProfile& w);

// Per-row rightmost crossing of value - threshold, linearly interpolated;
// rows with no super-threshold node come back NaN. Rows are laid out
// row-major as nrows x ncols with ordinates ymin + k*hy.
std::vector<double> front_curve(const double* values, int nrows, int ncols, double ymin,
                                double hy, double threshold);

std::vector<double> front_curve(const TubeField& field, double threshold);
std::vector<double> front_curve(const WaveProfile& wave, double threshold);

// max over non-NaN interior entries; NaN when none.
double max_interior_front(const std::vector<double>& front);

// Least-squares line through (tau, max_z Gamma(tau)) over [tau_a, tau_b].
struct SpeedEstimate {
  double slope = 0;
  double intercept = 0;
  double residual_sup = 0;
  int samples = 0;
};
SpeedEstimate measure_speed(const FrontSeries& fronts, double tau_a, double tau_b);

// Sup of |Laplacian_h(phi^m) + c D_xi phi + phi/(m-1)| (central D_xi) over
// interior nodes of the positivity set; plateau_sup restricts to the deepest
// quarter of the window where the profile is flat.
struct WaveResidual {
  double sup = 0;
  double plateau_sup = 0;
};
WaveResidual wave_residual(const WaveProfile& w);

}  // namespace pmetube
