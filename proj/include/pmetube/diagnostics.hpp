#pragma once

// Quantitative audits of simulation output against the long-time theory:
// windowed relative errors against the stationary profile, outer vanishing,
// free-boundary laws, exponential rate fits, barrier ordering, and the 1-D
// flat problem (concavity preservation plus exponential approach).

#include <vector>

#include "pmetube/barriers.hpp"
#include "pmetube/dynamics.hpp"
#include "pmetube/section.hpp"
#include "pmetube/series.hpp"
#include "pmetube/types.hpp"
#include "pmetube/waves.hpp"

namespace pmetube {

// sup over interior nodes with |y| <= c*tau of |v/Phi - 1|. A window smaller
// than one spacing comes back flagged empty rather than as an error.
ErrorSample relative_error_window(const TubeField& field, const SectionProfile& profile,
                                  double c);

// max of v over |y| >= c*tau. Inconclusive when the numerical support sits
// within guard_nodes of a y-truncation end.
struct OuterMax {
  double value = 0;
  bool conclusive = true;
};
OuterMax outer_support_max(const TubeField& field, double c, double support_threshold,
                           int guard_nodes = 5);

// Front positions for every snapshot of a run.
FrontSeries front_series_of(const RunRecord& run, double threshold);

// Pointwise barrier ordering on the half-strip y >= 0:
//   f(tau - T) phi(z, y - g(tau - T)) <= v(z, y, tau) <= fbar(tau - tau1) phi(z, y - gbar(tau - tau1))
// for every snapshot and node, searched over the given alignment offsets.
struct AlignmentGrid {
  std::vector<double> sub_offsets{0};
  std::vector<double> sup_offsets{0};
};
struct OrderingReport {
  double sub_violation = 0;    // max positive part of w_sub - v
  double super_violation = 0;  // max positive part of v - w_super
  double sub_offset = 0;
  double sup_offset = 0;
  double tolerance = 0;        // pass bound, 1e-8 * sup Phi
  bool passed = false;
  double worst_sub_tau = 0, worst_sub_y = 0;
  int worst_sub_row = -1;
  double worst_sup_tau = 0, worst_sup_y = 0;
  int worst_sup_row = -1;
};
OrderingReport ordering_audit(const RunRecord& run, const BarrierPath& sub,
                              const BarrierPath& super, const WaveProfile& wave,
                              const AlignmentGrid& alignment);

// Least-squares fit of ln(1 - v(z_station, 0, tau)/Phi(z_station)) over the
// window; the slope estimates the negative convergence rate.
FitResult exp_rate_fit(const RunRecord& run, const SectionProfile& profile, int z_station,
                       double tau_a, double tau_b);

// 1-D companion problem on (-A, A):
//   f_tau = k (f^m)'' + f (1 - f^{m-1})/(m-1),  f = 1-eps at tau=0 and y=+-A.
// Checks: (a) the discrete second difference of f^m stays <= 1e-10,
// (b) f is nondecreasing in tau at every node, (c) the approach of
// min_{|y|<=B} f to its steady level fits an exponential with R^2 >= 0.99,
// giving a pointwise lower envelope steady - delta e^{lambda tau} on the
// fitted window.
struct FlatChecksReport {
  bool concavity_ok = false;
  bool monotone_ok = false;
  bool rate_ok = false;
  double max_second_diff = 0;   // of f^m, over all interior nodes and times
  double min_increment = 0;     // most negative single-step change
  double steady_gap = 0;        // 1 - min_{|y|<=B} f at tau_end
  double envelope_delta = 0;
  FitResult fit;
};
FlatChecksReport flat_problem_checks(double A, double k, double eps, double B, double m,
                                     int n, double dtau, double tau_end);

// Free-boundary law audit for tau >= T:
//   final_ratio = max_z Gamma_v(z, tau_end)/tau_end (compare with c*),
//   c_emp = sup_{tau >= T, rows} |Gamma_v(z,tau) - Gamma_phi(z) - c* tau|,
// non-drifting when the last-quarter sup stays within 1.1x the middle-half
// sup. Rows adjacent to the section boundary are excluded; the gap between
// Gamma_phi and its concave envelope is reported, not asserted.
struct FrontLawReport {
  bool conclusive = false;
  double final_ratio = 0;
  double ratio_gap = 0;        // |final_ratio - cstar| / cstar
  double c_emp = 0;
  double mid_max = 0;
  double late_max = 0;
  bool non_drifting = false;
  bool passed = false;
  double concave_envelope_gap = 0;
};
FrontLawReport front_law_audit(const FrontSeries& fronts, double cstar,
                               const WaveProfile& wave, double T);

// First snapshot tau with v >= (1-eps) Phi on the window |y| <= c*tau,
// together with the ceiling excess max(v - Phi) there.
struct InnerUniformResult {
  bool achieved = false;
  double tau = 0;
  double final_gap = 0;       // 1 - min v/Phi at the last snapshot when not achieved
  double ceiling_excess = 0;  // max(v - Phi) on the achieving window
};
InnerUniformResult inner_uniform_check(const RunRecord& run, const SectionProfile& profile,
                                       double eps, double c);

// Upper concave envelope of per-row values (NaN rows skipped); returns the
// max gap envelope - value.
double concave_envelope_gap(const std::vector<double>& z, const std::vector<double>& vals);

}  // namespace pmetube
