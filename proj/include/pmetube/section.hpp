#pragma once

// Cross-section machinery for porous-medium flow in a strip D x R with
// D = (0, L):
//
//   * the stationary profile Phi, the unique nontrivial nonnegative solution
//     of -(Phi^m)'' = Phi/(m-1) on D with zero boundary data, computed two
//     independent ways (first-integral shooting and pseudo-time relaxation),
//   * the principal Dirichlet eigenvalue lambda_1(D) = (pi/L)^2 and its
//     finite-difference counterpart,
//   * the critical wave speed c* = 1/((m-1) sqrt(lambda_1)),
//   * the separable elliptic subsolution Psi(z,y) = Phi(z) [lam cos(a y)]^{1/m}.

#include <optional>
#include <vector>

#include "pmetube/types.hpp"

namespace pmetube {

struct SectionProfile {
  SectionGrid grid;
  std::vector<double> phi;   // one value per node, zero at both ends
  double m = 2;
  double lambda1 = 0;
  double cstar = 0;
  double sup_phi = 0;
};

// (pi/L)^2, the smallest Dirichlet eigenvalue of -d^2/dz^2 on (0, L).
double analytic_lambda1(double length);

// Smallest eigenvalue of the second-difference Dirichlet matrix on the
// interior nodes, via inverse power iteration; O(h^2) consistent with the
// analytic value.
double numeric_lambda1(const SectionGrid& grid);

// c* = 1 / ((m-1) sqrt(lambda1)).
double critical_speed(double m, double lambda1);

// Shooting solve through the first integral of -w'' = w^{1/m}/(m-1),
// w = Phi^m: bisection on w_max so the half-length quadrature matches L/2,
// then per-node inversion of z(w). Symmetric about L/2 by construction.
SectionProfile shoot_profile(double length, double m, int n);

// Long-time limit of dv/dtau = (v^m)'' + v/(m-1) on the section, stepped
// explicitly until the sup-norm change per unit tau drops below tol.
// An optional initial state overrides the default interior bump.
SectionProfile relax_profile(double length, double m, int n, double tol = 1e-10,
                             const std::optional<std::vector<double>>& init = std::nullopt);

// Profile on the dilated section (0, lam*L) predicted by the scaling
// Phi_{lam L}(z) = lam^{2/(m-1)} Phi_L(z/lam); lam = 1 is the identity.
SectionProfile dilate_profile(const SectionProfile& p, double lam);

struct CosineSubsolution {
  SectionGrid zgrid;
  double m = 2;
  double lambda_param = 1;   // lam in (0, 1]
  double alpha = 0;          // a > 0; the y-interval is (-pi/2a, pi/2a)
  int ny = 0;
  std::vector<double> values;  // zgrid.n rows by ny columns, row-major
  bool admissible = false;

  double y_halfwidth() const { return 1.5707963267948966 / alpha; }
  double hy() const { return 2 * y_halfwidth() / (ny - 1); }
  double y(int j) const { return -y_halfwidth() + j * hy(); }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * ny + j]; }
};

// Tabulates Psi = Phi(z) [lam cos(a y)]^{1/m} on D x (-pi/2a, pi/2a) and
// flags whether lam^{(m-1)/m} [1 + a^2 (m-1) ||Phi||_inf^{m-1}] <= 1, the
// condition under which Psi is an elliptic subsolution. Inadmissible
// parameters yield admissible = false, not an error.
CosineSubsolution cosine_subsolution(const SectionProfile& p, double lambda_param,
                                     double alpha, int ny);

// sup over interior nodes of |a.phi - b.phi| / b.phi; grids must agree.
double relative_sup_difference(const SectionProfile& a, const SectionProfile& b);

}  // namespace pmetube
