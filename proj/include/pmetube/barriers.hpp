#pragma once

// Barrier fields w(z, y, tau) = f(tau) phi(z, y - g(tau)) built on the wave
// profile. The amplitude and shift solve
//
//   sub:    f' = f (1 - delta(tau) - f^{m-1})/(m-1),   g' = c* f^{m-1},
//   super:  f' = f (1 - f^{m-1})/(m-1),                g' = c* f^{m-1},
//
// with delta(tau) = 2(m-1) delta0 / (1+tau)^2. The super system is logistic
// in p = f^{m-1} and closed-form solvable; both systems have explicit
// asymptotic shift constants lim g(tau) - c* tau.

#include <utility>
#include <vector>

#include "pmetube/types.hpp"
#include "pmetube/waves.hpp"

namespace pmetube {

enum class BarrierKind { sub, super };

struct BarrierParams {
  BarrierKind kind = BarrierKind::super;
  double m = 2;
  double cstar = 1;
  double f0 = 0.5;     // in (0, 1) strictly
  double g0 = 0;
  double delta0 = 0;   // sub only, in (0, 1)
};

struct BarrierPath {
  BarrierParams params;
  double dtau = 0;
  std::vector<double> f;  // samples at k * dtau
  std::vector<double> g;
  double predicted_shift = 0;  // closed-form lim g(tau) - c* tau

  double tau_end() const { return dtau * (static_cast<double>(f.size()) - 1); }
  double f_at(double tau) const;
  double g_at(double tau) const;
};

// delta(tau) = 2 (m-1) delta0 / (1 + tau)^2; integrates to 2(m-1) delta0.
double delta_schedule(double delta0, double m, double tau);

// Classical fourth-order integration of the coupled system; errors if the
// amplitude leaves (0, 1).
BarrierPath integrate_barrier(const BarrierParams& params, double tau_end, double dtau);

// Logistic closed form for the super system: with p0 = f0^{m-1},
//   p(tau) = p0 e^tau / (1 + p0 (e^tau - 1)),  f = p^{1/(m-1)},
//   g(tau) = g0 + c* ln(1 + p0 (e^tau - 1)).
std::pair<double, double> super_closed_form(double f0, double g0, double cstar, double m,
                                            double tau);

// lim g(tau) - c* tau: g0 + c*(m-1) ln f0, minus 2 c*(m-1) delta0 for sub.
double asymptotic_shift(const BarrierParams& params);

// f(tau) * phi(z, y - g(tau)) with linear interpolation in tau and xi; zero
// right of the wave front. The wave must be normalized.
double evaluate_barrier(const BarrierPath& path, const WaveProfile& wave, double tau,
                        int z_index, double y);

// Whether f(tau) <= 1 - delta(tau)/(2(m-1)) at every sample (holds for all
// delta0 below a threshold depending on m and f0).
bool sub_ceiling_holds(const BarrierPath& path);

// Largest delta0 for which the sub-amplitude ceiling holds on [0, tau_end],
// located by bisection.
double find_delta_bar(double m, double f0, double cstar, double tau_end = 50,
                      double dtau = 1e-3);

// Dilation bookkeeping for a (1-eps)-fraction comparison on the scaled
// section: a = eps(3-eps)/2, b = eps/2, lam = (1-eps)^{-(m-1)/2},
// c_eps = c* ((1-a)/(1-eps))^{m-1}; identically (1-a)/(1-b) = 1-eps.
struct EpsilonBookkeeping {
  double eps = 0;
  double a_eps = 0;
  double b_eps = 0;
  double lam_eps = 1;
  double c_eps = 0;
};
EpsilonBookkeeping epsilon_bookkeeping(double eps, double m, double cstar);

}  // namespace pmetube
