#include "pmetube/barriers.hpp"

#include <algorithm>
#include <cmath>

#include "pmetube/numerics.hpp"

namespace pmetube {

namespace {

void validate_params(const BarrierParams& p) {
  if (!(p.m > 1)) throw degenerate_exponent("barrier exponent must satisfy m > 1");
  if (!(p.cstar > 0)) throw invalid_parameter("barrier speed must be positive");
  if (!(p.f0 > 0 && p.f0 < 1)) throw invalid_parameter("barrier f0 must lie in (0, 1)");
  if (p.kind == BarrierKind::sub && !(p.delta0 > 0 && p.delta0 < 1)) {
    throw invalid_parameter("sub-barrier delta0 must lie in (0, 1)");
  }
}

double interp_path(const std::vector<double>& s, double dtau, double tau,
                   const char* what) {
  const double end = dtau * (static_cast<double>(s.size()) - 1);
  if (tau < -1e-12 || tau > end + 1e-9) {
    throw range_failure(std::string(what) + ": tau=" + std::to_string(tau) +
                        " outside the sampled range [0, " + std::to_string(end) + "]");
  }
  const double x = std::clamp(tau / dtau, 0.0, static_cast<double>(s.size()) - 1);
  const std::size_t k = std::min(static_cast<std::size_t>(x), s.size() - 2);
  const double frac = x - static_cast<double>(k);
  return s[k] * (1 - frac) + s[k + 1] * frac;
}

}  // namespace

double BarrierPath::f_at(double tau) const { return interp_path(f, dtau, tau, "barrier f"); }
double BarrierPath::g_at(double tau) const { return interp_path(g, dtau, tau, "barrier g"); }

double delta_schedule(double delta0, double m, double tau) {
  if (!(delta0 > 0 && delta0 < 1)) throw invalid_parameter("delta0 must lie in (0, 1)");
  if (!(m > 1)) throw degenerate_exponent("delta_schedule: m must exceed 1");
  if (!(tau >= 0)) throw invalid_parameter("delta_schedule: tau must be nonnegative");
  return 2 * (m - 1) * delta0 / ((1 + tau) * (1 + tau));
}

BarrierPath integrate_barrier(const BarrierParams& params, double tau_end, double dtau) {
  validate_params(params);
  if (!(dtau > 0)) throw invalid_parameter("integrate_barrier: dtau must be positive");
  if (dtau > 0.01 * (params.m - 1)) {
    throw invalid_parameter("integrate_barrier: dtau exceeds the accuracy guard 0.01(m-1)");
  }
  if (!(tau_end >= dtau)) throw invalid_parameter("integrate_barrier: tau_end must be >= dtau");

  const long long steps = std::llround(std::ceil(tau_end / dtau - 1e-9));
  const double h = tau_end / static_cast<double>(steps);
  const double m = params.m;
  const bool sub = params.kind == BarrierKind::sub;

  auto fdot = [&](double tau, double f) {
    const double d = sub ? delta_schedule(params.delta0, m, tau) : 0.0;
    return f * (1 - d - pow_m(f, m - 1)) / (m - 1);
  };
  auto gdot = [&](double f) { return params.cstar * pow_m(f, m - 1); };

  BarrierPath path;
  path.params = params;
  path.dtau = h;
  path.f.reserve(steps + 1);
  path.g.reserve(steps + 1);
  double f = params.f0, g = params.g0;
  path.f.push_back(f);
  path.g.push_back(g);
  for (long long s = 0; s < steps; ++s) {
    const double tau = h * static_cast<double>(s);
    const double k1f = fdot(tau, f);
    const double k1g = gdot(f);
    const double k2f = fdot(tau + h / 2, f + h / 2 * k1f);
    const double k2g = gdot(f + h / 2 * k1f);
    const double k3f = fdot(tau + h / 2, f + h / 2 * k2f);
    const double k3g = gdot(f + h / 2 * k2f);
    const double k4f = fdot(tau + h, f + h * k3f);
    const double k4g = gdot(f + h * k3f);
    f += h / 6 * (k1f + 2 * k2f + 2 * k3f + k4f);
    g += h / 6 * (k1g + 2 * k2g + 2 * k3g + k4g);
    if (!(f > 0 && f < 1)) {
      throw integration_failure("barrier amplitude left (0,1) at tau=" +
                                std::to_string(tau + h));
    }
    path.f.push_back(f);
    path.g.push_back(g);
  }
  path.predicted_shift = asymptotic_shift(params);
  return path;
}

std::pair<double, double> super_closed_form(double f0, double g0, double cstar, double m,
                                            double tau) {
  if (!(m > 1)) throw degenerate_exponent("super_closed_form: m must exceed 1");
  if (!(f0 > 0 && f0 < 1)) throw invalid_parameter("super_closed_form: f0 must lie in (0,1)");
  if (!(cstar > 0)) throw invalid_parameter("super_closed_form: cstar must be positive");
  if (!(tau >= 0)) throw invalid_parameter("super_closed_form: tau must be nonnegative");
  const double p0 = std::pow(f0, m - 1);
  // p = p0 e^tau / (1 + p0(e^tau - 1)), written overflow-safe:
  const double emt = std::exp(-tau);
  const double denom = p0 + (1 - p0) * emt;
  const double p = p0 / denom;
  const double f = std::pow(p, 1.0 / (m - 1));
  // ln(1 + p0(e^tau - 1)) = tau + ln(p0 + (1-p0) e^{-tau})
  const double g = g0 + cstar * (tau + std::log(denom));
  return {f, g};
}

double asymptotic_shift(const BarrierParams& params) {
  validate_params(params);
  double shift = params.g0 + params.cstar * (params.m - 1) * std::log(params.f0);
  if (params.kind == BarrierKind::sub) {
    shift -= 2 * params.cstar * (params.m - 1) * params.delta0;
  }
  return shift;
}

double evaluate_barrier(const BarrierPath& path, const WaveProfile& wave, double tau,
                        int z_index, double y) {
  if (!wave.normalized) {
    throw invalid_parameter("evaluate_barrier: wave profile must be normalized");
  }
  if (z_index < 0 || z_index >= wave.section.n) {
    throw invalid_parameter("evaluate_barrier: z index out of range");
  }
  const double f = path.f_at(tau);
  const double g = path.g_at(tau);
  const double xi = y - g;
  if (xi >= wave.xi0) return 0;
  return f * wave.value_at_xi(z_index, xi);
}

bool sub_ceiling_holds(const BarrierPath& path) {
  if (path.params.kind != BarrierKind::sub) {
    throw invalid_parameter("sub_ceiling_holds applies to sub barriers");
  }
  const double m = path.params.m;
  for (std::size_t k = 0; k < path.f.size(); ++k) {
    const double tau = path.dtau * static_cast<double>(k);
    const double ceiling = 1 - delta_schedule(path.params.delta0, m, tau) / (2 * (m - 1));
    if (path.f[k] > ceiling + 1e-12) return false;
  }
  return true;
}

double find_delta_bar(double m, double f0, double cstar, double tau_end, double dtau) {
  auto holds = [&](double delta0) {
    BarrierParams p{BarrierKind::sub, m, cstar, f0, 0.0, delta0};
    return sub_ceiling_holds(integrate_barrier(p, tau_end, dtau));
  };
  double lo = 1e-6, hi = 1 - 1e-6;
  if (!holds(lo)) return 0;
  if (holds(hi)) return hi;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    (holds(mid) ? lo : hi) = mid;
  }
  return lo;
}

EpsilonBookkeeping epsilon_bookkeeping(double eps, double m, double cstar) {
  if (!(eps > 0 && eps < 1)) throw invalid_parameter("epsilon must lie in (0, 1)");
  if (!(m > 1)) throw degenerate_exponent("epsilon_bookkeeping: m must exceed 1");
  if (!(cstar > 0)) throw invalid_parameter("epsilon_bookkeeping: cstar must be positive");
  EpsilonBookkeeping b;
  b.eps = eps;
  b.a_eps = eps * (3 - eps) / 2;
  b.b_eps = eps / 2;
  b.lam_eps = std::pow(1 - eps, -(m - 1) / 2);
  b.c_eps = cstar * std::pow((1 - b.a_eps) / (1 - eps), m - 1);
  if (std::abs((1 - b.a_eps) / (1 - b.b_eps) - (1 - eps)) > 1e-13) {
    throw error("epsilon bookkeeping identity violated");
  }
  if (!(b.a_eps > eps && b.a_eps < 1) || !(b.b_eps > 0 && b.b_eps < b.a_eps) ||
      !(b.c_eps < cstar)) {
    throw error("epsilon bookkeeping range check failed");
  }
  return b;
}

}  // namespace pmetube
