#pragma once

// Small numerical toolbox: fast integer-ish powers for the nonlinearity u^m,
// tanh-sinh quadrature for endpoint-singular integrals, bisection, a
// least-squares line fit, and a tridiagonal solve.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "pmetube/types.hpp"

namespace pmetube {

// u^m with fast paths for the exponents used throughout (m = 2, 3, 3/2).
inline double pow_m(double v, double m) {
  if (m == 2.0) return v * v;
  if (m == 3.0) return v * v * v;
  if (m == 1.5) return v * std::sqrt(v);
  return std::pow(v, m);
}

// out[k] = in[k]^m, branch hoisted out of the loop.
inline void pow_field(const double* in, double* out, std::size_t count, double m) {
  if (m == 2.0) {
    for (std::size_t k = 0; k < count; ++k) out[k] = in[k] * in[k];
  } else if (m == 3.0) {
    for (std::size_t k = 0; k < count; ++k) out[k] = in[k] * in[k] * in[k];
  } else if (m == 1.5) {
    for (std::size_t k = 0; k < count; ++k) out[k] = in[k] * std::sqrt(in[k]);
  } else {
    for (std::size_t k = 0; k < count; ++k) out[k] = std::pow(in[k], m);
  }
}

// Tanh-sinh quadrature on (a, b). Nodes cluster doubly-exponentially at the
// endpoints, so integrable endpoint singularities (inverse square roots and
// milder) converge without special casing. The integrand is evaluated via
// its distance to the nearest endpoint to avoid cancellation.
//
// f is called as f(x, dist) where dist = min(x - a, b - x) computed stably.
template <class F>
double tanh_sinh(F&& f, double a, double b, double tol = 1e-12, int max_level = 12) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const double pi_half = 1.5707963267948966;

  auto eval_pair = [&](double t) {
    // x = mid + half*tanh(pi/2*sinh t); 1 - |tanh| computed via exp to keep
    // the endpoint distance accurate.
    double u = pi_half * std::sinh(t);
    double e = std::exp(-2.0 * std::abs(u));
    double one_minus = 2.0 * e / (1.0 + e);          // 1 - tanh(|u|)
    double w = pi_half * std::cosh(t) * (2.0 * e / ((1.0 + e) * (1.0 + e))) * 2.0;
    // w = pi/2 cosh t / cosh^2(u), written with the same exp factor:
    // sech^2(u) = 4 e / (1+e)^2.
    double dist = half * one_minus;                  // distance to the near endpoint
    double sum = 0;
    if (dist > 0) {
      sum += f(b - dist, dist);
      sum += f(a + dist, dist);
    }
    return w * sum;
  };

  // Level 0: trapezoidal in t with h = 1 over |t| <= 3.8 (weights beyond are
  // below double precision for the integrands used here).
  const double t_max = 3.8;
  double h = 1.0;
  double s = pi_half * f(mid, half) * 1.0;  // t = 0 contributes f(mid) * pi/2 * 1
  for (double t = h; t <= t_max; t += h) s += eval_pair(t);
  double integral = half * h * s;

  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    double add = 0;
    for (double t = h; t <= t_max; t += 2 * h) add += eval_pair(t);
    double refined = 0.5 * integral + half * h * add;
    if (level >= 3 && std::abs(refined - integral) <= tol * std::max(1.0, std::abs(refined))) {
      return refined;
    }
    integral = refined;
  }
  return integral;
}

// Bisection for a monotone continuous g with g(lo), g(hi) of opposite sign.
template <class G>
double bisect(G&& g, double lo, double hi, double xtol, int max_iter = 200) {
  double flo = g(lo);
  double fhi = g(hi);
  if (flo == 0) return lo;
  if (fhi == 0) return hi;
  if ((flo > 0) == (fhi > 0)) {
    throw oracle_failure("bisection bracket does not straddle a root: g(" +
                         std::to_string(lo) + ")=" + std::to_string(flo) + ", g(" +
                         std::to_string(hi) + ")=" + std::to_string(fhi));
  }
  for (int it = 0; it < max_iter && hi - lo > xtol; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = g(mid);
    if (fm == 0) return mid;
    if ((fm > 0) == (fhi > 0)) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

// Least-squares line y = intercept + slope * x with sup residual and R^2.
struct LineFit {
  double slope = 0;
  double intercept = 0;
  double residual_sup = 0;
  double r2 = 1;
  int samples = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw estimation_failure("line fit needs at least two samples");
  }
  const int n = static_cast<int>(x.size());
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0) throw estimation_failure("line fit abscissae are degenerate");
  LineFit fit;
  fit.samples = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (int i = 0; i < n; ++i) {
    double r = y[i] - (fit.intercept + fit.slope * x[i]);
    fit.residual_sup = std::max(fit.residual_sup, std::abs(r));
    ss_res += r * r;
  }
  fit.r2 = (syy > 0) ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
  return fit;
}

// Thomas algorithm for a constant tridiagonal system (sub, diag, super).
inline void solve_tridiagonal(double sub, double diag, double super,
                              std::vector<double>& rhs) {
  const int n = static_cast<int>(rhs.size());
  std::vector<double> c(n);
  c[0] = super / diag;
  rhs[0] /= diag;
  for (int i = 1; i < n; ++i) {
    double denom = diag - sub * c[i - 1];
    c[i] = super / denom;
    rhs[i] = (rhs[i] - sub * rhs[i - 1]) / denom;
  }
  for (int i = n - 2; i >= 0; --i) rhs[i] -= c[i] * rhs[i + 1];
}

// FNV-1a 64-bit content hash for manifests.
inline std::uint64_t fnv1a64(const unsigned char* data, std::size_t count,
                             std::uint64_t seed = 1469598103934665603ull) {
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < count; ++i) {
    h ^= data[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace pmetube
