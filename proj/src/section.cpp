#include "pmetube/section.hpp"

#include <algorithm>
#include <cmath>

#include "pmetube/numerics.hpp"

namespace pmetube {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

void validate_exponent(double m) {
  if (!(m > 1)) throw degenerate_exponent("diffusion exponent must satisfy m > 1");
}
}  // namespace

double analytic_lambda1(double length) {
  if (!(length > 0)) throw invalid_parameter("analytic_lambda1: length must be positive");
  return (kPi / length) * (kPi / length);
}

double numeric_lambda1(const SectionGrid& grid) {
  if (grid.n < 3) throw invalid_parameter("numeric_lambda1: need at least 3 nodes");
  const int interior = grid.n - 2;
  const double h2 = grid.h() * grid.h();
  // T = (1/h^2) tridiag(-1, 2, -1); inverse power iteration with a Rayleigh
  // quotient stop. The spectral gap (lambda2/lambda1 ~ 4) makes this fast.
  std::vector<double> x(interior, 1.0);
  double rho_prev = 0;
  for (int it = 0; it < 500; ++it) {
    std::vector<double> y = x;
    solve_tridiagonal(-1.0 / h2, 2.0 / h2, -1.0 / h2, y);
    double norm = 0;
    for (double v : y) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : y) v /= norm;
    // Rayleigh quotient y^T T y.
    double rho = 0;
    for (int i = 0; i < interior; ++i) {
      double ty = 2.0 * y[i];
      if (i > 0) ty -= y[i - 1];
      if (i + 1 < interior) ty -= y[i + 1];
      rho += y[i] * ty / h2;
    }
    x = std::move(y);
    if (it > 2 && std::abs(rho - rho_prev) <= 1e-14 * std::abs(rho)) return rho;
    rho_prev = rho;
  }
  return rho_prev;
}

double critical_speed(double m, double lambda1) {
  validate_exponent(m);
  if (!(lambda1 > 0)) throw invalid_parameter("critical_speed: lambda1 must be positive");
  return 1.0 / ((m - 1) * std::sqrt(lambda1));
}

namespace {

// First integral of -w'' = w^{1/m}/(m-1) with w'(L/2) = 0, w(L/2) = wmax:
//   w'(z)^2 = 2k (wmax^q - w^q),  k = m/((m-1)(m+1)),  q = (m+1)/m.
struct FirstIntegral {
  double m, k, q;
  explicit FirstIntegral(double m_)
      : m(m_), k(m_ / ((m_ - 1) * (m_ + 1))), q((m_ + 1) / m_) {}

  // Arclength in z from w' = 0 down to w = 0, as a function of wmax.
  // Substituting w = wmax s^{1/q} removes the w-dependence:
  //   half_length = wmax^{(m-1)/(2m)} / (q sqrt(2k)) * J,
  //   J = int_0^1 s^{1/q - 1} (1 - s)^{-1/2} ds.
  double half_length(double wmax, double j_const) const {
    return std::pow(wmax, (m - 1) / (2 * m)) / (q * std::sqrt(2 * k)) * j_const;
  }

  double j_constant() const {
    const double a = 1.0 / q - 1.0;  // in (-1/2, 0): integrable endpoint singularity
    return tanh_sinh(
        [&](double s, double dist) {
          // dist is the (stable) distance to the nearest endpoint.
          if (s <= 0.5) return std::pow(dist, a) / std::sqrt(1.0 - s);
          return std::pow(s, a) / std::sqrt(dist);
        },
        0.0, 1.0, 1e-13);
  }

  // z(w) = int_0^w dw' / sqrt(2k (wmax^q - w'^q)), regular for w < wmax.
  double z_of_w(double w, double wmax) const {
    if (w <= 0) return 0;
    const double wq = std::pow(wmax, q);
    return tanh_sinh(
        [&](double wp, double) {
          double gap = wq - std::pow(wp, q);
          if (gap <= 0) gap = std::numeric_limits<double>::min();
          return 1.0 / std::sqrt(2 * k * gap);
        },
        0.0, w, 1e-13);
  }
};

}  // namespace

SectionProfile shoot_profile(double length, double m, int n) {
  if (!(length > 0)) throw invalid_parameter("shoot_profile: length must be positive");
  validate_exponent(m);
  if (n < 3) throw invalid_parameter("shoot_profile: need at least 3 nodes");

  const SectionGrid grid = SectionGrid::make(length, n);
  const FirstIntegral fi(m);
  const double j_const = fi.j_constant();

  // half_length(wmax) = C wmax^{(m-1)/(2m)} is strictly increasing: bracket
  // around the closed-form inversion and bisect.
  const double p = (m - 1) / (2 * m);
  const double c0 = j_const / (fi.q * std::sqrt(2 * fi.k));
  double guess = std::pow(length / (2 * c0), 1.0 / p);
  double lo = guess * 0.5, hi = guess * 2.0;
  auto half_err = [&](double w) { return fi.half_length(w, j_const) - length / 2; };
  if (!(half_err(lo) < 0 && half_err(hi) > 0)) {
    throw oracle_failure("shoot_profile: half-length bracket failed at [" +
                         std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  const double wmax = bisect(half_err, lo, hi, guess * 1e-14);

  SectionProfile prof;
  prof.grid = grid;
  prof.m = m;
  prof.phi.assign(n, 0.0);

  // Tabulate the left half by inverting z(w); mirror for the right half.
  const double h = grid.h();
  for (int i = 1; i <= (n - 1) / 2; ++i) {
    const double zi = i * h;
    double w;
    if (2 * i == n - 1) {
      w = wmax;  // midpoint lands exactly on the turning value
    } else {
      w = bisect([&](double ww) { return fi.z_of_w(ww, wmax) - zi; }, 0.0, wmax,
                 wmax * 1e-14);
    }
    prof.phi[i] = std::pow(w, 1.0 / m);
    prof.phi[n - 1 - i] = prof.phi[i];
  }

  prof.lambda1 = analytic_lambda1(length);
  prof.cstar = critical_speed(m, prof.lambda1);
  prof.sup_phi = *std::max_element(prof.phi.begin(), prof.phi.end());
  return prof;
}

SectionProfile relax_profile(double length, double m, int n, double tol,
                             const std::optional<std::vector<double>>& init) {
  if (!(length > 0)) throw invalid_parameter("relax_profile: length must be positive");
  validate_exponent(m);
  if (n < 3) throw invalid_parameter("relax_profile: need at least 3 nodes");
  if (!(tol > 0)) throw invalid_parameter("relax_profile: tol must be positive");

  const SectionGrid grid = SectionGrid::make(length, n);
  const double h2 = grid.h() * grid.h();

  std::vector<double> v(n, 0.0);
  if (init) {
    if (static_cast<int>(init->size()) != n) {
      throw invalid_parameter("relax_profile: init size does not match grid");
    }
    v = *init;
    v.front() = 0;
    v.back() = 0;
    for (int i = 1; i + 1 < n; ++i) {
      if (!(v[i] > 0)) throw invalid_parameter("relax_profile: init must be interior-positive");
    }
  } else {
    for (int i = 1; i + 1 < n; ++i) v[i] = 0.1 * std::sin(kPi * grid.node(i) / length);
  }

  std::vector<double> w(n), next(n, 0.0);
  const double tau_cap = 400.0;
  double tau = 0;
  double rate = std::numeric_limits<double>::infinity();
  while (tau < tau_cap) {
    double vmax = 0;
    for (double x : v) vmax = std::max(vmax, x);
    const double diff = m * pow_m(std::max(vmax, 1e-300), m - 1);
    const double dtau = 0.45 / (2 * diff / h2 + 1.0 / (m - 1));
    pow_field(v.data(), w.data(), n, m);
    double change = 0;
    for (int i = 1; i + 1 < n; ++i) {
      next[i] = v[i] + dtau * ((w[i - 1] - 2 * w[i] + w[i + 1]) / h2 + v[i] / (m - 1));
      change = std::max(change, std::abs(next[i] - v[i]));
    }
    std::swap(v, next);
    tau += dtau;
    rate = change / dtau;
    if (rate < tol && tau > 1.0) break;
  }
  if (!(rate < tol)) {
    throw convergence_failure("relax_profile: no fixed point by tau=" +
                              std::to_string(tau_cap) +
                              ", residual rate=" + std::to_string(rate));
  }

  SectionProfile prof;
  prof.grid = grid;
  prof.m = m;
  prof.phi = std::move(v);
  prof.lambda1 = analytic_lambda1(length);
  prof.cstar = critical_speed(m, prof.lambda1);
  prof.sup_phi = *std::max_element(prof.phi.begin(), prof.phi.end());
  return prof;
}

SectionProfile dilate_profile(const SectionProfile& p, double lam) {
  if (!(lam >= 1)) throw invalid_parameter("dilate_profile: dilation factor must be >= 1");
  SectionProfile out;
  out.grid = SectionGrid::make(p.grid.length * lam, p.grid.n);
  out.m = p.m;
  // Dilated nodes map exactly onto the source nodes: z'_i / lam = z_i.
  const double scale = std::pow(lam, 2.0 / (p.m - 1));
  out.phi.resize(p.phi.size());
  for (std::size_t i = 0; i < p.phi.size(); ++i) out.phi[i] = scale * p.phi[i];
  out.lambda1 = analytic_lambda1(out.grid.length);
  out.cstar = critical_speed(out.m, out.lambda1);
  out.sup_phi = scale * p.sup_phi;
  return out;
}

CosineSubsolution cosine_subsolution(const SectionProfile& p, double lambda_param,
                                     double alpha, int ny) {
  if (!(lambda_param > 0 && lambda_param <= 1)) {
    throw invalid_parameter("cosine_subsolution: lambda must lie in (0, 1]");
  }
  if (!(alpha > 0)) throw invalid_parameter("cosine_subsolution: alpha must be positive");
  if (ny < 3) throw invalid_parameter("cosine_subsolution: need at least 3 y-nodes");

  CosineSubsolution s;
  s.zgrid = p.grid;
  s.m = p.m;
  s.lambda_param = lambda_param;
  s.alpha = alpha;
  s.ny = ny;
  s.values.assign(static_cast<std::size_t>(p.grid.n) * ny, 0.0);

  const double lhs = std::pow(lambda_param, (p.m - 1) / p.m) *
                     (1 + alpha * alpha * (p.m - 1) * pow_m(p.sup_phi, p.m - 1));
  s.admissible = lhs <= 1 + 1e-12;

  for (int j = 1; j + 1 < ny; ++j) {
    const double c = std::max(0.0, std::cos(alpha * s.y(j)));
    const double f = std::pow(lambda_param * c, 1.0 / p.m);
    for (int i = 1; i + 1 < p.grid.n; ++i) {
      s.values[static_cast<std::size_t>(i) * ny + j] = p.phi[i] * f;
    }
  }
  return s;
}

double relative_sup_difference(const SectionProfile& a, const SectionProfile& b) {
  if (!(a.grid == b.grid)) throw invalid_parameter("profiles live on different grids");
  double worst = 0;
  for (int i = 1; i + 1 < a.grid.n; ++i) {
    worst = std::max(worst, std::abs(a.phi[i] - b.phi[i]) / b.phi[i]);
  }
  return worst;
}

}  // namespace pmetube
