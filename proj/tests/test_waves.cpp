#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pmetube/dynamics.hpp"
#include "pmetube/section.hpp"
#include "pmetube/waves.hpp"

using namespace pmetube;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

struct WaveFixture {
  SectionProfile prof = relax_profile(kPi, 2, 33, 1e-12);
  WaveProfile wave;
  WaveFixture() {
    WaveRelaxOptions opts;
    opts.tau_max = 60;
    wave = relax_wave(prof, prof.cstar, -10, 3, 131, 1e-3, opts);
  }
};

WaveProfile synthetic_ramp(const SectionProfile& prof, double xi_min, double xi_max,
                           int n_xi, double front_at) {
  WaveProfile w;
  w.section = prof.grid;
  w.m = prof.m;
  w.xi_min = xi_min;
  w.xi_max = xi_max;
  w.n_xi = n_xi;
  w.values.assign(static_cast<std::size_t>(prof.grid.n) * n_xi, 0.0);
  for (int i = 1; i + 1 < prof.grid.n; ++i) {
    for (int k = 0; k < n_xi; ++k) {
      const double xi = w.xi(k);
      w.values[static_cast<std::size_t>(i) * n_xi + k] =
          prof.phi[i] * std::clamp((front_at - xi) / 2.0, 0.0, 1.0);
    }
  }
  w.front_threshold = 1e-8 * prof.sup_phi;
  w.front = front_curve(w, w.front_threshold);
  w.xi0 = max_interior_front(w.front);
  return w;
}
}  // namespace

TEST_CASE("front_curve") {
  SUBCASE("step datum crosses at the step within one spacing") {
    const int nrows = 3, ncols = 101;
    std::vector<double> vals(static_cast<std::size_t>(nrows) * ncols, 0.0);
    const double ymin = 0, hy = 0.1;  // grid contains y = 3.0 at k = 30
    for (int i = 0; i < nrows; ++i) {
      for (int k = 0; k <= 30; ++k) vals[static_cast<std::size_t>(i) * ncols + k] = 1.0;
    }
    auto fr = front_curve(vals.data(), nrows, ncols, ymin, hy, 1e-6);
    for (int i = 0; i < nrows; ++i) {
      CHECK(fr[i] >= 3.0);
      CHECK(fr[i] <= 3.0 + hy);
    }
  }
  SUBCASE("all-zero field has empty rows") {
    std::vector<double> vals(300, 0.0);
    auto fr = front_curve(vals.data(), 3, 100, 0, 0.1, 1e-6);
    for (double f : fr) CHECK(is_empty_front(f));
  }
  SUBCASE("source-solution slice front within one spacing of the interface") {
    const double m = 2, C = 16.0 / 12.0, t = 1.7;
    const int ncols = 641;
    std::vector<double> vals(ncols);
    const double ymin = -8, hy = 16.0 / (ncols - 1);
    for (int k = 0; k < ncols; ++k) vals[k] = barenblatt_1d(ymin + k * hy, t, m, C);
    auto fr = front_curve(vals.data(), 1, ncols, ymin, hy, 1e-9);
    const double interface = 4.0 * std::pow(t, 1.0 / (m + 1));
    CHECK(std::abs(fr[0] - interface) <= hy);
  }
  SUBCASE("threshold must be positive") {
    std::vector<double> vals(10, 1.0);
    CHECK_THROWS_AS(front_curve(vals.data(), 1, 10, 0, 0.1, 0.0), invalid_parameter);
  }
}

TEST_CASE("relaxed wave at the critical speed") {
  static const WaveFixture fx;  // one relaxation shared by the checks below
  const WaveProfile& w = fx.wave;
  const SectionProfile& prof = fx.prof;
  const int nz = prof.grid.n;

  SUBCASE("monotone nonincreasing in xi") {
    for (int i = 1; i + 1 < nz; ++i) {
      for (int k = 0; k + 1 < w.n_xi; ++k) {
        CHECK(w.at(i, k + 1) - w.at(i, k) <= 1e-10);
      }
    }
  }
  SUBCASE("plateau within 1% of the stationary profile") {
    for (int i = 1; i + 1 < nz; ++i) {
      CHECK(std::abs(w.at(i, 0) / prof.phi[i] - 1) <= 0.01);
      CHECK(std::abs(w.value_at_xi(i, w.xi_min) / prof.phi[i] - 1) <= 0.01);
    }
  }
  SUBCASE("compact right support with a finite front on every interior row") {
    for (int i = 1; i + 1 < nz; ++i) CHECK_FALSE(is_empty_front(w.front[i]));
    CHECK(std::isfinite(w.xi0));
    for (int i = 1; i + 1 < nz; ++i) {
      for (int k = 0; k < w.n_xi; ++k) {
        if (w.xi(k) >= w.xi0 + w.h_xi()) CHECK(w.at(i, k) <= w.front_threshold);
      }
    }
  }
  SUBCASE("normalization puts the front at zero within one spacing") {
    const WaveProfile n = normalize_wave(w);
    CHECK(n.normalized);
    CHECK(std::abs(max_interior_front(n.front)) <= n.h_xi());
    CHECK(std::abs(n.xi0) <= n.h_xi());
    const WaveProfile again = normalize_wave(n);
    for (std::size_t k = 0; k < n.values.size(); ++k) {
      CHECK(again.values[k] == n.values[k]);
    }
  }
  SUBCASE("support bound is stable under window enlargement") {
    WaveRelaxOptions opts;
    opts.tau_max = 60;
    const WaveProfile larger = relax_wave(prof, prof.cstar, -11, 4, 151, 1e-3, opts);
    CHECK(std::abs(max_interior_front(larger.front) - max_interior_front(w.front)) <=
          2 * w.h_xi());
  }
  SUBCASE("elliptic residual small away from the front") {
    const WaveResidual r = wave_residual(w);
    CHECK(r.plateau_sup <= 5e-3);
    CHECK(r.sup <= 5 * (w.h_xi() + 1e-3));
  }
  SUBCASE("reflection is an involution with mirrored front") {
    const WaveProfile r = reflect_wave(w);
    CHECK(r.speed == -w.speed);
    for (int i = 1; i + 1 < nz; ++i) {
      CHECK(r.front[i] == doctest::Approx(-w.front[i]).epsilon(1e-14));
      for (int k = 0; k + 1 < w.n_xi; ++k) {
        CHECK(r.at(i, k + 1) - r.at(i, k) >= -1e-10);  // nondecreasing
      }
    }
    const WaveProfile rr = reflect_wave(r);
    for (std::size_t k = 0; k < w.values.size(); ++k) CHECK(rr.values[k] == w.values[k]);
    const WaveResidual res_f = wave_residual(w);
    const WaveResidual res_r = wave_residual(r);
    CHECK(res_r.sup == doctest::Approx(res_f.sup).epsilon(1e-12));
  }
}

TEST_CASE("normalize_wave is shift-equivariant and guards degenerate rows") {
  const SectionProfile prof = relax_profile(kPi, 2, 17, 1e-10);
  const WaveProfile base = synthetic_ramp(prof, -10, 3, 131, -2.0);

  SUBCASE("shift equivariance") {
    WaveProfile shifted = base;
    const int s = 7;  // move the profile 7 nodes toward +xi
    for (int i = 0; i < prof.grid.n; ++i) {
      for (int k = shifted.n_xi - 1; k >= 0; --k) {
        shifted.at(i, k) = (k - s >= 0) ? base.at(i, k - s) : base.at(i, 0);
      }
    }
    shifted.front = front_curve(shifted, shifted.front_threshold);
    shifted.xi0 = max_interior_front(shifted.front);
    const WaveProfile na = normalize_wave(base);
    const WaveProfile nb = normalize_wave(shifted);
    for (int i = 1; i + 1 < prof.grid.n; ++i) {
      for (int k = 5; k + 5 < base.n_xi; ++k) {
        CHECK(na.at(i, k) == doctest::Approx(nb.at(i, k)).epsilon(1e-14));
      }
    }
  }
  SUBCASE("empty interior row is rejected") {
    WaveProfile broken = base;
    for (int k = 0; k < broken.n_xi; ++k) broken.at(2, k) = 0;
    broken.front = front_curve(broken, broken.front_threshold);
    CHECK_THROWS_AS(normalize_wave(broken), degenerate_profile);
  }
}

TEST_CASE("drift sign selects the critical speed") {
  const SectionProfile prof = relax_profile(kPi, 2, 33, 1e-12);
  // Free-running drift at fixed speed: no speed lock, no convergence demand.
  WaveRelaxOptions opts;
  opts.tau_max = 25;
  opts.lock_to_grid = false;
  opts.require_convergence = false;
  const double cstar = prof.cstar;
  const WaveProfile slow = relax_wave(prof, 0.8 * cstar, -10, 3, 261, 1e-9, opts);
  const WaveProfile fast = relax_wave(prof, 1.2 * cstar, -10, 3, 261, 1e-9, opts);
  const WaveProfile crit = relax_wave(prof, cstar, -10, 3, 261, 1e-9, opts);
  CHECK(slow.drift_rate > 0.05);
  CHECK(fast.drift_rate < -0.05);
  CHECK(std::abs(crit.drift_rate) <=
        0.25 * std::min(slow.drift_rate, -fast.drift_rate));
}

TEST_CASE("measure_speed") {
  SUBCASE("exact line recovered") {
    FrontSeries s;
    for (int k = 0; k < 21; ++k) {
      FrontSample f;
      f.tau = 0.5 * k;
      f.max_front = 2 * f.tau + 1;
      f.any_empty_interior = false;
      s.samples.push_back(f);
    }
    const SpeedEstimate e = measure_speed(s, 0, 10);
    CHECK(e.slope == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(e.intercept == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.residual_sup <= 1e-12);
  }
  SUBCASE("slope approaches the drift speed as the window grows") {
    FrontSeries s;
    for (int k = 1; k <= 400; ++k) {
      FrontSample f;
      f.tau = 0.1 * k;
      f.max_front = 1.0 * f.tau + std::sin(f.tau) / f.tau;
      f.any_empty_interior = false;
      s.samples.push_back(f);
    }
    const double e_small = std::abs(measure_speed(s, 1, 8).slope - 1.0);
    const double e_large = std::abs(measure_speed(s, 20, 40).slope - 1.0);
    CHECK(e_large < e_small);
    CHECK(e_large < 5e-3);
  }
  SUBCASE("insufficient samples throw") {
    FrontSeries s;
    for (int k = 0; k < 5; ++k) {
      FrontSample f;
      f.tau = k;
      f.max_front = k;
      f.any_empty_interior = false;
      s.samples.push_back(f);
    }
    CHECK_THROWS_AS(measure_speed(s, 0, 10), estimation_failure);
  }
  SUBCASE("empty fronts in the window throw") {
    FrontSeries s;
    for (int k = 0; k < 15; ++k) {
      FrontSample f;
      f.tau = k;
      f.max_front = k;
      f.any_empty_interior = (k == 7);
      s.samples.push_back(f);
    }
    CHECK_THROWS_AS(measure_speed(s, 0, 14), estimation_failure);
  }
}

TEST_CASE("relax_wave window validation") {
  const SectionProfile prof = relax_profile(kPi, 2, 17, 1e-10);
  CHECK_THROWS_AS(relax_wave(prof, 1.0, 2, 5, 64, 1e-4), invalid_parameter);
  CHECK_THROWS_AS(relax_wave(prof, -1.0, -10, 3, 64, 1e-4), invalid_parameter);
  CHECK_THROWS_AS(relax_wave(prof, 1.0, -10, 3, 64, 0.0), invalid_parameter);
}
