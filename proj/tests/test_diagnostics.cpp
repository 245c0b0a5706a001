#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "pmetube/diagnostics.hpp"

using namespace pmetube;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

struct Lab {
  SectionProfile prof = relax_profile(kPi, 2, 17, 1e-11);
  TubeGrid grid = TubeGrid::make(SectionGrid::make(kPi, 17), -8, 8, 161);

  TubeField profile_field(double factor, double tau) const {
    TubeField f = make_field(grid, 2, Variable::rescaled_v, tau);
    for (int i = 1; i + 1 < f.nz(); ++i) {
      for (int j = 1; j + 1 < f.ny(); ++j) f.at(i, j) = factor * prof.phi[i];
    }
    return f;
  }

  WaveProfile wave() const {
    WaveProfile w;
    w.section = prof.grid;
    w.m = 2;
    w.xi_min = -8;
    w.xi_max = 2;
    w.n_xi = 161;
    w.values.assign(static_cast<std::size_t>(prof.grid.n) * w.n_xi, 0.0);
    for (int i = 1; i + 1 < prof.grid.n; ++i) {
      for (int k = 0; k < w.n_xi; ++k) {
        const double xi = w.xi(k);
        w.values[static_cast<std::size_t>(i) * w.n_xi + k] =
            prof.phi[i] * std::clamp(-xi / 2.0, 0.0, 1.0);
      }
    }
    w.front_threshold = 1e-8 * prof.sup_phi;
    w.front = front_curve(w, w.front_threshold);
    w.xi0 = max_interior_front(w.front);
    w.normalized = true;
    return w;
  }
};
}  // namespace

TEST_CASE("relative_error_window") {
  Lab lab;
  SUBCASE("exact quotient gives zero error") {
    const ErrorSample s = relative_error_window(lab.profile_field(1.0, 4.0), lab.prof, 0.5);
    CHECK_FALSE(s.empty);
    CHECK(s.error == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(s.count > 0);
  }
  SUBCASE("constant quotient gives the constant") {
    const ErrorSample s = relative_error_window(lab.profile_field(0.75, 4.0), lab.prof, 0.5);
    CHECK(s.error == doctest::Approx(0.25).epsilon(1e-13));
  }
  SUBCASE("window smaller than a spacing is flagged empty") {
    const ErrorSample s = relative_error_window(lab.profile_field(1.0, 0.01), lab.prof, 0.5);
    CHECK(s.empty);
  }
}

TEST_CASE("outer_support_max") {
  Lab lab;
  TubeField f = make_field(lab.grid, 2, Variable::rescaled_v, 2.0);
  for (int i = 1; i + 1 < f.nz(); ++i) {
    for (int j = 0; j < f.ny(); ++j) {
      if (std::abs(f.grid.y(j)) <= 1.5) f.at(i, j) = lab.prof.phi[i];
    }
  }
  SUBCASE("compact support inside the window gives zero") {
    const OuterMax o = outer_support_max(f, 1.0, 1e-10 * lab.prof.sup_phi);
    CHECK(o.value == 0.0);
    CHECK(o.conclusive);
  }
  SUBCASE("support near the truncation end is inconclusive") {
    TubeField g = f;
    g.at(3, g.ny() - 2) = 0.1;
    const OuterMax o = outer_support_max(g, 1.0, 1e-10 * lab.prof.sup_phi);
    CHECK_FALSE(o.conclusive);
  }
}

TEST_CASE("exp_rate_fit on synthetic exponential data") {
  Lab lab;
  RunRecord run;
  run.profile = lab.prof;
  for (double tau = 1; tau <= 15; tau += 0.5) {
    TubeField f = make_field(lab.grid, 2, Variable::rescaled_v, tau);
    const double ratio = 1 - 0.3 * std::exp(-0.7 * tau);
    for (int i = 1; i + 1 < f.nz(); ++i) {
      for (int j = 0; j < f.ny(); ++j) f.at(i, j) = ratio * lab.prof.phi[i];
    }
    run.snapshots.push_back(std::move(f));
    run.snapshot_times.push_back(tau);
  }
  const FitResult fit = exp_rate_fit(run, lab.prof, 8, 1, 15);
  CHECK(fit.slope == doctest::Approx(-0.7).epsilon(1e-10));
  CHECK(fit.intercept == doctest::Approx(std::log(0.3)).epsilon(1e-9));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("identical series give bitwise-identical fits") {
    const FitResult again = exp_rate_fit(run, lab.prof, 8, 1, 15);
    CHECK(std::memcmp(&again.slope, &fit.slope, sizeof(double)) == 0);
    CHECK(std::memcmp(&again.intercept, &fit.intercept, sizeof(double)) == 0);
    CHECK(std::memcmp(&again.residual_sup, &fit.residual_sup, sizeof(double)) == 0);
    CHECK(std::memcmp(&again.r2, &fit.r2, sizeof(double)) == 0);
  }
  SUBCASE("gap underflow raises window_too_late") {
    RunRecord flat;
    flat.profile = lab.prof;
    TubeField f = lab.profile_field(1.0, 30.0);
    flat.snapshots.push_back(f);
    flat.snapshot_times.push_back(30.0);
    CHECK_THROWS_AS(exp_rate_fit(flat, lab.prof, 8, 29, 31), window_too_late);
  }
}

TEST_CASE("ordering_audit") {
  Lab lab;
  const WaveProfile wave = lab.wave();

  BarrierParams subp{BarrierKind::sub, 2.0, 1.0, 0.5, 0.0, 0.05};
  BarrierParams supp{BarrierKind::super, 2.0, 1.0, 0.9, 4.0, 0.0};
  const BarrierPath sub = integrate_barrier(subp, 12.0, 1e-3);
  const BarrierPath sup = integrate_barrier(supp, 12.0, 1e-3);

  SUBCASE("field equal to the sub barrier at tau = 0 has zero violations") {
    RunRecord run;
    run.profile = lab.prof;
    TubeField f = make_field(lab.grid, 2, Variable::rescaled_v, 0.0);
    for (int i = 1; i + 1 < f.nz(); ++i) {
      for (int j = 0; j < f.ny(); ++j) {
        f.at(i, j) = evaluate_barrier(sub, wave, 0.0, i, std::abs(f.grid.y(j)));
      }
    }
    run.snapshots.push_back(f);
    run.snapshot_times.push_back(0.0);
    const OrderingReport rep = ordering_audit(run, sub, sup, wave, AlignmentGrid{});
    CHECK(rep.sub_violation <= 1e-15);
    CHECK(rep.super_violation <= 1e-15);  // super dominates this field comfortably
    CHECK(rep.passed);
  }
  SUBCASE("super barrier with too-small support fails at tau = 0") {
    BarrierParams tight{BarrierKind::super, 2.0, 1.0, 0.9, -3.0, 0.0};
    const BarrierPath narrow = integrate_barrier(tight, 12.0, 1e-3);
    RunRecord run;
    run.profile = lab.prof;
    TubeField f = make_field(lab.grid, 2, Variable::rescaled_v, 0.0);
    for (int i = 1; i + 1 < f.nz(); ++i) {
      for (int j = 0; j < f.ny(); ++j) {
        if (std::abs(f.grid.y(j)) <= 1.0) f.at(i, j) = 0.5 * lab.prof.phi[i];
      }
    }
    run.snapshots.push_back(f);
    run.snapshot_times.push_back(0.0);
    const OrderingReport rep = ordering_audit(run, sub, narrow, wave, AlignmentGrid{});
    CHECK(rep.super_violation > 0.01);
    CHECK_FALSE(rep.passed);
  }
  SUBCASE("insufficient overlap raises range_failure") {
    RunRecord run;
    run.profile = lab.prof;
    TubeField f = make_field(lab.grid, 2, Variable::rescaled_v, 50.0);
    run.snapshots.push_back(f);
    run.snapshot_times.push_back(50.0);
    CHECK_THROWS_AS(ordering_audit(run, sub, sup, wave, AlignmentGrid{}), range_failure);
  }
}

TEST_CASE("flat_problem_checks") {
  SUBCASE("eps -> 0 is trivially at equilibrium") {
    const FlatChecksReport rep = flat_problem_checks(2.0, 1.0, 0.0, 1.0, 2.0, 101, 0, 2.0);
    CHECK(rep.concavity_ok);
    CHECK(rep.monotone_ok);
    CHECK(rep.rate_ok);
    CHECK(rep.steady_gap == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("reference configuration passes all three checks") {
    const FlatChecksReport rep = flat_problem_checks(2.0, 1.0, 0.1, 1.0, 2.0, 201, 0, 8.0);
    CHECK(rep.concavity_ok);
    CHECK(rep.monotone_ok);
    CHECK(rep.rate_ok);
    CHECK(rep.max_second_diff <= 1e-10);
    CHECK(rep.fit.slope < 0);
    CHECK(rep.fit.r2 >= 0.99);
    CHECK(rep.steady_gap > 0.01);  // the dome stays strictly below 1 at finite width
    CHECK(rep.steady_gap < 0.1);
  }
  SUBCASE("explicit dtau above the stable bound is rejected") {
    CHECK_THROWS_AS(flat_problem_checks(2.0, 1.0, 0.1, 1.0, 2.0, 201, 0.5, 2.0),
                    stability_violation);
  }
}

TEST_CASE("front_law_audit") {
  Lab lab;
  const WaveProfile wave = lab.wave();
  const double cstar = 1.0;

  auto synthetic_series = [&](auto gamma_of) {
    FrontSeries s;
    for (double tau = 0; tau <= 20; tau += 0.5) {
      FrontSample sample;
      sample.tau = tau;
      sample.gamma.assign(lab.prof.grid.n, empty_front());
      for (int i = 1; i + 1 < lab.prof.grid.n; ++i) {
        sample.gamma[i] = gamma_of(i, tau);
      }
      sample.any_empty_interior = false;
      double mx = -1e30;
      for (int i = 1; i + 1 < lab.prof.grid.n; ++i) mx = std::max(mx, sample.gamma[i]);
      sample.max_front = mx;
      s.samples.push_back(std::move(sample));
    }
    return s;
  };

  SUBCASE("exact law gives c_emp = 0") {
    const FrontSeries s = synthetic_series(
        [&](int i, double tau) { return wave.front[i] + cstar * tau; });
    const FrontLawReport rep = front_law_audit(s, cstar, wave, 5.0);
    CHECK(rep.conclusive);
    CHECK(rep.c_emp == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rep.non_drifting);
    CHECK(rep.passed);
  }
  SUBCASE("sqrt drift fails the non-drift test") {
    const FrontSeries s = synthetic_series(
        [&](int i, double tau) { return wave.front[i] + cstar * tau + 0.1 * std::sqrt(tau); });
    const FrontLawReport rep = front_law_audit(s, cstar, wave, 5.0);
    CHECK_FALSE(rep.non_drifting);
    CHECK_FALSE(rep.passed);
  }
  SUBCASE("bounded wobble passes") {
    const FrontSeries s = synthetic_series([&](int i, double tau) {
      return wave.front[i] + cstar * tau + 0.05 * std::sin(2.1 * tau + i);
    });
    const FrontLawReport rep = front_law_audit(s, cstar, wave, 5.0);
    CHECK(rep.conclusive);
    CHECK(rep.c_emp <= 0.06);
    CHECK(rep.non_drifting);
  }
}

TEST_CASE("inner_uniform_check") {
  Lab lab;
  RunRecord run;
  run.profile = lab.prof;
  for (double tau = 1; tau <= 10; tau += 1) {
    const double ratio = 1 - std::exp(-0.5 * tau);
    run.snapshots.push_back(lab.profile_field(ratio, tau));
    run.snapshot_times.push_back(tau);
  }
  SUBCASE("vacuous bound returns the first snapshot") {
    const InnerUniformResult r = inner_uniform_check(run, lab.prof, 1.0, 0.25);
    CHECK(r.achieved);
    CHECK(r.tau == 1.0);
  }
  SUBCASE("threshold crossing time matches the synthetic ratio") {
    const InnerUniformResult r = inner_uniform_check(run, lab.prof, 0.05, 0.25);
    CHECK(r.achieved);
    CHECK(r.tau == 6.0);  // first tau with exp(-tau/2) <= 0.05
    CHECK(r.ceiling_excess <= 1e-12);
  }
  SUBCASE("smaller eps needs more time") {
    const InnerUniformResult a = inner_uniform_check(run, lab.prof, 0.2, 0.25);
    const InnerUniformResult b = inner_uniform_check(run, lab.prof, 0.02, 0.25);
    CHECK(a.achieved);
    CHECK(b.achieved);
    CHECK(b.tau >= a.tau);
  }
  SUBCASE("unreachable eps reports the final gap") {
    const InnerUniformResult r = inner_uniform_check(run, lab.prof, 1e-4, 0.25);
    CHECK_FALSE(r.achieved);
    CHECK(r.final_gap == doctest::Approx(std::exp(-5.0)).epsilon(1e-9));
  }
}

TEST_CASE("concave_envelope_gap") {
  SUBCASE("concave data have zero gap") {
    std::vector<double> z{0, 1, 2, 3, 4};
    std::vector<double> v{0, 0.9, 1.2, 0.9, 0};
    CHECK(concave_envelope_gap(z, v) == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("a dent is measured") {
    std::vector<double> z{0, 1, 2};
    std::vector<double> v{1, 0.2, 1};
    CHECK(concave_envelope_gap(z, v) == doctest::Approx(0.8).epsilon(1e-14));
  }
}
