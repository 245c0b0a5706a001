// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// fails. Reference configuration: m = 2 on D = (0, pi), strip grid 64 x 1024
// over y in [-40, 40], admissible rescaling origin, run to tau = 20.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "pmetube/diagnostics.hpp"
#include "pmetube/io.hpp"
#include "pmetube/numerics.hpp"

using namespace pmetube;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

int failures = 0;

void line(int criterion, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL", criterion,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

RunRecord reference_run(double m, const SectionProfile& prof) {
  RunConfig cfg;
  cfg.grid = TubeGrid::make(SectionGrid::make(kPi, 64), -40, 40, 1024);
  cfg.m = m;
  cfg.datum.kind = DatumKind::phi_bump;
  cfg.datum.amplitude = 0.5;
  cfg.datum.width = 0.2;
  cfg.tau_end = 20;
  cfg.snapshot_dtau = 0.5;
  cfg.safety = 0.9;
  return run_evolution(cfg, prof);
}

}  // namespace

int main() {
  const auto wall0 = std::chrono::steady_clock::now();

  // Shared artifacts -----------------------------------------------------
  std::printf("building shared artifacts (profiles, runs, waves)...\n");
  const SectionProfile prof64 = relax_profile(kPi, 2, 64, 1e-10);
  const RunRecord run2 = reference_run(2.0, prof64);

  const SectionProfile prof64_m3 = relax_profile(kPi, 3, 64, 1e-10);
  const RunRecord run3 = reference_run(3.0, prof64_m3);

  WaveRelaxOptions wopts;
  wopts.tau_max = 60;
  const WaveProfile wave =
      normalize_wave(relax_wave(prof64, prof64.cstar, -12, 4, 321, 1e-3, wopts));

  const double thr_support = 1e-10 * prof64.sup_phi;
  const double thr_front = 1e-8 * prof64.sup_phi;
  const FrontSeries fronts2 = front_series_of(run2, thr_front);
  const FrontSeries fronts3 = front_series_of(run3, 1e-8 * prof64_m3.sup_phi);

  // 1. Speed formula ------------------------------------------------------
  {
    const SpeedEstimate s2 = measure_speed(fronts2, 10, 20);
    const SpeedEstimate s3 = measure_speed(fronts3, 10, 20);
    const double c2 = prof64.cstar, c3 = prof64_m3.cstar;
    const bool ok2 = std::abs(s2.slope - c2) <= 0.05 * c2;
    const bool ok3 = std::abs(s3.slope - c3) <= 0.07 * c3;
    line(1, "front speed matches 1/((m-1) sqrt(lambda1))", ok2 && ok3,
         "m=2: slope " + fmt(s2.slope) + " vs " + fmt(c2) + "; m=3: slope " +
             fmt(s3.slope) + " vs " + fmt(c3));
  }

  // 2. Stationary oracle equivalence ---------------------------------------
  {
    bool ok = true;
    std::string worst_case;
    double worst = 0;
    for (double m : {1.5, 2.0, 3.0}) {
      for (double L : {1.0, kPi}) {
        const double d = relative_sup_difference(relax_profile(L, m, 201, 1e-10),
                                                 shoot_profile(L, m, 201));
        if (d > worst) {
          worst = d;
          worst_case = "m=" + fmt(m) + ", L=" + fmt(L);
        }
        ok = ok && d < 1e-3;
      }
    }
    const double e1 = relative_sup_difference(relax_profile(kPi, 2, 101, 1e-11),
                                              shoot_profile(kPi, 2, 101));
    const double e2 = relative_sup_difference(relax_profile(kPi, 2, 201, 1e-11),
                                              shoot_profile(kPi, 2, 201));
    const double ratio = e1 / e2;
    const bool ratio_ok = ratio > 2.5 && ratio < 6.0;
    line(2, "relaxation matches the shooting oracle under refinement", ok && ratio_ok,
         "worst rel sup " + fmt(worst) + " at " + worst_case + "; doubling ratio " +
             fmt(ratio));
  }

  // 3. Scaling identity -----------------------------------------------------
  {
    const SectionProfile base = shoot_profile(kPi, 2, 201);
    const double d2 = relative_sup_difference(dilate_profile(base, 2.0),
                                              shoot_profile(2 * kPi, 2, 201));
    const double d125 = relative_sup_difference(dilate_profile(base, 1.25),
                                                shoot_profile(1.25 * kPi, 2, 201));
    line(3, "dilation identity Phi_L(z) = lam^{2/(m-1)} Phi(z/lam)",
         d2 < 1e-3 && d125 < 1e-3, "lam=2: " + fmt(d2) + ", lam=1.25: " + fmt(d125));
  }

  // 4. Inner relative error + sharpness --------------------------------------
  {
    ErrorSeries inner, sharp;
    for (const auto& f : run2.snapshots) {
      inner.samples.push_back(relative_error_window(f, prof64, 0.5 * prof64.cstar));
      sharp.samples.push_back(relative_error_window(f, prof64, prof64.cstar));
    }
    const double final_err = inner.samples.back().error;
    bool final_ok = !inner.samples.back().empty && final_err <= 0.05;

    // Burn-in: first tau where the windowed error decreases three samples in
    // a row; afterwards the error five units later must not exceed it.
    int burn = -1;
    for (std::size_t k = 0; k + 3 < inner.samples.size(); ++k) {
      if (inner.samples[k].empty) continue;
      if (inner.samples[k + 1].error < inner.samples[k].error &&
          inner.samples[k + 2].error < inner.samples[k + 1].error &&
          inner.samples[k + 3].error < inner.samples[k + 2].error) {
        burn = static_cast<int>(k);
        break;
      }
    }
    bool trend_ok = burn >= 0;
    for (std::size_t k = burn; trend_ok && k < inner.samples.size(); ++k) {
      const double tau5 = inner.samples[k].tau + 5;
      for (std::size_t j = k; j < inner.samples.size(); ++j) {
        if (std::abs(inner.samples[j].tau - tau5) < 1e-9) {
          trend_ok = inner.samples[j].error <= inner.samples[k].error * (1 + 1e-9);
          break;
        }
      }
    }
    double sharp_min = 1e30;
    for (const auto& s : sharp.samples) {
      if (!s.empty && s.tau >= 10) sharp_min = std::min(sharp_min, s.error);
    }
    const InnerUniformResult unif =
        inner_uniform_check(run2, prof64, 0.05, 0.5 * prof64.cstar);
    line(4, "inner relative error: small at c/2, pinned at c*",
         final_ok && trend_ok && sharp_min >= 0.5 && unif.achieved,
         "err(tau=20, c*/2) = " + fmt(final_err) + ", burn-in at tau " +
             fmt(burn >= 0 ? inner.samples[burn].tau : -1) + ", v >= 0.95 Phi from tau " +
             fmt(unif.achieved ? unif.tau : -1) + ", window at c* stays >= " +
             fmt(sharp_min));
  }

  // 5. Outer vanishing --------------------------------------------------------
  {
    double tau_c = -1;
    bool stays_zero = true;
    for (const auto& f : run2.snapshots) {
      const OuterMax o = outer_support_max(f, 1.5 * prof64.cstar, thr_support);
      if (!o.conclusive) {
        stays_zero = false;
        break;
      }
      if (o.value == 0.0) {
        if (tau_c < 0) tau_c = f.time;
      } else if (tau_c >= 0) {
        stays_zero = false;
      }
    }
    line(5, "outer region |y| >= 1.5 c* tau empty at node resolution",
         tau_c >= 0 && stays_zero, "tau_c = " + fmt(tau_c));
  }

  // 6. Free-boundary law -------------------------------------------------------
  {
    const FrontLawReport law = front_law_audit(fronts2, prof64.cstar, wave, 10.0);
    const bool ok = law.passed && law.ratio_gap <= 0.05;
    line(6, "front law: Gamma/tau -> c*, bounded non-drifting offset", ok,
         "ratio gap " + fmt(law.ratio_gap * 100) + "%, C_emp " + fmt(law.c_emp) +
             " (mid " + fmt(law.mid_max) + ", late " + fmt(law.late_max) +
             "), envelope gap " + fmt(law.concave_envelope_gap));
  }

  // 7. Barrier ODE exactness ----------------------------------------------------
  {
    BarrierParams sp{BarrierKind::super, 2.0, 1.0, 0.5, 0.0, 0.0};
    const BarrierPath path = integrate_barrier(sp, 10.0, 1e-3);
    double worst = 0;
    for (std::size_t k = 0; k < path.f.size(); ++k) {
      auto [fc, gc] = super_closed_form(0.5, 0.0, 1.0, 2.0, path.dtau * k);
      worst = std::max(worst, std::abs(path.f[k] - fc));
      worst = std::max(worst, std::abs(path.g[k] - gc));
    }
    const BarrierPath sup30 = integrate_barrier(sp, 30.0, 1e-3);
    const double sup_gap =
        std::abs(sup30.g.back() - 1.0 * 30.0 - sup30.predicted_shift);
    BarrierParams sb{BarrierKind::sub, 2.0, 1.0, 0.5, 0.0, 0.01};
    const BarrierPath sub30 = integrate_barrier(sb, 30.0, 1e-3);
    const double sub_gap =
        std::abs(sub30.g.back() - 1.0 * 30.0 - sub30.predicted_shift);
    line(7, "barrier system: RK4 vs logistic closed form, asymptotic shifts",
         worst <= 1e-8 && sup_gap <= 1e-3 && sub_gap <= 1e-3,
         "sup error " + fmt(worst) + "; shift gaps super " + fmt(sup_gap) + ", sub " +
             fmt(sub_gap) + " at tau=30");
  }

  // 8. Ordering audit -------------------------------------------------------------
  {
    BarrierParams subp{BarrierKind::sub, 2.0, prof64.cstar, 0.2, 0.5, 0.25};
    BarrierParams supp{BarrierKind::super, 2.0, prof64.cstar, 0.9, 4.0, 0.0};
    const BarrierPath sub = integrate_barrier(subp, 26.0, 1e-3);
    const BarrierPath sup = integrate_barrier(supp, 26.0, 1e-3);
    AlignmentGrid agrid;
    agrid.sub_offsets = {0, 1, 2, 3, 4, 6, 8};
    agrid.sup_offsets = {0, -1, -2, -4};
    const OrderingReport rep = ordering_audit(run2, sub, sup, wave, agrid);
    line(8, "barrier ordering on the half strip", rep.passed,
         "sub viol " + fmt(rep.sub_violation) + " @ T=" + fmt(rep.sub_offset) +
             ", super viol " + fmt(rep.super_violation) + " @ tau1=" +
             fmt(rep.sup_offset) + ", tol " + fmt(rep.tolerance));
  }

  // 9. Concavity and exponential rate ------------------------------------------------
  {
    const FlatChecksReport flat = flat_problem_checks(2.0, 1.0, 0.1, 1.0, 2.0, 201, 0, 8.0);
    const FitResult rate = exp_rate_fit(run2, prof64, 32, 4.0, 10.0);
    const FitResult rate_b = exp_rate_fit(run2, prof64, 21, 4.0, 10.0);
    const bool flat_ok = flat.concavity_ok && flat.monotone_ok && flat.rate_ok;
    const bool rate_ok = rate.slope < 0 && rate.r2 >= 0.99;
    const bool agree = std::abs(rate.slope - rate_b.slope) <=
                       0.2 * std::abs(rate.slope);
    line(9, "concavity kept, exponential approach to the stationary profile",
         flat_ok && rate_ok && agree,
         "max (f^m)_yy " + fmt(flat.max_second_diff) + ", flat rate " +
             fmt(flat.fit.slope) + " (R^2 " + fmt(flat.fit.r2) + "); centerline rate " +
             fmt(rate.slope) + " (R^2 " + fmt(rate.r2) + ")");
  }

  // 10. Wave invariants -----------------------------------------------------------------
  {
    double mono = -1e30, plateau = 0;
    for (int i = 1; i + 1 < wave.section.n; ++i) {
      for (int k = 0; k + 1 < wave.n_xi; ++k) {
        mono = std::max(mono, wave.at(i, k + 1) - wave.at(i, k));
      }
      plateau = std::max(plateau, std::abs(wave.at(i, 0) / prof64.phi[i] - 1));
    }
    bool support_ok = std::isfinite(wave.xi0) && std::abs(wave.xi0) <= wave.h_xi();
    for (int i = 1; i + 1 < wave.section.n && support_ok; ++i) {
      for (int k = 0; k < wave.n_xi; ++k) {
        if (wave.xi(k) >= wave.xi0 + wave.h_xi() && wave.at(i, k) > thr_front) {
          support_ok = false;
        }
      }
    }
    const SectionProfile prof33 = relax_profile(kPi, 2, 33, 1e-10);
    WaveRelaxOptions dopts;
    dopts.tau_max = 25;
    dopts.lock_to_grid = false;
    dopts.require_convergence = false;
    const WaveProfile slow =
        relax_wave(prof33, 0.8 * prof33.cstar, -10, 3, 261, 1e-9, dopts);
    const WaveProfile fast =
        relax_wave(prof33, 1.2 * prof33.cstar, -10, 3, 261, 1e-9, dopts);
    const WaveProfile crit = relax_wave(prof33, prof33.cstar, -10, 3, 261, 1e-9, dopts);
    const bool drift_ok = slow.drift_rate > 0 && fast.drift_rate < 0 &&
                          std::abs(crit.drift_rate) <=
                              0.25 * std::min(slow.drift_rate, -fast.drift_rate);
    line(10, "wave profile invariants and drift sign test",
         mono <= 1e-10 && plateau <= 0.01 && support_ok && drift_ok,
         "mono " + fmt(mono) + ", plateau " + fmt(plateau) + ", xi0 " + fmt(wave.xi0) +
             "; drift(0.8c*) " + fmt(slow.drift_rate) + ", drift(1.2c*) " +
             fmt(fast.drift_rate) + ", drift(c*) " + fmt(crit.drift_rate));
  }

  // 11. Stepper oracle --------------------------------------------------------------------
  {
    const double m = 2.0, C = 16.0 / 12.0;
    auto harness_error = [&](int ny) {
      TubeGrid g = TubeGrid::make(SectionGrid::make(1.0, 4), -10, 10, ny);
      TubeField u = make_field(g, m, Variable::physical_u, 1.0);
      for (int i = 0; i < u.nz(); ++i) {
        for (int j = 0; j < u.ny(); ++j) u.at(i, j) = barenblatt_1d(g.y(j), 1.0, m, C);
      }
      const StepOptions harness{true, false};
      const double hy = g.hy();
      const double dt = 0.3 * hy * hy / (2 * m * 4.0 / 3.0);
      long long clamps = 0;
      while (u.time < 2.0 - 1e-12) {
        u = step_pme(u, std::min(dt, 2.0 - u.time), harness, &clamps);
      }
      double err = 0;
      for (int j = 0; j < u.ny(); ++j) {
        const double y = g.y(j);
        if (std::abs(y) > 2.5) continue;
        err = std::max(err, std::abs(u.at(2, j) - barenblatt_1d(y, 2.0, m, C)));
      }
      // front location from the coarse row
      const auto fr = front_curve(u, 1e-10);
      const double interface = 4.0 * std::pow(2.0, 1.0 / (m + 1));
      return std::make_pair(err, std::abs(fr[2] - interface));
    };
    const auto [e1, f1] = harness_error(201);
    const auto [e2, f2] = harness_error(401);
    const double ratio = e1 / e2;
    // The simulated front trails the closed-form interface at O(hy); its
    // offset is reported for reference, the criterion is the interior ratio.
    line(11, "explicit stepper matches the closed-form source solution",
         ratio > 3.0 && ratio < 5.5 && e2 < 1e-3 && f2 < f1,
         "interior errors " + fmt(e1) + " -> " + fmt(e2) + " (ratio " + fmt(ratio) +
             "), front offsets " + fmt(f1) + " -> " + fmt(f2));
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  std::printf("%s: %d criterion(s) failed, wall %.1fs\n",
              failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED", failures, wall);
  return failures == 0 ? 0 : 1;
}
