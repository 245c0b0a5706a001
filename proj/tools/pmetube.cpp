// Command-line laboratory for porous-medium flow in a strip: stationary
// profiles, strip evolutions, traveling waves, barrier paths, and the
// verification audits, each persisting CSV/JSON artifacts with a manifest.
//
// Exit codes: 0 all requested checks passed, 1 a check failed,
// 2 parameter validation, 3 numerical failure, 4 I/O failure.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pmetube/diagnostics.hpp"
#include "pmetube/io.hpp"
#include "pmetube/numerics.hpp"

using namespace pmetube;
using nlohmann::json;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

struct CheckLine {
  std::string name;
  bool passed;
  std::string detail;
};

int report(std::vector<CheckLine>& checks) {
  bool all = true;
  for (const auto& c : checks) {
    std::printf("[%s] %s%s%s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                c.detail.empty() ? "" : ": ", c.detail.c_str());
    all = all && c.passed;
  }
  return all ? 0 : 1;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_manifest(const std::string& dir, const std::string& command, const json& config,
                    const std::vector<std::string>& files, double wall_seconds) {
  json artifacts = json::array();
  for (const auto& f : files) {
    artifacts.push_back({{"path", f}, {"hash", hash_string(hash_file(dir + "/" + f))}});
  }
  json j = {{"version", tool_version()},
            {"command", command},
            {"config", config},
            {"artifacts", artifacts},
            {"wall_seconds", wall_seconds}};
  std::ofstream out(dir + "/manifest.json");
  out << j.dump(2) << "\n";
}

int cmd_section(double L, double m, int n, double tol, double dilate, std::string out) {
  const auto t0 = std::chrono::steady_clock::now();
  const SectionProfile oracle = shoot_profile(L, m, n);
  const SectionProfile relaxed = relax_profile(L, m, n, tol);

  std::vector<CheckLine> checks;
  const double diff = relative_sup_difference(relaxed, oracle);
  checks.push_back({"stationary solvers agree (rel sup)", diff < 1e-3, fmt(diff)});

  const double lam_num = numeric_lambda1(relaxed.grid);
  const double lam_ana = analytic_lambda1(L);
  checks.push_back({"eigenvalue consistency",
                    std::abs(lam_num - lam_ana) < 1e-2 * lam_ana,
                    "numeric " + fmt(lam_num) + " vs analytic " + fmt(lam_ana)});

  double hopf = pow_m(relaxed.phi[1], m) / relaxed.grid.h();
  checks.push_back({"wall flux sign", hopf > 0, "one-sided (Phi^m)' = " + fmt(hopf)});

  if (dilate > 1) {
    const SectionProfile predicted = dilate_profile(oracle, dilate);
    const SectionProfile direct = shoot_profile(L * dilate, m, n);
    const double d = relative_sup_difference(predicted, direct);
    checks.push_back({"dilation scaling identity", d < 1e-3, fmt(d)});
  }

  if (!out.empty()) {
    write_profile(out, relaxed);
    write_profile(out, oracle, "profile_oracle");
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(out, "section",
                   {{"L", L}, {"m", m}, {"n", n}, {"tol", tol}, {"dilate", dilate}},
                   {"profile.csv", "profile.json", "profile_oracle.csv",
                    "profile_oracle.json"},
                   wall);
  }
  return report(checks);
}

int cmd_evolve(RunConfig cfg, bool export_csv) {
  const SectionProfile prof =
      relax_profile(cfg.grid.section.length, cfg.m, cfg.grid.section.n, 1e-10);
  const RunRecord rec = run_evolution(cfg, prof);
  std::printf("run complete: %lld steps, %zu snapshots, t0=%.6g, wall %.1fs\n",
              rec.steps, rec.snapshot_times.size(), rec.t0_used, rec.wall_seconds);
  if (export_csv && !cfg.out_dir.empty()) {
    for (std::size_t s = 0; s < rec.snapshots.size(); ++s) {
      char name[64];
      std::snprintf(name, sizeof name, "/snapshot_%04zu.csv", s);
      export_snapshot_csv(cfg.out_dir + name, rec.snapshots[s]);
    }
  }
  if (!cfg.out_dir.empty()) {
    std::printf("artifacts in %s\n", cfg.out_dir.c_str());
  }
  return 0;
}

int cmd_wave(double L, double m, int n, double c, bool auto_cstar, double xi_min,
             double xi_max, int n_xi, double tol, double tau_max, std::string out) {
  const auto t0 = std::chrono::steady_clock::now();
  const SectionProfile prof = relax_profile(L, m, n, 1e-10);
  const double speed = auto_cstar ? prof.cstar : c;
  WaveRelaxOptions opts;
  opts.tau_max = tau_max;
  const WaveProfile raw = relax_wave(prof, speed, xi_min, xi_max, n_xi, tol, opts);
  const WaveProfile wave = normalize_wave(raw);

  std::vector<CheckLine> checks;
  double mono = -1e30;
  for (int i = 1; i + 1 < n; ++i) {
    for (int k = 0; k + 1 < wave.n_xi; ++k) {
      mono = std::max(mono, wave.at(i, k + 1) - wave.at(i, k));
    }
  }
  checks.push_back({"monotone in xi", mono <= 1e-10, "max forward difference " + fmt(mono)});
  double plateau = 0;
  for (int i = 1; i + 1 < n; ++i) {
    plateau = std::max(plateau, std::abs(wave.at(i, 0) / prof.phi[i] - 1));
  }
  checks.push_back({"plateau within 1%", plateau <= 0.01, fmt(plateau)});
  checks.push_back({"front normalized", std::abs(wave.xi0) <= wave.h_xi(),
                    "sup front " + fmt(wave.xi0)});
  const WaveResidual res = wave_residual(wave);
  checks.push_back({"elliptic residual", res.sup <= 5 * (wave.h_xi() + tol),
                    "sup " + fmt(res.sup) + ", plateau " + fmt(res.plateau_sup)});

  if (!out.empty()) {
    write_wave(out, wave);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(out, "wave",
                   {{"L", L}, {"m", m}, {"n", n}, {"c", speed}, {"xi_min", xi_min},
                    {"xi_max", xi_max}, {"n_xi", n_xi}, {"tol", tol}},
                   {"wave.bin", "wave.json", "wave_front.csv"}, wall);
  }
  return report(checks);
}

int cmd_barriers(std::string kind, double m, double cstar, double f0, double g0,
                 double delta0, double tau_end, double dtau, std::string out) {
  const auto t0 = std::chrono::steady_clock::now();
  BarrierParams params;
  params.kind = kind == "sub" ? BarrierKind::sub : BarrierKind::super;
  params.m = m;
  params.cstar = cstar;
  params.f0 = f0;
  params.g0 = g0;
  params.delta0 = delta0;
  const BarrierPath path = integrate_barrier(params, tau_end, dtau);

  std::vector<CheckLine> checks;
  const double tail = path.g.back() - cstar * path.tau_end();
  const double tail_gap = std::abs(tail - path.predicted_shift);
  // The sub shift converges only like 2 c (m-1) delta0/(1+tau).
  const double expected_tail =
      params.kind == BarrierKind::sub
          ? 2 * cstar * (m - 1) * delta0 / (1 + path.tau_end()) + 1e-3
          : 1e-3;
  checks.push_back({"asymptotic shift", tail_gap <= expected_tail,
                    "g - c*tau = " + fmt(tail) + " vs " + fmt(path.predicted_shift)});
  if (params.kind == BarrierKind::sub) {
    checks.push_back({"amplitude ceiling", sub_ceiling_holds(path),
                      "f <= 1 - delta(tau)/(2(m-1))"});
  }
  if (!out.empty()) {
    write_barrier(out, path);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(out, "barriers",
                   {{"kind", kind}, {"m", m}, {"cstar", cstar}, {"f0", f0}, {"g0", g0},
                    {"delta0", delta0}, {"tau_end", tau_end}, {"dtau", dtau}},
                   {"barrier.csv", "barrier.json"}, wall);
  }
  return report(checks);
}

int cmd_verify(std::string run_dir, std::string wave_dir, double c_inner, double c_outer,
               double inner_target, std::string out) {
  const RunRecord run = read_run(run_dir);
  const SectionProfile& prof = run.profile;
  const double cstar = prof.cstar;

  WaveProfile wave;
  if (!wave_dir.empty()) {
    wave = read_wave(wave_dir);
  } else {
    WaveRelaxOptions wopts;
    wopts.tau_max = 60;
    wave = normalize_wave(relax_wave(prof, cstar, -12, 4, 321, 1e-3, wopts));
  }

  std::vector<CheckLine> checks;
  const double threshold = 1e-10 * prof.sup_phi;
  const FrontSeries fronts = front_series_of(run, 1e-8 * prof.sup_phi);
  const double tau_end = run.snapshot_times.back();

  // Speed of the free boundary.
  const SpeedEstimate speed = measure_speed(fronts, tau_end / 2, tau_end);
  checks.push_back({"front speed within 5% of c*",
                    std::abs(speed.slope - cstar) <= 0.05 * cstar,
                    "slope " + fmt(speed.slope) + " vs c* " + fmt(cstar)});

  // Inner relative error.
  ErrorSeries inner;
  for (const auto& f : run.snapshots) {
    inner.samples.push_back(relative_error_window(f, prof, c_inner * cstar));
  }
  const double final_err = inner.samples.back().error;
  checks.push_back({"inner relative error <= " + fmt(inner_target),
                    !inner.samples.back().empty && final_err <= inner_target,
                    "sup |v/Phi - 1| = " + fmt(final_err) + " at tau " + fmt(tau_end)});

  // Sharpness at c = c*.
  double sharp_min = 1e30;
  for (const auto& f : run.snapshots) {
    if (f.time < tau_end / 2) continue;
    const ErrorSample s = relative_error_window(f, prof, cstar);
    if (!s.empty) sharp_min = std::min(sharp_min, s.error);
  }
  checks.push_back({"error window at c* stays >= 0.5", sharp_min >= 0.5, fmt(sharp_min)});

  // Outer vanishing.
  bool outer_zero = true;
  double tau_c = -1;
  for (const auto& f : run.snapshots) {
    const OuterMax o = outer_support_max(f, c_outer * cstar, threshold);
    if (o.conclusive && o.value == 0.0) {
      if (tau_c < 0) tau_c = f.time;
    } else if (tau_c >= 0) {
      outer_zero = false;
    }
  }
  checks.push_back({"outer region exactly empty past tau_c", outer_zero && tau_c >= 0,
                    "tau_c = " + fmt(tau_c)});

  // Free-boundary law.
  const FrontLawReport law = front_law_audit(fronts, cstar, wave, tau_end / 2);
  checks.push_back({"front law: bounded, non-drifting offset",
                    law.passed && law.ratio_gap <= 0.05,
                    "C_emp " + fmt(law.c_emp) + ", max front/tau gap " +
                        fmt(law.ratio_gap * 100) + "%"});

  // Exponential rate at the centerline.
  const FitResult rate = exp_rate_fit(run, prof, prof.grid.n / 2,
                                      std::max(2.0, tau_end / 5),
                                      std::max(4.0, tau_end / 2));
  checks.push_back({"centerline exponential rate", rate.slope < 0 && rate.r2 >= 0.99,
                    "slope " + fmt(rate.slope) + ", R^2 " + fmt(rate.r2)});

  // Barrier ordering.
  BarrierParams subp{BarrierKind::sub, run.config.m, cstar, 0.2, 0.5, 0.25};
  BarrierParams supp{BarrierKind::super, run.config.m, cstar, 0.9, 4.0, 0.0};
  const BarrierPath sub = integrate_barrier(subp, tau_end + 6, 1e-3);
  const BarrierPath sup = integrate_barrier(supp, tau_end + 6, 1e-3);
  AlignmentGrid agrid;
  agrid.sub_offsets = {0, 1, 2, 3, 4, 6, 8};
  agrid.sup_offsets = {0, -1, -2, -4};
  const OrderingReport ord = ordering_audit(run, sub, sup, wave, agrid);
  checks.push_back({"barrier ordering", ord.passed,
                    "sub viol " + fmt(ord.sub_violation) + ", super viol " +
                        fmt(ord.super_violation) + " (tol " + fmt(ord.tolerance) + ")"});

  // Flat-problem checks.
  const FlatChecksReport flat =
      flat_problem_checks(2.0, pow_m(prof.sup_phi, run.config.m - 1), 0.1, 1.0,
                          run.config.m, 201, 0, 8.0);
  checks.push_back({"flat problem: concavity/monotonicity/rate",
                    flat.concavity_ok && flat.monotone_ok && flat.rate_ok,
                    "max (f^m)_yy " + fmt(flat.max_second_diff) + ", rate " +
                        fmt(flat.fit.slope)});

  if (!out.empty()) {
    ensure_directory(out);
    write_error_series(out + "/inner_error.csv", inner);
    write_front_series(out + "/fronts.csv", fronts, prof.grid);
    json j = {{"speed", {{"slope", speed.slope}, {"intercept", speed.intercept}}},
              {"front_law",
               {{"c_emp", law.c_emp},
                {"ratio_gap", law.ratio_gap},
                {"non_drifting", law.non_drifting},
                {"concave_envelope_gap", law.concave_envelope_gap}}},
              {"rate", {{"slope", rate.slope}, {"r2", rate.r2}}},
              {"ordering",
               {{"sub_violation", ord.sub_violation},
                {"super_violation", ord.super_violation},
                {"sub_offset", ord.sub_offset},
                {"sup_offset", ord.sup_offset}}},
              {"flat",
               {{"max_second_diff", flat.max_second_diff},
                {"rate_slope", flat.fit.slope},
                {"rate_r2", flat.fit.r2}}}};
    std::ofstream jo(out + "/verify.json");
    jo << j.dump(2) << "\n";
  }
  return report(checks);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"porous-medium flow in a strip: profiles, waves, barriers, audits"};
  app.require_subcommand(1);

  // section ------------------------------------------------------------
  auto* sec = app.add_subcommand("section", "stationary profile and eigenvalue checks");
  double L = kPi, m = 2, tol = 1e-10, dilate = 0;
  int n = 201;
  std::string out;
  sec->add_option("--L", L, "section length");
  sec->add_option("--m", m, "diffusion exponent (> 1)");
  sec->add_option("--n", n, "nodes across the section");
  sec->add_option("--tol", tol, "relaxation tolerance");
  sec->add_option("--dilate", dilate, "also check the dilation identity at this factor");
  sec->add_option("--out", out, "artifact directory");

  // evolve -------------------------------------------------------------
  auto* evo = app.add_subcommand("evolve", "integrate the rescaled equation on the strip");
  std::string config_path, datum = "phi-bump", frame = "lab", csv_path;
  double eL = kPi, em = 2, ymin = -40, ymax = 40, t0 = 0, tau_end = 20, snap = 0.5,
         safety = 0.9, amp = 0.5, width = 1.0, sep = 4.0, center = 0.0, speed = 0.0;
  int enz = 64, eny = 1024;
  std::string eout;
  evo->add_option("--config", config_path, "JSON config (flags override)");
  evo->add_option("--L", eL, "section length");
  evo->add_option("--m", em, "diffusion exponent");
  evo->add_option("--n", enz, "nodes across the section");
  evo->add_option("--ymin", ymin, "lower y truncation");
  evo->add_option("--ymax", ymax, "upper y truncation");
  evo->add_option("--ny", eny, "nodes along the strip");
  evo->add_option("--t0", t0, "rescaling origin (<= 0 chooses the admissible value)");
  evo->add_option("--datum", datum, "phi-bump | plateau | two-bump | csv");
  evo->add_option("--csv", csv_path, "field CSV for --datum csv");
  evo->add_option("--amp", amp, "datum amplitude");
  evo->add_option("--width", width, "datum half-width");
  evo->add_option("--sep", sep, "two-bump separation");
  evo->add_option("--center", center, "datum center");
  evo->add_option("--frame", frame, "lab | comoving");
  evo->add_option("--speed", speed, "comoving speed");
  evo->add_option("--tau-end", tau_end, "final rescaled time");
  evo->add_option("--snap", snap, "snapshot cadence");
  evo->add_option("--safety", safety, "CFL safety factor");
  evo->add_option("--out", eout, "artifact directory");
  bool export_csv = false;
  evo->add_flag("--export-csv", export_csv, "also write z,y,value CSV per snapshot");

  // wave ---------------------------------------------------------------
  auto* wav = app.add_subcommand("wave", "relax and normalize a traveling-wave profile");
  double wL = kPi, wm = 2, wc = 1.0, xi_min = -12, xi_max = 4, wtol = 1e-3, wtau = 60;
  int wn = 64, nxi = 321;
  bool auto_cstar = false;
  std::string wout;
  wav->add_option("--L", wL, "section length");
  wav->add_option("--m", wm, "diffusion exponent");
  wav->add_option("--n", wn, "nodes across the section");
  wav->add_option("--c", wc, "comoving speed");
  wav->add_flag("--auto-cstar", auto_cstar, "use c* = 1/((m-1) sqrt(lambda1))");
  wav->add_option("--xi-min", xi_min, "window lower end");
  wav->add_option("--xi-max", xi_max, "window upper end");
  wav->add_option("--nxi", nxi, "window nodes");
  wav->add_option("--tol", wtol, "shape-change tolerance per unit pseudo-time");
  wav->add_option("--tau-max", wtau, "relaxation horizon");
  wav->add_option("--out", wout, "artifact directory");

  // barriers -----------------------------------------------------------
  auto* bar = app.add_subcommand("barriers", "integrate the barrier amplitude/shift system");
  std::string kind = "super";
  double bm = 2, bc = 1.0, f0 = 0.5, g0 = 0, delta0 = 0.1, btau = 30, bdtau = 1e-3;
  std::string bout;
  bar->add_option("--kind", kind, "sub | super")->check(CLI::IsMember({"sub", "super"}));
  bar->add_option("--m", bm, "diffusion exponent");
  bar->add_option("--cstar", bc, "critical speed");
  bar->add_option("--f0", f0, "initial amplitude in (0,1)");
  bar->add_option("--g0", g0, "initial shift");
  bar->add_option("--delta0", delta0, "sub-barrier drag coefficient");
  bar->add_option("--tau-end", btau, "integration horizon");
  bar->add_option("--dtau", bdtau, "step size");
  bar->add_option("--out", bout, "artifact directory");

  // verify -------------------------------------------------------------
  auto* ver = app.add_subcommand("verify", "run the audit suite against a stored run");
  std::string run_dir, wave_dir, vout;
  double c_inner = 0.5, c_outer = 1.5, inner_target = 0.05;
  ver->add_option("--run", run_dir, "run directory (from evolve --out)")->required();
  ver->add_option("--wave", wave_dir, "wave directory (from wave --out)");
  ver->add_option("--c-inner", c_inner, "inner window speed as a fraction of c*");
  ver->add_option("--c-outer", c_outer, "outer window speed as a fraction of c*");
  ver->add_option("--inner-target", inner_target, "inner relative-error target");
  ver->add_option("--out", vout, "report directory");
  bool run_all = false;
  ver->add_flag("--all", run_all, "run every audit (the default)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sec) return cmd_section(L, m, n, tol, dilate, out);
    if (*evo) {
      RunConfig cfg;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw io_failure("cannot read config " + config_path);
        std::ostringstream ss;
        ss << in.rdbuf();
        cfg = run_config_from_json(ss.str());
      } else {
        cfg.grid = TubeGrid::make(SectionGrid::make(eL, enz), ymin, ymax, eny);
      }
      if (!config_path.empty()) {
        // Flags override file values.
        double fl = cfg.grid.section.length;
        int fn = cfg.grid.section.n, fny = cfg.grid.ny;
        double fymin = cfg.grid.y_min, fymax = cfg.grid.y_max;
        if (evo->count("--L")) fl = eL;
        if (evo->count("--n")) fn = enz;
        if (evo->count("--ymin")) fymin = ymin;
        if (evo->count("--ymax")) fymax = ymax;
        if (evo->count("--ny")) fny = eny;
        cfg.grid = TubeGrid::make(SectionGrid::make(fl, fn), fymin, fymax, fny);
      }
      if (evo->count("--m") || config_path.empty()) cfg.m = em;
      if (evo->count("--t0") || config_path.empty()) cfg.t0 = t0;
      if (evo->count("--tau-end") || config_path.empty()) cfg.tau_end = tau_end;
      if (evo->count("--snap") || config_path.empty()) cfg.snapshot_dtau = snap;
      if (evo->count("--safety") || config_path.empty()) cfg.safety = safety;
      if (evo->count("--datum") || config_path.empty()) {
        if (datum == "phi-bump") cfg.datum.kind = DatumKind::phi_bump;
        else if (datum == "plateau") cfg.datum.kind = DatumKind::plateau;
        else if (datum == "two-bump") cfg.datum.kind = DatumKind::two_bump;
        else if (datum == "csv") cfg.datum.kind = DatumKind::csv;
        else throw invalid_parameter("unknown datum kind: " + datum);
      }
      if (evo->count("--amp") || config_path.empty()) cfg.datum.amplitude = amp;
      if (evo->count("--width") || config_path.empty()) cfg.datum.width = width;
      if (evo->count("--sep") || config_path.empty()) cfg.datum.separation = sep;
      if (evo->count("--center") || config_path.empty()) cfg.datum.center = center;
      if (evo->count("--csv")) cfg.datum.csv_path = csv_path;
      if (evo->count("--frame") || config_path.empty()) {
        cfg.frame = frame == "comoving" ? Frame::comoving : Frame::lab;
      }
      if (evo->count("--speed") || config_path.empty()) cfg.frame_speed = speed;
      cfg.out_dir = eout;
      return cmd_evolve(cfg, export_csv);
    }
    if (*wav) return cmd_wave(wL, wm, wn, wc, auto_cstar, xi_min, xi_max, nxi, wtol,
                              wtau, wout);
    if (*bar) return cmd_barriers(kind, bm, bc, f0, g0, delta0, btau, bdtau, bout);
    if (*ver) return cmd_verify(run_dir, wave_dir, c_inner, c_outer, inner_target, vout);
  } catch (const invalid_parameter& e) {
    std::fprintf(stderr, "parameter error: %s\n", e.what());
    return 2;
  } catch (const degenerate_exponent& e) {
    std::fprintf(stderr, "parameter error: %s\n", e.what());
    return 2;
  } catch (const io_failure& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
  return 0;
}
