#include "pmetube/waves.hpp"

#include <algorithm>
#include <cmath>

#include "pmetube/numerics.hpp"

namespace pmetube {

double WaveProfile::value_at_xi(int i, double x) const {
  if (x <= xi_min) return at(i, 0);
  if (x >= xi_max) return 0;
  const double s = (x - xi_min) / h_xi();
  const int k = std::min(static_cast<int>(s), n_xi - 2);
  const double frac = s - k;
  return at(i, k) * (1 - frac) + at(i, k + 1) * frac;
}

std::vector<double> front_curve(const double* values, int nrows, int ncols, double ymin,
                                double hy, double threshold) {
  if (!(threshold > 0)) throw invalid_parameter("front_curve: threshold must be positive");
  std::vector<double> front(nrows, empty_front());
  for (int i = 0; i < nrows; ++i) {
    const double* vi = values + static_cast<std::size_t>(i) * ncols;
    int j = -1;
    for (int k = ncols - 1; k >= 0; --k) {
      if (vi[k] > threshold) {
        j = k;
        break;
      }
    }
    if (j < 0) continue;
    double pos = ymin + j * hy;
    if (j + 1 < ncols) {
      const double drop = vi[j] - vi[j + 1];
      if (drop > 0) pos += hy * std::min(1.0, (vi[j] - threshold) / drop);
    }
    front[i] = pos;
  }
  return front;
}

std::vector<double> front_curve(const TubeField& field, double threshold) {
  return front_curve(field.values.data(), field.nz(), field.ny(), field.grid.y_min,
                     field.grid.hy(), threshold);
}

std::vector<double> front_curve(const WaveProfile& wave, double threshold) {
  return front_curve(wave.values.data(), wave.section.n, wave.n_xi, wave.xi_min,
                     wave.h_xi(), threshold);
}

double max_interior_front(const std::vector<double>& front) {
  double mx = empty_front();
  for (std::size_t i = 1; i + 1 < front.size(); ++i) {
    if (is_empty_front(front[i])) continue;
    if (is_empty_front(mx) || front[i] > mx) mx = front[i];
  }
  return mx;
}

namespace {

// Shift a row-major field left (k > 0) or right (k < 0) along xi. Exposed
// columns are filled by copying the adjacent surviving column on the plateau
// side and with zero on the vacuum side.
void shift_xi(std::vector<double>& values, int nrows, int ncols, int k) {
  if (k == 0) return;
  for (int i = 0; i < nrows; ++i) {
    double* vi = values.data() + static_cast<std::size_t>(i) * ncols;
    if (k > 0) {
      for (int j = 0; j + k < ncols; ++j) vi[j] = vi[j + k];
      for (int j = ncols - k; j < ncols; ++j) vi[j] = 0;
    } else {
      const int s = -k;
      for (int j = ncols - 1; j >= s; --j) vi[j] = vi[j - s];
      for (int j = 0; j < s; ++j) vi[j] = vi[s];
    }
  }
}

}  // namespace

WaveProfile relax_wave(const SectionProfile& profile, double c, double xi_min,
                       double xi_max, int n_xi, double tol, const WaveRelaxOptions& opts) {
  if (!(c > 0)) throw invalid_parameter("relax_wave: speed must be positive");
  if (!(xi_min < 0 && xi_max > 0)) {
    throw invalid_parameter("relax_wave: window must contain xi = 0 strictly");
  }
  if (n_xi < 16) throw invalid_parameter("relax_wave: window too coarse");
  if (!(tol > 0)) throw invalid_parameter("relax_wave: tol must be positive");

  const int nz = profile.grid.n;
  const double h = (xi_max - xi_min) / (n_xi - 1);
  const double threshold = opts.threshold_rel * profile.sup_phi;

  TubeGrid grid = TubeGrid::make(profile.grid, xi_min, xi_max, n_xi);
  TubeField f = make_field(grid, profile.m, Variable::rescaled_v, 0, Frame::comoving, c);

  // Monotone ramp from the plateau down to a front at the station xi = 0.
  const double ramp_width = std::min(2.0, -xi_min / 2);
  for (int i = 1; i + 1 < nz; ++i) {
    for (int j = 0; j < n_xi; ++j) {
      const double xi = xi_min + j * h;
      const double r = std::clamp(-xi / ramp_width, 0.0, 1.0);
      f.at(i, j) = profile.phi[i] * r;
    }
    f.at(i, 0) = profile.phi[i];
    f.at(i, n_xi - 1) = 0;
  }

  // Step size with advection headroom for the speed-lock adjustments.
  const double denom = 2 * (1.0 / (profile.grid.h() * profile.grid.h()) + 1.0 / (h * h)) *
                           profile.m * pow_m(profile.sup_phi, profile.m - 1) +
                       1.0 / (profile.m - 1) +
                       c * (1 + 2 * opts.lock_threshold) / h;
  const double dtau = opts.safety / denom;
  const StepOptions sopts{false, true};  // hold both xi-end columns

  long long clamps = 0;
  std::vector<double> scratch_w(f.values.size());
  std::vector<double> scratch_next(f.values.size());
  std::vector<double> prev_shape;
  double prev_tau = 0;
  double residual_rate = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> track;  // (tau, absolute front)
  std::vector<double> residual_history;
  long long cumulative_shift = 0;
  std::size_t lock_from = 0;  // first track index of the current speed segment
  int locks = 0;
  double free_drift = 0;
  bool have_free_drift = false;
  bool converged = false;

  auto segment_drift = [&](std::size_t from) {
    std::vector<double> ts, fs;
    const std::size_t skip = (track.size() - from) / 2;
    for (std::size_t i = from + skip; i < track.size(); ++i) {
      ts.push_back(track[i].first);
      fs.push_back(track[i].second);
    }
    if (ts.size() < 6) return std::numeric_limits<double>::quiet_NaN();
    return fit_line(ts, fs).slope;
  };

  // Bulk translation rate read directly from the value climb over the last
  // pin period, projected onto the xi-slope of the mid-amplitude band. This
  // is the unbiased feedback for the speed lock: the threshold-level front
  // is glued to the lattice by the double-exponential tail and cannot serve
  // as a translation gauge on short horizons.
  auto climb_rate = [&](const std::vector<double>& prev, double span) {
    double num = 0, den = 0;
    for (int i = 1; i + 1 < nz; ++i) {
      const double* now = f.values.data() + static_cast<std::size_t>(i) * n_xi;
      const double* old = prev.data() + static_cast<std::size_t>(i) * n_xi;
      const double lo = 0.15 * profile.phi[i], hi = 0.85 * profile.phi[i];
      for (int j = 1; j + 1 < n_xi; ++j) {
        if (now[j] < lo || now[j] > hi) continue;
        const double slope = (now[j + 1] - now[j - 1]) / (2 * h);
        const double climb = (now[j] - old[j]) / span;
        num += climb * slope;
        den += slope * slope;
      }
    }
    return den > 0 ? -num / den : 0.0;
  };

  while (f.time < opts.tau_max) {
    for (int s = 0; s < opts.pin_interval; ++s) {
      detail::advance_rescaled(f, dtau, sopts, scratch_w, scratch_next, clamps);
    }
    std::vector<double> fr = front_curve(f, threshold);
    double fmax = max_interior_front(fr);
    if (is_empty_front(fmax)) {
      throw convergence_failure("relax_wave: profile lost its front");
    }
    track.emplace_back(f.time, fmax + cumulative_shift * h);

    const int fidx = static_cast<int>(std::lround((fmax - xi_min) / h));
    if (fidx >= n_xi - 1 - opts.guard_nodes || fidx <= opts.guard_nodes) {
      throw window_too_short("relax_wave: front reached the window end at xi=" +
                             std::to_string(fmax));
    }
    // Pin the front back to the station xi = 0 by an integer node shift.
    const int pin_k = static_cast<int>(std::lround(fmax / h));
    if (pin_k != 0) {
      shift_xi(f.values, nz, n_xi, pin_k);
      cumulative_shift += pin_k;
      for (int i = 1; i + 1 < nz; ++i) {
        f.at(i, 0) = profile.phi[i];
        f.at(i, n_xi - 1) = 0;
      }
    }

    const double span = f.time - prev_tau;
    if (!prev_shape.empty()) {
      double worst = 0;
      for (std::size_t idx = 0; idx < f.values.size(); ++idx) {
        worst = std::max(worst, std::abs(f.values[idx] - prev_shape[idx]));
      }
      residual_rate = worst / span;
      residual_history.push_back(residual_rate);
      if (residual_rate < tol && f.time > 4.0 &&
          (!opts.lock_to_grid || locks > 0 || f.time < opts.free_stage_tau)) {
        converged = true;
      }
    }

    // Speed lock: fold the measured bulk translation into the advection
    // speed so the front can pin to the lattice instead of crawling through
    // cells.
    if (!converged && opts.lock_to_grid && f.time >= opts.free_stage_tau &&
        pin_k == 0 && !prev_shape.empty()) {
      const std::size_t nh = residual_history.size();
      const bool settled = track.size() - lock_from >= 6;
      const bool stalled =
          locks > 0 && settled && nh >= 6 &&
          residual_history[nh - 1] > 0.5 * residual_history[nh - 5];
      if (locks == 0 || (stalled && locks < 12)) {
        if (locks == 0) {
          const double drift = segment_drift(0);
          if (!std::isnan(drift)) {
            free_drift = drift;
            have_free_drift = true;
          }
        }
        const double proposed = f.frame_speed + climb_rate(prev_shape, span);
        if (std::abs(proposed - c) <= opts.lock_threshold * c) {
          f.frame_speed = proposed;
          ++locks;
          lock_from = track.size();
        } else if (locks == 0) {
          lock_from = track.size();  // off-speed run: keep running freely
        }
      }
    }
    prev_shape = f.values;
    prev_tau = f.time;
    if (converged) break;
  }

  if (!converged && opts.require_convergence) {
    std::string tail;
    const std::size_t nh = residual_history.size();
    for (std::size_t i = nh > 5 ? nh - 5 : 0; i < nh; ++i) {
      tail += " " + std::to_string(residual_history[i]);
    }
    throw convergence_failure("relax_wave: no steady shape by tau=" +
                              std::to_string(opts.tau_max) + "; residual history:" + tail);
  }

  WaveProfile w;
  w.section = profile.grid;
  w.m = profile.m;
  w.xi_min = xi_min;
  w.xi_max = xi_max;
  w.n_xi = n_xi;
  w.values = std::move(f.values);
  w.speed = c;
  w.locked_speed = f.frame_speed;
  w.front = front_curve(w.values.data(), nz, n_xi, xi_min, h, threshold);
  w.xi0 = max_interior_front(w.front);
  w.front_threshold = threshold;
  w.final_residual = residual_rate;

  if (have_free_drift) {
    w.drift_rate = free_drift;
  } else if (track.size() >= 8) {
    w.drift_rate = segment_drift(track.size() / 2);
  }
  return w;
}

WaveProfile normalize_wave(const WaveProfile& w) {
  for (std::size_t i = 1; i + 1 < w.front.size(); ++i) {
    if (is_empty_front(w.front[i])) {
      throw degenerate_profile("normalize_wave: interior row " + std::to_string(i) +
                               " has an empty positivity set");
    }
  }
  const double fmax = max_interior_front(w.front);
  const int k = static_cast<int>(std::lround(fmax / w.h_xi()));
  WaveProfile out = w;
  shift_xi(out.values, w.section.n, w.n_xi, k);
  out.front = front_curve(out.values.data(), w.section.n, w.n_xi, w.xi_min, w.h_xi(),
                          w.front_threshold);
  out.xi0 = max_interior_front(out.front);
  out.normalized = true;
  return out;
}

WaveProfile reflect_wave(const WaveProfile& w) {
  WaveProfile out = w;
  out.xi_min = -w.xi_max;
  out.xi_max = -w.xi_min;
  out.speed = -w.speed;
  for (int i = 0; i < w.section.n; ++i) {
    for (int k = 0; k < w.n_xi; ++k) {
      out.values[static_cast<std::size_t>(i) * w.n_xi + k] = w.at(i, w.n_xi - 1 - k);
    }
  }
  out.front.assign(w.front.size(), empty_front());
  for (std::size_t i = 0; i < w.front.size(); ++i) {
    if (!is_empty_front(w.front[i])) out.front[i] = -w.front[i];
  }
  out.xi0 = -w.xi0;
  return out;
}

SpeedEstimate measure_speed(const FrontSeries& fronts, double tau_a, double tau_b) {
  std::vector<double> ts, fs;
  for (const auto& s : fronts.samples) {
    if (s.tau < tau_a || s.tau > tau_b) continue;
    if (s.any_empty_interior || std::isnan(s.max_front)) {
      throw estimation_failure("measure_speed: empty front at tau=" + std::to_string(s.tau));
    }
    ts.push_back(s.tau);
    fs.push_back(s.max_front);
  }
  if (ts.size() < 10) {
    throw estimation_failure("measure_speed: need at least 10 samples in the window, have " +
                             std::to_string(ts.size()));
  }
  LineFit fit = fit_line(ts, fs);
  return SpeedEstimate{fit.slope, fit.intercept, fit.residual_sup, fit.samples};
}

WaveResidual wave_residual(const WaveProfile& w) {
  const int nz = w.section.n, nxi = w.n_xi;
  const double hz = w.section.h(), hx = w.h_xi();
  std::vector<double> wm(w.values.size());
  pow_field(w.values.data(), wm.data(), w.values.size(), w.m);
  WaveResidual res;
  const double plateau_edge = w.xi_min + 0.25 * (w.xi_max - w.xi_min);
  for (int i = 1; i + 1 < nz; ++i) {
    for (int k = 1; k + 1 < nxi; ++k) {
      const double phi = w.at(i, k);
      if (phi <= w.front_threshold) continue;
      const std::size_t idx = static_cast<std::size_t>(i) * nxi + k;
      const double lap = (wm[idx - nxi] - 2 * wm[idx] + wm[idx + nxi]) / (hz * hz) +
                         (wm[idx - 1] - 2 * wm[idx] + wm[idx + 1]) / (hx * hx);
      const double dxi = (w.at(i, k + 1) - w.at(i, k - 1)) / (2 * hx);
      const double r = std::abs(lap + w.speed * dxi + phi / (w.m - 1));
      res.sup = std::max(res.sup, r);
      if (w.xi(k) < plateau_edge) res.plateau_sup = std::max(res.plateau_sup, r);
    }
  }
  return res;
}

}  // namespace pmetube
