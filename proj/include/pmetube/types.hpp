#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmetube {

// Error taxonomy. Everything numerical that can fail throws a subclass of
// pmetube::error so callers can map failures to distinct exit codes.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct invalid_parameter : error { using error::error; };
struct degenerate_exponent : error { using error::error; };
struct oracle_failure : error { using error::error; };
struct convergence_failure : error { using error::error; };
struct stability_violation : error { using error::error; };
struct scheme_failure : error { using error::error; };
struct inadmissible_datum : error { using error::error; };
struct window_too_short : error { using error::error; };
struct window_too_late : error { using error::error; };
struct degenerate_profile : error { using error::error; };
struct estimation_failure : error { using error::error; };
struct integration_failure : error { using error::error; };
struct range_failure : error { using error::error; };
struct io_failure : error { using error::error; };

// Uniform grid on the cross-section D = (0, L). Nodes i = 0 .. n-1 with
// z_0 = 0 and z_{n-1} = L carrying the Dirichlet condition.
struct SectionGrid {
  double length = 0;
  int n = 0;

  double h() const { return length / (n - 1); }
  double node(int i) const { return i * h(); }

  static SectionGrid make(double length, int n) {
    if (!(length > 0)) throw invalid_parameter("section length must be positive");
    if (n < 3) throw invalid_parameter("section grid needs at least 3 nodes");
    return SectionGrid{length, n};
  }
  bool operator==(const SectionGrid&) const = default;
};

// Tensor grid on the truncated strip D x (y_min, y_max). The y-ends are
// artificial truncation boundaries, not physical ones.
struct TubeGrid {
  SectionGrid section;
  double y_min = 0;
  double y_max = 0;
  int ny = 0;

  double hy() const { return (y_max - y_min) / (ny - 1); }
  double y(int j) const { return y_min + j * hy(); }

  static TubeGrid make(SectionGrid section, double y_min, double y_max, int ny) {
    if (!(y_min < y_max)) throw invalid_parameter("tube grid needs y_min < y_max");
    if (ny < 3) throw invalid_parameter("tube grid needs at least 3 y-nodes");
    return TubeGrid{section, y_min, y_max, ny};
  }
  bool operator==(const TubeGrid&) const = default;
};

inline bool is_empty_front(double f) { return std::isnan(f); }
inline double empty_front() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace pmetube
