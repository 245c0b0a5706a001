#pragma once

// Time-indexed diagnostic series shared by the waves and diagnostics modules.

#include <vector>

#include "pmetube/types.hpp"

namespace pmetube {

// One windowed relative-error measurement sup_{|y| <= c tau} |v/Phi - 1|.
struct ErrorSample {
  double tau = 0;
  double c = 0;
  double error = 0;
  long long count = 0;  // nodes in the window
  bool empty = false;   // window smaller than one spacing
};

struct ErrorSeries {
  std::vector<ErrorSample> samples;
};

// Free-boundary positions Gamma_v^+(z, tau) per row; NaN marks an empty row.
struct FrontSample {
  double tau = 0;
  std::vector<double> gamma;  // one entry per z row
  double max_front = 0;       // over non-empty interior rows
  double min_front = 0;
  bool any_empty_interior = true;
};

struct FrontSeries {
  std::vector<FrontSample> samples;
};

struct FitResult {
  double slope = 0;
  double intercept = 0;
  double residual_sup = 0;
  double r2 = 0;
  int samples = 0;
};

}  // namespace pmetube
