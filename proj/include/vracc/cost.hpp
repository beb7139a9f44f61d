#pragma once

#include <stdexcept>

namespace vracc {

/// Per-event floating-point-operation estimates used for the weighted cost
/// axis; evaluated exactly as listed, with one gradient-descent step as the
/// natural unit (4Nd).
struct CostModel {
  double backtrack_overhead = 0.3;  // average extra full-gradient equivalents per quasi-Newton step

  static double gd_step(long n, long d) { return 4.0 * static_cast<double>(n) * d; }

  static double basic_step(long n, long d) { return 12.0 * static_cast<double>(n) * d; }

  static double anderson_candidate(long n, long d, long m) {
    const double md = static_cast<double>(m);
    return gd_step(n, d) + 4.0 / 3.0 * md * md * md + 2.0 * md * md * static_cast<double>(d);
  }

  double lbfgs_candidate(long n, long d, long m) const {
    const double dd = static_cast<double>(d);
    return gd_step(n, d) + 2.0 * dd * dd + 13.0 * static_cast<double>(m) * dd +
           backtrack_overhead * gd_step(n, d);
  }

  double weighted_iterations(double flops, long n, long d) const { return flops / gd_step(n, d); }
};

}  // namespace vracc
