#pragma once

#include <cmath>
#include <limits>

#include "mixprobit/rng.hpp"

namespace mixprobit {

// One univariate slice-sampling update (stepping out, then shrinkage) of a
// log density on the open interval (lower, upper). x must lie inside it.
template <class LogDensity>
double slice_update(RngStream& rng, double x, LogDensity&& log_density, double width,
                    double lower = -std::numeric_limits<double>::infinity(),
                    double upper = std::numeric_limits<double>::infinity(),
                    int max_steps_out = 64) {
  const double level = log_density(x) + std::log(rng.uniform());
  double left = x - width * rng.uniform();
  double right = left + width;
  int steps_left = static_cast<int>(max_steps_out * rng.uniform());
  int steps_right = max_steps_out - 1 - steps_left;
  while (steps_left-- > 0 && left > lower && log_density(left) > level) left -= width;
  while (steps_right-- > 0 && right < upper && log_density(right) > level) right += width;
  if (left < lower) left = lower;
  if (right > upper) right = upper;
  for (;;) {
    const double candidate = left + (right - left) * rng.uniform();
    if (candidate > lower && candidate < upper && log_density(candidate) > level)
      return candidate;
    if (candidate < x) {
      left = candidate;
    } else {
      right = candidate;
    }
    if (!(right - left > 1e-300)) return x;
  }
}

}  // namespace mixprobit
