#pragma once

#include <vector>

namespace igo {

/// Quantile with linear interpolation between order statistics
/// (position (N-1) p). Requires a nonempty sample.
double quantile(std::vector<double> values, double p);

double median(std::vector<double> values);

struct Quartiles {
  double lower = 0.0;
  double median = 0.0;
  double upper = 0.0;
};

Quartiles quartiles(std::vector<double> values);

}  // namespace igo
