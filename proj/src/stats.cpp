#include "igo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace igo {

double quantile(std::vector<double> values, double p) {
  if (values.empty()) {
    throw std::invalid_argument("quantile: empty sample");
  }
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument("quantile: p outside [0, 1]");
  }
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) {
  return quantile(std::move(values), 0.5);
}

Quartiles quartiles(std::vector<double> values) {
  Quartiles q;
  q.lower = quantile(values, 0.25);
  q.median = quantile(values, 0.5);
  q.upper = quantile(std::move(values), 0.75);
  return q;
}

}  // namespace igo
