#include "igo/preference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace igo {

namespace {

void require_finite(std::span<const double> f_values) {
  for (const double f : f_values) {
    if (!std::isfinite(f)) {
      throw std::invalid_argument("preference: non-finite objective value");
    }
  }
}

std::size_t mu_of(std::size_t lambda) { return (lambda + 3) / 4; }

}  // namespace

UtilityBatch utility_stats(std::vector<double> utilities) {
  UtilityBatch batch;
  batch.utilities = std::move(utilities);
  const auto lambda = static_cast<double>(batch.utilities.size());
  double sum = 0.0;
  for (const double u : batch.utilities) sum += u;
  batch.mean_w = sum / lambda;
  double ss = 0.0;
  for (const double u : batch.utilities) {
    const double d = u - batch.mean_w;
    ss += d * d;
  }
  batch.var_w = ss / lambda;
  return batch;
}

UtilityBatch utilities_from_rank_table(std::span<const double> f_values,
                                       std::span<const double> table,
                                       bool minimize) {
  const std::size_t lambda = f_values.size();
  if (table.size() != lambda) {
    throw std::invalid_argument("utilities_from_rank_table: size mismatch");
  }
  require_finite(f_values);

  // Stable sort on (f-value, original index); ties are exact f equality.
  std::vector<std::size_t> order(lambda);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return minimize ? f_values[a] < f_values[b]
                                     : f_values[a] > f_values[b];
                   });

  std::vector<double> utilities(lambda, 0.0);
  std::size_t i = 0;
  while (i < lambda) {
    std::size_t j = i;
    while (j < lambda && f_values[order[j]] == f_values[order[i]]) ++j;
    double avg = 0.0;
    for (std::size_t r = i; r < j; ++r) avg += table[r];
    avg /= static_cast<double>(j - i);
    for (std::size_t r = i; r < j; ++r) utilities[order[r]] = avg;
    i = j;
  }
  return utility_stats(std::move(utilities));
}

UtilityBatch ranking_utilities(std::span<const double> f_values,
                               bool minimize) {
  const std::size_t lambda = f_values.size();
  if (lambda < 2) {
    throw std::invalid_argument("ranking_utilities: need at least 2 values");
  }
  const std::size_t mu = mu_of(lambda);
  const double unit = static_cast<double>(lambda) / static_cast<double>(mu);
  std::vector<double> table(lambda, 0.0);
  for (std::size_t r = 0; r < lambda - mu; ++r) {
    table[r] = r < mu ? 2.0 * unit : unit;
  }
  return utilities_from_rank_table(f_values, table, minimize);
}

UtilityBatch bounded_utilities(std::span<const double> f_values) {
  require_finite(f_values);
  std::vector<double> utilities(f_values.size());
  for (std::size_t i = 0; i < utilities.size(); ++i) {
    utilities[i] = std::exp(-f_values[i]);
  }
  return utility_stats(std::move(utilities));
}

UtilityBatch top_mu_utilities(std::span<const double> f_values,
                              bool minimize) {
  const std::size_t lambda = f_values.size();
  if (lambda < 2) {
    throw std::invalid_argument("top_mu_utilities: need at least 2 values");
  }
  const std::size_t mu = mu_of(lambda);
  std::vector<double> table(lambda, 0.0);
  for (std::size_t r = 0; r < mu; ++r) {
    table[r] = static_cast<double>(lambda) / static_cast<double>(mu);
  }
  return utilities_from_rank_table(f_values, table, minimize);
}

}  // namespace igo
