#pragma once

#include <span>
#include <vector>

namespace igo {

/// One batch of preference (utility) values in original sample order,
/// together with their mean mu_W and population variance sigma_W^2.
struct UtilityBatch {
  std::vector<double> utilities;
  double mean_w = 0.0;
  double var_w = 0.0;

  std::size_t size() const { return utilities.size(); }
};

/// Fills in mean_w / var_w for raw utility values.
UtilityBatch utility_stats(std::vector<double> utilities);

/// Assigns per-rank weights to f-values, averaging the weights of exactly
/// tied values over their rank positions. table[r] is the weight of rank r
/// (0-based, best first). Output order matches input order.
UtilityBatch utilities_from_rank_table(std::span<const double> f_values,
                                       std::span<const double> table,
                                       bool minimize);

/// Ranking preference with mu = ceil(lambda/4): weight 2*lambda/mu for the
/// mu best, lambda/mu for the middle band, 0 for the mu worst. Requires
/// lambda >= 2 and finite f-values.
UtilityBatch ranking_utilities(std::span<const double> f_values,
                               bool minimize = true);

/// Bounded preference exp(-f); keeps utilities positive for any finite f.
UtilityBatch bounded_utilities(std::span<const double> f_values);

/// Equal weight lambda/mu on the mu = ceil(lambda/4) best, 0 elsewhere.
/// This is the table under which a unit step reproduces the maximum-
/// likelihood frequency update (the UMDA recovery).
UtilityBatch top_mu_utilities(std::span<const double> f_values,
                              bool minimize = true);

}  // namespace igo
