#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "igo/bernoulli.hpp"
#include "igo/rng.hpp"

namespace igo {

enum class ObjectiveKind { onemax, leadingones, linear, noisy_onemax };

/// A pseudo-Boolean benchmark objective, phrased as minimization with
/// optimal value 0 at the all-ones string. Each instance owns its own
/// evaluation counter, so one instance serves exactly one trial.
class Objective {
 public:
  static Objective onemax(std::size_t n);
  static Objective leadingones(std::size_t n);
  /// Weighted complement sum(w_k (1 - x_k)); all weights must be positive.
  static Objective linear(std::vector<double> weights);
  /// Reads one positive weight per line.
  static Objective linear_from_file(const std::string& path);
  /// OneMax plus additive Gaussian noise of standard deviation sigma, drawn
  /// from the per-evaluation stream.
  static Objective noisy_onemax(std::size_t n, double sigma);

  double evaluate(const BitString& x, Rng& rng);

  /// True iff x is the all-ones string; for the noisy objective this checks
  /// the underlying noiseless optimum, never an observed value.
  bool is_optimum(const BitString& x) const;

  std::size_t dim() const { return n_; }
  ObjectiveKind kind() const { return kind_; }
  std::uint64_t eval_count() const { return eval_count_; }
  double sigma() const { return sigma_; }
  std::string label() const;

 private:
  Objective(ObjectiveKind kind, std::size_t n) : kind_(kind), n_(n) {}

  ObjectiveKind kind_;
  std::size_t n_;
  double sigma_ = 0.0;
  std::vector<double> weights_;
  std::uint64_t eval_count_ = 0;
};

std::string objective_kind_name(ObjectiveKind kind);

/// Reads one positive weight per line, as consumed by the linear objective.
std::vector<double> load_weights_file(const std::string& path);

}  // namespace igo
