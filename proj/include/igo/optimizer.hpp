#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "igo/bernoulli.hpp"
#include "igo/preference.hpp"
#include "igo/rng.hpp"

namespace igo {

enum class Mode { adapt_lambda, adapt_epsilon, fixed };
enum class Preference { ranking, bounded, top_mu };
enum class BaselineKind { cga, umda, pbil };

/// Ask/tell state machine for stochastic natural gradient ascent over the
/// Bernoulli family.
///
/// One tell performs, in order: preference transform of the raw objective
/// values; skip everything but the counters when sigma_W^2 = 0; the theta
/// step theta <- project(theta + (epsilon / mu_W) * grad); the accumulator
/// update s <- (1-beta) s + sqrt(beta (2-beta) lambda / (n sigma_W^2)) *
/// F^(1/2) grad; gamma <- (1-beta)^2 gamma + beta (2-beta); the sample-size
/// shadow lambda_r <- clip(lambda_r * exp(beta (gamma - |s|^2 / alpha))).
/// The mode then decides what the adapted quantity is: adapt_lambda rounds
/// lambda_r into the next sample size, adapt_epsilon keeps lambda = 2 and
/// rescales epsilon = beta = epsilon_base / (lambda_r / lambda_min), and
/// fixed performs none of the s / gamma / lambda_r updates.
///
/// Internally the utilities are normalized by their mean before any state
/// is touched, so trajectories are invariant (bit-for-bit, for utilities
/// whose scaling is exact in floating point) to positive rescaling of the
/// preference.
///
/// A state is a single-owner machine: ask and tell must alternate and must
/// not run concurrently on one instance. Distinct instances are
/// independent; the caller may evaluate one batch's samples in parallel
/// since tell consumes the batch atomically.
struct Optimizer {
  ThetaParams theta;
  std::vector<double> s;
  double gamma = 0.0;
  double lambda_r = 2.0;
  int lambda = 2;
  double epsilon = 0.0;
  double beta = 0.0;
  double epsilon_base = 0.0;
  Mode mode = Mode::adapt_lambda;
  double alpha = 1.5;
  int lambda_min = 2;
  int lambda_max = 0;
  std::uint64_t iteration = 0;
  std::uint64_t f_calls = 0;

  Preference preference = Preference::ranking;
  bool minimize = true;
  // Baseline subtraction in the gradient estimate; off only for the UMDA
  // recovery, whose unit step must be the plain maximum-likelihood update.
  bool subtract_mean = true;
  // The s update evaluates the Fisher square root at the already-updated
  // theta (the literal line order); flip for the pre-update ablation.
  bool fisher_at_updated_theta = true;

  std::size_t dim() const { return theta.dim(); }

  /// Samples the current lambda candidates from P_theta.
  std::vector<BitString> ask(Rng& rng);
  std::vector<BitString> ask(Rng&& rng) { return ask(rng); }

  /// Consumes the batch from the most recent ask with its objective values.
  void tell(const std::vector<BitString>& samples,
            std::span<const double> f_values);

  /// Same update from caller-supplied utilities, which must be nonnegative,
  /// finite, and not all zero.
  void tell_utilities(const std::vector<BitString>& samples,
                      std::span<const double> utilities);

 private:
  void tell_impl(const std::vector<BitString>& samples, const UtilityBatch& u);
  void check_batch(const std::vector<BitString>& samples,
                   std::size_t value_count) const;

  int pending_ask_ = -1;
};

/// Parameterless optimizer with the defaults epsilon = beta = n^(-1/2),
/// alpha = 1.5, lambda = lambda_r = lambda_min = 2, lambda_max = n.
/// epsilon/beta can be overridden jointly; alpha must be >= 1.
Optimizer parameterless(std::size_t n, Mode mode, double alpha = 1.5,
                        std::optional<double> epsilon = std::nullopt);

/// Fixed-parameter baselines. cGA forces lambda = 2 (default epsilon =
/// 1/n); UMDA forces epsilon = 1 and uses the equal top-mu weight table;
/// PBIL takes both lambda >= 2 and epsilon in (0, 1].
Optimizer baseline(BaselineKind kind, std::size_t n,
                   std::optional<int> lambda = std::nullopt,
                   std::optional<double> epsilon = std::nullopt);

/// Monte-Carlo natural-gradient estimate
/// (1/lambda) sum_i (w_i - mu_W) (x_i - theta).
std::vector<double> natural_gradient_estimate(
    const ThetaParams& theta, const std::vector<BitString>& samples,
    const UtilityBatch& utilities);

/// Fixed point of gamma <- (1-beta)^2 gamma + beta (2-beta); equals 1 for
/// every beta in (0, 1]. Diagnostic helper.
double snr_normalizer_fixed_point(double beta);

/// One multiplicative lambda_r step with clipping, exposed for tests.
double lambda_r_step(double lambda_r, double beta, double gamma,
                     double s_sqnorm, double alpha, double lo, double hi);

/// JSON snapshot of every state field, for checkpointing between
/// iterations. A loaded state continues bit-identically.
void save_snapshot(const Optimizer& opt, std::ostream& out);
Optimizer load_snapshot(std::istream& in);

std::string mode_name(Mode mode);

}  // namespace igo
