#pragma once

#include <concepts>
#include <cstdint>
#include <span>
#include <vector>

#include "igo/rng.hpp"

namespace igo {

using BitString = std::vector<std::uint8_t>;

/// Expectation parameters of a product-Bernoulli distribution: probs[k] is
/// the probability that bit k samples as one. project() keeps every
/// component inside [1/n, 1 - 1/n] so no bit ever freezes; that interval is
/// empty below n = 2.
struct ThetaParams {
  std::vector<double> probs;

  std::size_t dim() const { return probs.size(); }
};

/// Uniform initial distribution, all components 0.5. Rejects n < 2.
ThetaParams init_uniform(std::size_t n);

/// Componentwise clamp of an unconstrained vector to [1/n, 1 - 1/n].
ThetaParams project(std::span<const double> raw, std::size_t n);

/// Draws lambda bitstrings from the distribution. Consumes exactly
/// lambda * n uniform draws: bits in index order within a sample, samples in
/// index order, so a run is reproducible from the stream alone.
std::vector<BitString> sample(const ThetaParams& theta, std::size_t lambda,
                              Rng& rng);

/// Natural gradient of the log-likelihood at x, which is x - theta in the
/// expectation parameterization.
std::vector<double> nat_grad_loglik(const ThetaParams& theta,
                                    const BitString& x);

/// Elementwise square root of the Fisher-matrix diagonal,
/// (theta_k (1 - theta_k))^(-1/2). Rejects components outside (0, 1).
std::vector<double> fisher_sqrt_diag(const ThetaParams& theta);

/// Mean per-bit entropy in nats; 0 at a point mass, ln 2 at uniform.
double mean_entropy(const ThetaParams& theta);

/// Contract the optimizer needs from an exponential family in expectation
/// parameterization. Only the Bernoulli model ships; other families can be
/// slotted in behind the same five operations.
template <typename F>
concept ExpectationFamily =
    requires(const F fam, const ThetaParams& theta, const BitString& x,
             std::span<const double> raw, std::size_t lambda, Rng& rng) {
      { fam.init() } -> std::same_as<ThetaParams>;
      { fam.sample(theta, lambda, rng) } -> std::same_as<std::vector<BitString>>;
      { fam.project(raw) } -> std::same_as<ThetaParams>;
      { fam.nat_grad_loglik(theta, x) } -> std::same_as<std::vector<double>>;
      { fam.fisher_sqrt_diag(theta) } -> std::same_as<std::vector<double>>;
    };

struct BernoulliFamily {
  std::size_t n;

  explicit BernoulliFamily(std::size_t dim);

  ThetaParams init() const { return init_uniform(n); }
  std::vector<BitString> sample(const ThetaParams& theta, std::size_t lambda,
                                Rng& rng) const {
    return igo::sample(theta, lambda, rng);
  }
  ThetaParams project(std::span<const double> raw) const {
    return igo::project(raw, n);
  }
  std::vector<double> nat_grad_loglik(const ThetaParams& theta,
                                      const BitString& x) const {
    return igo::nat_grad_loglik(theta, x);
  }
  std::vector<double> fisher_sqrt_diag(const ThetaParams& theta) const {
    return igo::fisher_sqrt_diag(theta);
  }
};

static_assert(ExpectationFamily<BernoulliFamily>);

}  // namespace igo
