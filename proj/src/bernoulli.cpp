#include "igo/bernoulli.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace igo {

ThetaParams init_uniform(std::size_t n) {
  if (n < 2) {
    throw std::invalid_argument(
        "init_uniform: dimension must be at least 2, got " +
        std::to_string(n));
  }
  return ThetaParams{std::vector<double>(n, 0.5)};
}

ThetaParams project(std::span<const double> raw, std::size_t n) {
  if (raw.size() != n) {
    throw std::invalid_argument("project: vector length does not match n");
  }
  const double lo = 1.0 / static_cast<double>(n);
  const double hi = 1.0 - lo;
  ThetaParams theta;
  theta.probs.reserve(n);
  for (const double v : raw) {
    theta.probs.push_back(std::clamp(v, lo, hi));
  }
  return theta;
}

std::vector<BitString> sample(const ThetaParams& theta, std::size_t lambda,
                              Rng& rng) {
  if (lambda < 1) {
    throw std::invalid_argument("sample: lambda must be at least 1");
  }
  const std::size_t n = theta.dim();
  std::vector<BitString> out(lambda);
  for (std::size_t i = 0; i < lambda; ++i) {
    BitString& x = out[i];
    x.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = rng.uniform() < theta.probs[k] ? 1 : 0;
    }
  }
  return out;
}

std::vector<double> nat_grad_loglik(const ThetaParams& theta,
                                    const BitString& x) {
  if (x.size() != theta.dim()) {
    throw std::invalid_argument("nat_grad_loglik: dimension mismatch");
  }
  std::vector<double> g(theta.dim());
  for (std::size_t k = 0; k < g.size(); ++k) {
    g[k] = static_cast<double>(x[k]) - theta.probs[k];
  }
  return g;
}

std::vector<double> fisher_sqrt_diag(const ThetaParams& theta) {
  std::vector<double> f(theta.dim());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double p = theta.probs[k];
    if (!(p > 0.0 && p < 1.0)) {
      throw std::domain_error(
          "fisher_sqrt_diag: component outside (0, 1); metric is singular");
    }
    f[k] = 1.0 / std::sqrt(p * (1.0 - p));
  }
  return f;
}

double mean_entropy(const ThetaParams& theta) {
  double h = 0.0;
  for (const double p : theta.probs) {
    if (p > 0.0 && p < 1.0) {
      h += -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
    }
  }
  return h / static_cast<double>(theta.dim());
}

BernoulliFamily::BernoulliFamily(std::size_t dim) : n(dim) {
  if (dim < 2) {
    throw std::invalid_argument("BernoulliFamily: dimension must be >= 2");
  }
}

}  // namespace igo
