#include "igo/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace igo {

std::vector<BitString> Optimizer::ask(Rng& rng) {
  pending_ask_ = lambda;
  return sample(theta, static_cast<std::size_t>(lambda), rng);
}

void Optimizer::check_batch(const std::vector<BitString>& samples,
                            std::size_t value_count) const {
  const auto expected =
      static_cast<std::size_t>(pending_ask_ >= 0 ? pending_ask_ : lambda);
  if (samples.size() != expected || value_count != expected) {
    throw std::invalid_argument(
        "tell: batch size does not match the most recent ask");
  }
  for (const BitString& x : samples) {
    if (x.size() != dim()) {
      throw std::invalid_argument("tell: sample dimension mismatch");
    }
  }
}

void Optimizer::tell(const std::vector<BitString>& samples,
                     std::span<const double> f_values) {
  check_batch(samples, f_values.size());
  UtilityBatch u;
  switch (preference) {
    case Preference::ranking:
      u = ranking_utilities(f_values, minimize);
      break;
    case Preference::bounded:
      u = bounded_utilities(f_values);
      break;
    case Preference::top_mu:
      u = top_mu_utilities(f_values, minimize);
      break;
  }
  tell_impl(samples, u);
}

void Optimizer::tell_utilities(const std::vector<BitString>& samples,
                               std::span<const double> utilities) {
  check_batch(samples, utilities.size());
  bool any_positive = false;
  for (const double w : utilities) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument(
          "tell_utilities: utilities must be finite and nonnegative");
    }
    any_positive |= w > 0.0;
  }
  if (!any_positive) {
    throw std::invalid_argument("tell_utilities: utilities are all zero");
  }
  tell_impl(samples, utility_stats({utilities.begin(), utilities.end()}));
}

void Optimizer::tell_impl(const std::vector<BitString>& samples,
                          const UtilityBatch& u) {
  const std::size_t lam = u.size();
  const std::size_t n = dim();
  iteration += 1;
  f_calls += lam;
  pending_ask_ = -1;

  if (u.var_w == 0.0) {
    return;  // no preference signal; only the counters advance
  }

  // Normalize by mu_W up front. Everything below sees only the ratios
  // w_i / mu_W, which makes the whole update invariant to positive
  // rescaling of the utilities.
  std::vector<double> coeff(lam);
  double var_norm = 0.0;
  for (std::size_t i = 0; i < lam; ++i) {
    const double wn = u.utilities[i] / u.mean_w;
    const double centered = wn - 1.0;
    var_norm += centered * centered;
    coeff[i] = (subtract_mean ? centered : wn) / static_cast<double>(lam);
  }
  var_norm /= static_cast<double>(lam);  // sigma_W^2 / mu_W^2

  std::vector<double> grad(n, 0.0);
  for (std::size_t i = 0; i < lam; ++i) {
    const double c = coeff[i];
    const BitString& x = samples[i];
    for (std::size_t k = 0; k < n; ++k) {
      grad[k] += c * (static_cast<double>(x[k]) - theta.probs[k]);
    }
  }

  ThetaParams theta_before;
  if (mode != Mode::fixed && !fisher_at_updated_theta) {
    theta_before = theta;
  }
  std::vector<double> stepped(n);
  for (std::size_t k = 0; k < n; ++k) {
    stepped[k] = theta.probs[k] + epsilon * grad[k];
  }
  theta = project(stepped, n);

  if (mode == Mode::fixed) {
    return;
  }

  const std::vector<double> fsq =
      fisher_sqrt_diag(fisher_at_updated_theta ? theta : theta_before);
  const double c_s = std::sqrt(beta * (2.0 - beta) *
                               static_cast<double>(lam) /
                               (static_cast<double>(n) * var_norm));
  double s_sqnorm = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    s[k] = (1.0 - beta) * s[k] + c_s * fsq[k] * grad[k];
    s_sqnorm += s[k] * s[k];
  }
  gamma = (1.0 - beta) * (1.0 - beta) * gamma + beta * (2.0 - beta);
  lambda_r = lambda_r_step(lambda_r, beta, gamma, s_sqnorm, alpha,
                           static_cast<double>(lambda_min),
                           static_cast<double>(lambda_max));

  if (mode == Mode::adapt_lambda) {
    lambda = static_cast<int>(std::llround(lambda_r));
  } else {  // adapt_epsilon
    lambda = lambda_min;
    epsilon = beta =
        epsilon_base / (lambda_r / static_cast<double>(lambda_min));
  }
}

Optimizer parameterless(std::size_t n, Mode mode, double alpha,
                        std::optional<double> epsilon) {
  if (mode == Mode::fixed) {
    throw std::invalid_argument(
        "parameterless: mode must be adapt_lambda or adapt_epsilon");
  }
  if (alpha < 1.0) {
    throw std::invalid_argument("parameterless: alpha must be >= 1");
  }
  Optimizer opt;
  opt.theta = init_uniform(n);
  opt.s.assign(n, 0.0);
  opt.mode = mode;
  opt.alpha = alpha;
  opt.epsilon_base = epsilon.value_or(1.0 / std::sqrt(static_cast<double>(n)));
  if (opt.epsilon_base <= 0.0 || opt.epsilon_base > 1.0) {
    throw std::invalid_argument("parameterless: epsilon must be in (0, 1]");
  }
  opt.epsilon = opt.beta = opt.epsilon_base;
  opt.lambda_min = 2;
  opt.lambda_max = static_cast<int>(n);
  opt.lambda = 2;
  opt.lambda_r = 2.0;
  return opt;
}

Optimizer baseline(BaselineKind kind, std::size_t n,
                   std::optional<int> lambda, std::optional<double> epsilon) {
  Optimizer opt;
  opt.theta = init_uniform(n);
  opt.s.assign(n, 0.0);
  opt.mode = Mode::fixed;
  opt.lambda_max = static_cast<int>(n);

  switch (kind) {
    case BaselineKind::cga:
      if (lambda.has_value() && *lambda != 2) {
        throw std::invalid_argument("baseline: cGA samples exactly 2 points");
      }
      opt.lambda = 2;
      opt.epsilon = epsilon.value_or(1.0 / static_cast<double>(n));
      break;
    case BaselineKind::umda:
      if (epsilon.has_value() && *epsilon != 1.0) {
        throw std::invalid_argument("baseline: UMDA uses epsilon = 1");
      }
      if (!lambda.has_value()) {
        throw std::invalid_argument("baseline: UMDA needs a sample size");
      }
      opt.lambda = *lambda;
      opt.epsilon = 1.0;
      opt.preference = Preference::top_mu;
      opt.subtract_mean = false;
      break;
    case BaselineKind::pbil:
      if (!lambda.has_value() || !epsilon.has_value()) {
        throw std::invalid_argument(
            "baseline: PBIL needs both lambda and epsilon");
      }
      opt.lambda = *lambda;
      opt.epsilon = *epsilon;
      break;
  }
  if (opt.lambda < 2) {
    throw std::invalid_argument("baseline: lambda must be >= 2");
  }
  if (opt.epsilon <= 0.0 || opt.epsilon > 1.0) {
    throw std::invalid_argument("baseline: epsilon must be in (0, 1]");
  }
  opt.lambda_r = static_cast<double>(opt.lambda);
  opt.epsilon_base = opt.beta = opt.epsilon;
  return opt;
}

std::vector<double> natural_gradient_estimate(
    const ThetaParams& theta, const std::vector<BitString>& samples,
    const UtilityBatch& utilities) {
  if (samples.size() != utilities.size()) {
    throw std::invalid_argument("natural_gradient_estimate: count mismatch");
  }
  const std::size_t n = theta.dim();
  const auto lam = static_cast<double>(samples.size());
  std::vector<double> grad(n, 0.0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].size() != n) {
      throw std::invalid_argument(
          "natural_gradient_estimate: dimension mismatch");
    }
    const double c = (utilities.utilities[i] - utilities.mean_w) / lam;
    for (std::size_t k = 0; k < n; ++k) {
      grad[k] += c * (static_cast<double>(samples[i][k]) - theta.probs[k]);
    }
  }
  return grad;
}

double snr_normalizer_fixed_point(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw std::invalid_argument(
        "snr_normalizer_fixed_point: beta must be in (0, 1]");
  }
  return beta * (2.0 - beta) / (1.0 - (1.0 - beta) * (1.0 - beta));
}

double lambda_r_step(double lambda_r, double beta, double gamma,
                     double s_sqnorm, double alpha, double lo, double hi) {
  const double next = lambda_r * std::exp(beta * (gamma - s_sqnorm / alpha));
  return std::clamp(next, lo, hi);
}

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::adapt_lambda:
      return "adapt_lambda";
    case Mode::adapt_epsilon:
      return "adapt_epsilon";
    case Mode::fixed:
      return "fixed";
  }
  return "unknown";
}

namespace {

Mode mode_from_name(const std::string& name) {
  if (name == "adapt_lambda") return Mode::adapt_lambda;
  if (name == "adapt_epsilon") return Mode::adapt_epsilon;
  if (name == "fixed") return Mode::fixed;
  throw std::invalid_argument("unknown mode: " + name);
}

std::string preference_name(Preference p) {
  switch (p) {
    case Preference::ranking:
      return "ranking";
    case Preference::bounded:
      return "bounded";
    case Preference::top_mu:
      return "top_mu";
  }
  return "unknown";
}

Preference preference_from_name(const std::string& name) {
  if (name == "ranking") return Preference::ranking;
  if (name == "bounded") return Preference::bounded;
  if (name == "top_mu") return Preference::top_mu;
  throw std::invalid_argument("unknown preference: " + name);
}

}  // namespace

void save_snapshot(const Optimizer& opt, std::ostream& out) {
  nlohmann::json j{
      {"theta", opt.theta.probs},
      {"s", opt.s},
      {"gamma", opt.gamma},
      {"lambda_r", opt.lambda_r},
      {"lambda", opt.lambda},
      {"epsilon", opt.epsilon},
      {"beta", opt.beta},
      {"epsilon_base", opt.epsilon_base},
      {"mode", mode_name(opt.mode)},
      {"alpha", opt.alpha},
      {"lambda_min", opt.lambda_min},
      {"lambda_max", opt.lambda_max},
      {"iteration", opt.iteration},
      {"f_calls", opt.f_calls},
      {"preference", preference_name(opt.preference)},
      {"minimize", opt.minimize},
      {"subtract_mean", opt.subtract_mean},
      {"fisher_at_updated_theta", opt.fisher_at_updated_theta},
  };
  out << j.dump(2) << '\n';
}

Optimizer load_snapshot(std::istream& in) {
  nlohmann::json j;
  in >> j;
  Optimizer opt;
  opt.theta.probs = j.at("theta").get<std::vector<double>>();
  opt.s = j.at("s").get<std::vector<double>>();
  opt.gamma = j.at("gamma").get<double>();
  opt.lambda_r = j.at("lambda_r").get<double>();
  opt.lambda = j.at("lambda").get<int>();
  opt.epsilon = j.at("epsilon").get<double>();
  opt.beta = j.at("beta").get<double>();
  opt.epsilon_base = j.at("epsilon_base").get<double>();
  opt.mode = mode_from_name(j.at("mode").get<std::string>());
  opt.alpha = j.at("alpha").get<double>();
  opt.lambda_min = j.at("lambda_min").get<int>();
  opt.lambda_max = j.at("lambda_max").get<int>();
  opt.iteration = j.at("iteration").get<std::uint64_t>();
  opt.f_calls = j.at("f_calls").get<std::uint64_t>();
  opt.preference = preference_from_name(j.at("preference").get<std::string>());
  opt.minimize = j.at("minimize").get<bool>();
  opt.subtract_mean = j.at("subtract_mean").get<bool>();
  opt.fisher_at_updated_theta = j.at("fisher_at_updated_theta").get<bool>();
  if (opt.s.size() != opt.theta.dim()) {
    throw std::invalid_argument("snapshot: s and theta dimensions differ");
  }
  return opt;
}

}  // namespace igo
