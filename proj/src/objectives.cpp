#include "igo/objectives.hpp"

#include <fstream>
#include <stdexcept>

namespace igo {

Objective Objective::onemax(std::size_t n) {
  return Objective(ObjectiveKind::onemax, n);
}

Objective Objective::leadingones(std::size_t n) {
  return Objective(ObjectiveKind::leadingones, n);
}

Objective Objective::linear(std::vector<double> weights) {
  Objective obj(ObjectiveKind::linear, weights.size());
  for (const double w : weights) {
    if (!(w > 0.0)) {
      throw std::invalid_argument("linear: weights must be positive");
    }
  }
  obj.weights_ = std::move(weights);
  return obj;
}

Objective Objective::linear_from_file(const std::string& path) {
  return linear(load_weights_file(path));
}

std::vector<double> load_weights_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_weights_file: cannot open " + path);
  }
  std::vector<double> weights;
  double w = 0.0;
  while (in >> w) {
    weights.push_back(w);
  }
  if (weights.empty()) {
    throw std::runtime_error("load_weights_file: no weights in " + path);
  }
  return weights;
}

Objective Objective::noisy_onemax(std::size_t n, double sigma) {
  if (sigma < 0.0) {
    throw std::invalid_argument("noisy_onemax: sigma must be nonnegative");
  }
  Objective obj(ObjectiveKind::noisy_onemax, n);
  obj.sigma_ = sigma;
  return obj;
}

double Objective::evaluate(const BitString& x, Rng& rng) {
  if (x.size() != n_) {
    throw std::invalid_argument("evaluate: dimension mismatch");
  }
  eval_count_ += 1;
  const auto n = static_cast<double>(n_);
  switch (kind_) {
    case ObjectiveKind::onemax: {
      double ones = 0.0;
      for (const auto b : x) ones += b;
      return n - ones;
    }
    case ObjectiveKind::leadingones: {
      // n - sum_k prod_{j<=k} x_j
      double prefix = 1.0;
      double sum = 0.0;
      for (const auto b : x) {
        prefix *= b;
        sum += prefix;
      }
      return n - sum;
    }
    case ObjectiveKind::linear: {
      double v = 0.0;
      for (std::size_t k = 0; k < n_; ++k) {
        v += weights_[k] * (1.0 - static_cast<double>(x[k]));
      }
      return v;
    }
    case ObjectiveKind::noisy_onemax: {
      double ones = 0.0;
      for (const auto b : x) ones += b;
      return n - ones + sigma_ * rng.gaussian();
    }
  }
  throw std::logic_error("evaluate: unreachable");
}

bool Objective::is_optimum(const BitString& x) const {
  if (x.size() != n_) {
    throw std::invalid_argument("is_optimum: dimension mismatch");
  }
  for (const auto b : x) {
    if (!b) return false;
  }
  return true;
}

std::string Objective::label() const { return objective_kind_name(kind_); }

std::string objective_kind_name(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::onemax:
      return "onemax";
    case ObjectiveKind::leadingones:
      return "leadingones";
    case ObjectiveKind::linear:
      return "linear";
    case ObjectiveKind::noisy_onemax:
      return "noisy-onemax";
  }
  return "unknown";
}

}  // namespace igo
