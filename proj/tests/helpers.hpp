#pragma once

#include <cstddef>
#include <vector>

#include "igo/bernoulli.hpp"

namespace igo::test {

/// All 2^n bitstrings of length n in counting order (bit k = bit k of the
/// counter).
inline std::vector<BitString> all_bitstrings(std::size_t n) {
  std::vector<BitString> out;
  out.reserve(std::size_t{1} << n);
  for (std::size_t v = 0; v < (std::size_t{1} << n); ++v) {
    BitString x(n);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = (v >> k) & 1u;
    }
    out.push_back(std::move(x));
  }
  return out;
}

inline double prob_of(const ThetaParams& theta, const BitString& x) {
  double p = 1.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    p *= x[k] ? theta.probs[k] : 1.0 - theta.probs[k];
  }
  return p;
}

inline double onemax_value(const BitString& x) {
  double ones = 0.0;
  for (const auto b : x) ones += b;
  return static_cast<double>(x.size()) - ones;
}

}  // namespace igo::test
