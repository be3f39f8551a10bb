#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "igo/optimizer.hpp"
#include "igo/rng.hpp"

using namespace igo;

namespace {

std::vector<double> random_distinct_f(std::size_t lambda, Rng& rng) {
  std::vector<double> f(lambda);
  for (std::size_t i = 0; i < lambda; ++i) {
    f[i] = rng.uniform() + static_cast<double>(i) * 1e-9;
  }
  return f;
}

}  // namespace

TEST_SUITE_BEGIN("optimizer");

TEST_CASE("parameterless defaults") {
  const Optimizer opt = parameterless(100, Mode::adapt_lambda);
  CHECK(opt.epsilon == doctest::Approx(0.1));
  CHECK(opt.beta == doctest::Approx(0.1));
  CHECK(opt.lambda == 2);
  CHECK(opt.lambda_r == 2.0);
  CHECK(opt.lambda_min == 2);
  CHECK(opt.lambda_max == 100);
  CHECK(opt.alpha == 1.5);
  CHECK(opt.gamma == 0.0);
  CHECK(opt.theta.probs == std::vector<double>(100, 0.5));
  CHECK(opt.s == std::vector<double>(100, 0.0));

  const Optimizer small = parameterless(4, Mode::adapt_epsilon);
  CHECK(small.epsilon == 0.5);
  CHECK(small.lambda_max == 4);

  CHECK_THROWS_AS(parameterless(100, Mode::adapt_lambda, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(parameterless(100, Mode::fixed), std::invalid_argument);
  CHECK_THROWS_AS(parameterless(1, Mode::adapt_lambda),
                  std::invalid_argument);
}

TEST_CASE("baseline construction") {
  const Optimizer cga = baseline(BaselineKind::cga, 100);
  CHECK(cga.lambda == 2);
  CHECK(cga.epsilon == doctest::Approx(0.01));
  CHECK(cga.mode == Mode::fixed);

  const Optimizer cga_sqrt =
      baseline(BaselineKind::cga, 100, std::nullopt, 0.1);
  CHECK(cga_sqrt.epsilon == doctest::Approx(0.1));
  CHECK_THROWS_AS(baseline(BaselineKind::cga, 100, 3), std::invalid_argument);

  const Optimizer umda = baseline(BaselineKind::umda, 50, 20);
  CHECK(umda.epsilon == 1.0);
  CHECK(umda.lambda == 20);
  CHECK(umda.preference == Preference::top_mu);
  CHECK_FALSE(umda.subtract_mean);
  CHECK_THROWS_AS(baseline(BaselineKind::umda, 50, 20, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(baseline(BaselineKind::umda, 50), std::invalid_argument);

  const Optimizer pbil = baseline(BaselineKind::pbil, 50, 8, 0.05);
  CHECK(pbil.lambda == 8);
  CHECK(pbil.epsilon == 0.05);
  CHECK_THROWS_AS(baseline(BaselineKind::pbil, 50), std::invalid_argument);
  CHECK_THROWS_AS(baseline(BaselineKind::pbil, 50, 8, 1.5),
                  std::invalid_argument);
}

TEST_CASE("ask draws the current sample size deterministically") {
  Optimizer opt = parameterless(10, Mode::adapt_lambda);
  Rng a(5);
  const auto xs = opt.ask(a);
  CHECK(xs.size() == 2);
  CHECK(xs[0].size() == 10);

  opt.lambda = 7;  // as if lambda_r adapted to 7.4 and was rounded
  Rng b(5);
  const auto ys = opt.ask(b);
  CHECK(ys.size() == 7);

  Optimizer opt2 = parameterless(10, Mode::adapt_lambda);
  opt2.lambda = 7;
  Rng c(5);
  CHECK(opt2.ask(c) == ys);
}

TEST_CASE("lambda rounding is half away from zero") {
  CHECK(std::llround(7.4) == 7);
  CHECK(std::llround(7.5) == 8);
  CHECK(std::llround(2.5) == 3);
}

TEST_CASE("natural gradient estimate: hand example") {
  const ThetaParams theta{std::vector<double>{0.5, 0.5}};
  const std::vector<BitString> xs{{1, 1}, {0, 0}};
  // x1 better under minimization
  const UtilityBatch u = ranking_utilities(std::vector<double>{0.0, 2.0});
  const auto grad = natural_gradient_estimate(theta, xs, u);
  CHECK(grad[0] == 1.0);
  CHECK(grad[1] == 1.0);

  // all utilities equal: centered weights vanish
  const UtilityBatch tie = ranking_utilities(std::vector<double>{1.0, 1.0});
  const auto zero = natural_gradient_estimate(theta, xs, tie);
  CHECK(zero == std::vector<double>{0.0, 0.0});

  CHECK_THROWS_AS(
      natural_gradient_estimate(theta, {{1, 1}}, u), std::invalid_argument);
}

TEST_CASE("natural gradient matches exact enumeration, bounded preference") {
  // per-sample utility W = exp(-OneMax), so single-point enumeration is the
  // population quantity; sample-mean centering scales it by (1 - 1/lambda)
  const std::size_t n = 8;
  const std::size_t lambda = 6;
  Rng setup(99);
  std::vector<double> raw(n);
  for (double& v : raw) v = 0.2 + 0.6 * setup.uniform();
  const ThetaParams theta = project(raw, n);

  std::vector<double> exact(n, 0.0);
  for (const BitString& x : test::all_bitstrings(n)) {
    const double p = test::prob_of(theta, x);
    const double w = std::exp(-test::onemax_value(x));
    for (std::size_t k = 0; k < n; ++k) {
      exact[k] += p * w * (static_cast<double>(x[k]) - theta.probs[k]);
    }
  }
  const double centering = 1.0 - 1.0 / static_cast<double>(lambda);
  for (double& v : exact) v *= centering;

  const int batches = 20000;
  std::vector<double> mean(n, 0.0), sq(n, 0.0);
  Rng rng(2718);
  for (int b = 0; b < batches; ++b) {
    Rng stream = rng.child(b);
    const auto xs = sample(theta, lambda, stream);
    std::vector<double> f(lambda);
    for (std::size_t i = 0; i < lambda; ++i) f[i] = test::onemax_value(xs[i]);
    const auto grad =
        natural_gradient_estimate(theta, xs, bounded_utilities(f));
    for (std::size_t k = 0; k < n; ++k) {
      mean[k] += grad[k];
      sq[k] += grad[k] * grad[k];
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    mean[k] /= batches;
    const double var = sq[k] / batches - mean[k] * mean[k];
    const double se = std::sqrt(var / batches);
    CHECK(std::abs(mean[k] - exact[k]) < 4.0 * se);
  }
}

TEST_CASE("natural gradient matches exact enumeration, ranking preference") {
  // lambda = 2 at n = 2: enumerate all 16 equally likely batches
  const ThetaParams theta{std::vector<double>{0.5, 0.5}};
  const auto singles = test::all_bitstrings(2);
  std::vector<double> exact(2, 0.0);
  for (const BitString& x1 : singles) {
    for (const BitString& x2 : singles) {
      const std::vector<double> f{test::onemax_value(x1),
                                  test::onemax_value(x2)};
      const auto grad =
          natural_gradient_estimate(theta, {x1, x2}, ranking_utilities(f));
      exact[0] += grad[0] / 16.0;
      exact[1] += grad[1] / 16.0;
    }
  }

  const int batches = 20000;
  Rng rng(314);
  std::vector<double> mean(2, 0.0), sq(2, 0.0);
  for (int b = 0; b < batches; ++b) {
    Rng stream = rng.child(b);
    const auto xs = sample(theta, 2, stream);
    const std::vector<double> f{test::onemax_value(xs[0]),
                                test::onemax_value(xs[1])};
    const auto grad =
        natural_gradient_estimate(theta, xs, ranking_utilities(f));
    for (std::size_t k = 0; k < 2; ++k) {
      mean[k] += grad[k];
      sq[k] += grad[k] * grad[k];
    }
  }
  for (std::size_t k = 0; k < 2; ++k) {
    mean[k] /= batches;
    const double se =
        std::sqrt((sq[k] / batches - mean[k] * mean[k]) / batches);
    CHECK(std::abs(mean[k] - exact[k]) < 4.0 * se);
  }
}

TEST_CASE("tell skips everything but counters when variance is zero") {
  Optimizer opt = parameterless(20, Mode::adapt_lambda);
  Rng rng(6);
  const auto xs = opt.ask(rng);
  const Optimizer before = opt;
  opt.tell(xs, std::vector<double>(xs.size(), 3.0));
  CHECK(opt.iteration == before.iteration + 1);
  CHECK(opt.f_calls == before.f_calls + xs.size());
  CHECK(opt.theta.probs == before.theta.probs);
  CHECK(opt.s == before.s);
  CHECK(opt.gamma == before.gamma);
  CHECK(opt.lambda_r == before.lambda_r);
  CHECK(opt.lambda == before.lambda);
  CHECK(opt.epsilon == before.epsilon);
}

TEST_CASE("first non-skipped tell sets gamma to beta(2-beta)") {
  Optimizer opt = parameterless(100, Mode::adapt_lambda);
  Rng rng(7);
  const auto xs = opt.ask(rng);
  opt.tell(xs, std::vector<double>{1.0, 2.0});
  CHECK(opt.gamma == doctest::Approx(0.19).epsilon(1e-12));
}

TEST_CASE("lambda_r is unchanged when |s|^2 equals alpha gamma") {
  CHECK(lambda_r_step(7.3, 0.1, 0.25, 0.375, 1.5, 2.0, 100.0) == 7.3);
  // clipping
  CHECK(lambda_r_step(1.0, 0.1, 0.25, 0.375, 1.5, 2.0, 100.0) == 2.0);
  CHECK(lambda_r_step(500.0, 0.1, 0.25, 0.375, 1.5, 2.0, 100.0) == 100.0);
}

TEST_CASE("snr normalizer fixed point is one") {
  CHECK(snr_normalizer_fixed_point(0.1) == doctest::Approx(1.0));
  CHECK(snr_normalizer_fixed_point(1.0) == 1.0);
  CHECK_THROWS_AS(snr_normalizer_fixed_point(0.0), std::invalid_argument);
  CHECK_THROWS_AS(snr_normalizer_fixed_point(1.5), std::invalid_argument);
}

TEST_CASE("gamma increases strictly toward one") {
  Optimizer opt = parameterless(30, Mode::adapt_lambda);
  Rng rng(12);
  double prev = 0.0;
  for (int t = 0; t < 300; ++t) {
    const auto xs = opt.ask(rng.child(t));
    Rng noise = rng.child(100000 + t);
    opt.tell(xs, random_distinct_f(xs.size(), noise));
    // strictly increasing until the recursion saturates in double precision
    if (t < 50) {
      CHECK(opt.gamma > prev);
    }
    CHECK(opt.gamma >= prev);
    CHECK(opt.gamma <= 1.0);
    prev = opt.gamma;
  }
  CHECK(prev > 0.99);
}

TEST_CASE("gamma stays in [0,1] under adaptive step size") {
  Optimizer opt = parameterless(30, Mode::adapt_epsilon);
  Rng rng(13);
  for (int t = 0; t < 300; ++t) {
    const auto xs = opt.ask(rng.child(t));
    Rng noise = rng.child(200000 + t);
    opt.tell(xs, random_distinct_f(xs.size(), noise));
    CHECK(opt.gamma >= 0.0);
    CHECK(opt.gamma <= 1.0);
  }
}

TEST_CASE("utility scale invariance is bit exact at c = 7") {
  Optimizer a = parameterless(16, Mode::adapt_lambda);
  Optimizer b = parameterless(16, Mode::adapt_lambda);
  Rng rng(77);
  for (int t = 0; t < 60; ++t) {
    const auto xs_a = a.ask(rng.child(t));
    const auto xs_b = b.ask(rng.child(t));
    REQUIRE(xs_a == xs_b);
    Rng noise = rng.child(500000 + t);
    // integer-valued ranking utilities of a tie-free batch
    const UtilityBatch u =
        ranking_utilities(random_distinct_f(xs_a.size(), noise));
    std::vector<double> scaled = u.utilities;
    for (double& w : scaled) w *= 7.0;
    a.tell_utilities(xs_a, u.utilities);
    b.tell_utilities(xs_b, scaled);
    REQUIRE(a.theta.probs == b.theta.probs);
    REQUIRE(a.s == b.s);
    REQUIRE(a.gamma == b.gamma);
    REQUIRE(a.lambda_r == b.lambda_r);
    REQUIRE(a.lambda == b.lambda);
    REQUIRE(a.epsilon == b.epsilon);
  }
}

TEST_CASE("tell_utilities validates the batch") {
  Optimizer opt = parameterless(4, Mode::adapt_lambda);
  Rng rng(3);
  const auto xs = opt.ask(rng);
  CHECK_THROWS_AS(opt.tell_utilities(xs, std::vector<double>{1.0, -0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(opt.tell_utilities(xs, std::vector<double>{0.0, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(opt.tell_utilities(xs, std::vector<double>{1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      opt.tell(xs, std::vector<double>{1.0, 2.0, 3.0}),
      std::invalid_argument);
}

TEST_CASE("state invariants hold along a noisy run") {
  Optimizer opt = parameterless(20, Mode::adapt_lambda);
  Rng rng(21);
  for (int t = 0; t < 400; ++t) {
    const auto xs = opt.ask(rng.child(t));
    Rng noise = rng.child(900000 + t);
    opt.tell(xs, random_distinct_f(xs.size(), noise));

    CHECK(opt.lambda_r >= 2.0);
    CHECK(opt.lambda_r <= 20.0);
    CHECK(opt.lambda == static_cast<int>(std::llround(opt.lambda_r)));
    for (const double p : opt.theta.probs) {
      CHECK(p >= 1.0 / 20.0);
      CHECK(p <= 1.0 - 1.0 / 20.0);
    }
  }
}

TEST_CASE("adaptive step size keeps lambda at the minimum") {
  Optimizer opt = parameterless(25, Mode::adapt_epsilon);
  const double base = opt.epsilon_base;
  Rng rng(31);
  for (int t = 0; t < 200; ++t) {
    const auto xs = opt.ask(rng.child(t));
    REQUIRE(xs.size() == 2);
    Rng noise = rng.child(700000 + t);
    opt.tell(xs, random_distinct_f(2, noise));
    CHECK(opt.lambda == 2);
    CHECK(opt.epsilon == opt.beta);
    CHECK(opt.epsilon == base / (opt.lambda_r / 2.0));
    CHECK(opt.epsilon <= base * (1.0 + 1e-12));
    CHECK(opt.epsilon >= base * 2.0 / 25.0 * (1.0 - 1e-12));
  }
}

TEST_CASE("fixed mode never touches the adaptation state") {
  Optimizer opt = baseline(BaselineKind::cga, 12);
  Rng rng(41);
  for (int t = 0; t < 200; ++t) {
    const auto xs = opt.ask(rng.child(t));
    Rng noise = rng.child(800000 + t);
    opt.tell(xs, random_distinct_f(2, noise));
    CHECK(opt.s == std::vector<double>(12, 0.0));
    CHECK(opt.gamma == 0.0);
    CHECK(opt.lambda_r == 2.0);
    CHECK(opt.lambda == 2);
    CHECK(opt.epsilon == doctest::Approx(1.0 / 12.0));
  }
  CHECK(opt.iteration == 200);
  CHECK(opt.f_calls == 400);
}

TEST_CASE("umda unit step is the maximum likelihood frequency update") {
  // Injective linear objective: ties happen only between duplicate strings,
  // where averaging and selection coincide. Enumerate every batch.
  const std::size_t n = 4;
  const std::size_t lambda = 4;
  const std::vector<double> weights{1.0, 2.0, 4.0, 8.0};
  const auto singles = test::all_bitstrings(n);

  auto f_of = [&](const BitString& x) {
    double v = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      v += weights[k] * (1.0 - static_cast<double>(x[k]));
    }
    return v;
  };

  std::size_t checked = 0;
  for (std::size_t code = 0; code < (1u << (n * lambda)); ++code) {
    std::vector<BitString> xs;
    std::vector<double> f;
    for (std::size_t i = 0; i < lambda; ++i) {
      xs.push_back(singles[(code >> (n * i)) & 0xF]);
      f.push_back(f_of(xs.back()));
    }
    Optimizer opt = baseline(BaselineKind::umda, n, static_cast<int>(lambda));
    opt.tell(xs, f);

    if (top_mu_utilities(f).var_w == 0.0) {
      // a fully tied batch carries no signal and is skipped
      REQUIRE(opt.theta.probs == std::vector<double>(n, 0.5));
      ++checked;
      continue;
    }
    // mu = ceil(4/4) = 1: the ML update is the projected best sample
    std::size_t best = 0;
    for (std::size_t i = 1; i < lambda; ++i) {
      if (f[i] < f[best]) best = i;
    }
    std::vector<double> ml(n);
    for (std::size_t k = 0; k < n; ++k) {
      ml[k] = static_cast<double>(xs[best][k]);
    }
    const ThetaParams expected = project(ml, n);
    REQUIRE(opt.theta.probs == expected.probs);
    ++checked;
  }
  CHECK(checked == 65536);
}

TEST_CASE("umda at n = 2 degenerates to the fixed point of the projection") {
  // the projection interval [1/2, 1/2] pins theta at one half
  const auto singles = test::all_bitstrings(2);
  for (const BitString& x1 : singles) {
    for (const BitString& x2 : singles) {
      for (const BitString& x3 : singles) {
        for (const BitString& x4 : singles) {
          Optimizer opt = baseline(BaselineKind::umda, 2, 4);
          const std::vector<BitString> xs{x1, x2, x3, x4};
          std::vector<double> f;
          for (const BitString& x : xs) f.push_back(test::onemax_value(x));
          opt.tell(xs, f);
          REQUIRE(opt.theta.probs == std::vector<double>{0.5, 0.5});
        }
      }
    }
  }
}

TEST_CASE("pure noise keeps the SNR surrogate near one") {
  Optimizer opt = parameterless(100, Mode::adapt_lambda);
  Rng rng(53);
  double ratio_sum = 0.0;
  const int iters = 2000;
  for (int t = 0; t < iters; ++t) {
    const auto xs = opt.ask(rng.child(t));
    Rng noise = rng.child(1000000 + t);
    std::vector<double> f(xs.size());
    for (double& v : f) v = noise.gaussian();
    opt.tell(xs, f);
    double sq = 0.0;
    for (const double v : opt.s) sq += v * v;
    ratio_sum += sq / opt.gamma;
  }
  CHECK(ratio_sum / iters > 0.7);
  CHECK(ratio_sum / iters < 1.4);
}

TEST_CASE("snapshot round trip continues bit identically") {
  Optimizer opt = parameterless(12, Mode::adapt_lambda);
  Rng rng(61);
  for (int t = 0; t < 25; ++t) {
    const auto xs = opt.ask(rng.child(t));
    Rng noise = rng.child(300000 + t);
    opt.tell(xs, random_distinct_f(xs.size(), noise));
  }
  std::stringstream buffer;
  save_snapshot(opt, buffer);
  Optimizer restored = load_snapshot(buffer);
  CHECK(restored.theta.probs == opt.theta.probs);
  CHECK(restored.s == opt.s);
  CHECK(restored.gamma == opt.gamma);
  CHECK(restored.lambda_r == opt.lambda_r);
  CHECK(restored.iteration == opt.iteration);
  CHECK(restored.f_calls == opt.f_calls);

  for (int t = 25; t < 50; ++t) {
    const auto xs = opt.ask(rng.child(t));
    const auto ys = restored.ask(rng.child(t));
    REQUIRE(xs == ys);
    Rng noise_a = rng.child(300000 + t);
    Rng noise_b = rng.child(300000 + t);
    opt.tell(xs, random_distinct_f(xs.size(), noise_a));
    restored.tell(ys, random_distinct_f(ys.size(), noise_b));
  }
  CHECK(restored.theta.probs == opt.theta.probs);
  CHECK(restored.s == opt.s);
  CHECK(restored.lambda_r == opt.lambda_r);
}

TEST_CASE("fisher ablation flag changes the accumulator, not theta") {
  Optimizer post = parameterless(10, Mode::adapt_lambda);
  Optimizer pre = parameterless(10, Mode::adapt_lambda);
  pre.fisher_at_updated_theta = false;
  Rng rng(71);
  const auto xs_a = post.ask(rng.child(0));
  const auto xs_b = pre.ask(rng.child(0));
  REQUIRE(xs_a == xs_b);
  const std::vector<double> f{0.0, 1.0};
  post.tell(xs_a, f);
  pre.tell(xs_b, f);
  CHECK(post.theta.probs == pre.theta.probs);
  CHECK(post.s != pre.s);
}

TEST_SUITE_END();
