#include <cmath>
#include <vector>

#include "doctest.h"
#include "igo/rng.hpp"

using igo::Rng;

TEST_SUITE_BEGIN("rng");

TEST_CASE("same seed reproduces the sequence") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
}

TEST_CASE("different seeds and children decorrelate") {
  Rng a(1);
  Rng b(2);
  CHECK(a.next_u64() != b.next_u64());

  Rng parent(7);
  Rng c0 = parent.child(0);
  Rng c1 = parent.child(1);
  CHECK(c0.next_u64() != c1.next_u64());

  // child derivation does not advance the parent
  Rng p1(7), p2(7);
  (void)p1.child(3);
  CHECK(p1.next_u64() == p2.next_u64());
}

TEST_CASE("child streams are stable regardless of draw order") {
  Rng parent(99);
  Rng early = parent.child(5);
  parent.next_u64();
  parent.next_u64();
  Rng late = parent.child(5);
  CHECK(early.next_u64() == late.next_u64());
}

TEST_CASE("uniform stays in [0,1) with mean near one half") {
  Rng rng(2024);
  double sum = 0.0;
  const int m = 100000;
  for (int i = 0; i < m; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // 4 sigma of the mean of m uniforms, sigma = 1/sqrt(12 m)
  CHECK(std::abs(sum / m - 0.5) < 4.0 / std::sqrt(12.0 * m));
}

TEST_CASE("gaussian moments") {
  Rng rng(5150);
  const int m = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < m; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sq += g * g;
  }
  const double mean = sum / m;
  const double var = sq / m - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(m)));
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("fnv1a64 basis and label sensitivity") {
  CHECK(igo::fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(igo::fnv1a64("onemax") != igo::fnv1a64("leadingones"));
  CHECK(igo::fnv1a64("cga") != igo::fnv1a64("pbil"));
}

TEST_SUITE_END();
