#include <catch2/catch_amalgamated.hpp>
#include <sfa/random.hpp>

#include <cmath>
#include <set>

using sfa::Rng;

TEST_CASE("same seed gives the same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.uniform() == b.uniform());
}

TEST_CASE("derive_seed separates streams") {
  Rng a(sfa::derive_seed(1, 0)), b(sfa::derive_seed(1, 1));
  int same = 0;
  for (int i = 0; i < 100; ++i)
    if (a.uniform() == b.uniform()) ++same;
  REQUIRE(same == 0);
  REQUIRE(sfa::derive_seed(1, 0) != sfa::derive_seed(2, 0));
}

TEST_CASE("uniform stays in the half-open unit interval") {
  Rng r(7);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("normal matches its first two moments") {
  Rng r(1234);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal(3.0, 2.0);
    s1 += x;
    s2 += x * x;
  }
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  REQUIRE(std::abs(mean - 3.0) < 0.02);
  REQUIRE(std::abs(std::sqrt(var) - 2.0) < 0.02);
}

TEST_CASE("uniform_int covers the inclusive range and nothing else") {
  Rng r(9);
  std::set<int> seen;
  for (int i = 0; i < 5000; ++i) {
    const int v = r.uniform_int(2, 6);
    REQUIRE(v >= 2);
    REQUIRE(v <= 6);
    seen.insert(v);
  }
  REQUIRE(seen.size() == 5);
  REQUIRE(r.uniform_int(4, 4) == 4);
}

TEST_CASE("shuffle permutes deterministically") {
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  Rng a(5);
  a.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  REQUIRE(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});

  std::vector<int> w{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  Rng b(5);
  b.shuffle(w);
  REQUIRE(v == w);
}

TEST_CASE("sample_indices draws unique sorted indices") {
  Rng r(11);
  const auto s = r.sample_indices(20, 8);
  REQUIRE(s.size() == 8);
  for (std::size_t i = 1; i < s.size(); ++i) REQUIRE(s[i - 1] < s[i]);
  REQUIRE(s.front() >= 0);
  REQUIRE(s.back() < 20);

  const auto all = Rng(1).sample_indices(5, 9);
  REQUIRE(all == std::vector<int>{0, 1, 2, 3, 4});
}
