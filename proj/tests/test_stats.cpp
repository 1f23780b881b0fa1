#include <doctest.h>

#include <cmath>
#include <random>

#include "gibbs_causal/rng.hpp"
#include "gibbs_causal/stats.hpp"

using gc::VectorXd;

TEST_CASE("moments on a hand-checked vector") {
  VectorXd v(5);
  v << 2, 4, 4, 4, 6;
  CHECK(gc::mean(v) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(gc::variance(v) == doctest::Approx(2.0).epsilon(1e-15));  // n-1 denominator
  CHECK(gc::sd(v) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  VectorXd single(1);
  single << 7;
  CHECK(gc::variance(single) == 0.0);
}

TEST_CASE("quantile: linear interpolation of order statistics") {
  VectorXd v(10);
  for (int i = 0; i < 10; ++i) v[i] = 10.0 * (i + 1);  // 10..100
  CHECK(gc::quantile(v, 0.0) == doctest::Approx(10.0));
  CHECK(gc::quantile(v, 1.0) == doctest::Approx(100.0));
  // h = (n-1)p = 2.25 -> 30 + 0.25 * 10
  CHECK(gc::quantile(v, 0.25) == doctest::Approx(32.5).epsilon(1e-14));
  CHECK(gc::quantile(v, 0.5) == doctest::Approx(55.0).epsilon(1e-14));
  CHECK(gc::quantile(v, 0.75) == doctest::Approx(77.5).epsilon(1e-14));

  // unsorted input gets sorted internally
  VectorXd shuffled(4);
  shuffled << 4, 1, 3, 2;
  CHECK(gc::quantile(shuffled, 0.5) == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("quantile convention on a fine grid") {
  // 10001 equally spaced points on [0,1]: the 2.5% quantile lands exactly
  VectorXd v(10001);
  for (int i = 0; i <= 10000; ++i) v[i] = i / 10000.0;
  CHECK(gc::quantile(v, 0.025) == doctest::Approx(0.025).epsilon(1e-12));
  CHECK(gc::quantile(v, 0.975) == doctest::Approx(0.975).epsilon(1e-12));
}

TEST_CASE("summarize_draws matches direct quantiles") {
  gc::Rng rng = gc::make_rng(99, 0);
  VectorXd v(4001);
  for (auto& x : v) x = gc::rnorm(rng) * 2.0 + 1.0;
  const gc::Summary s = gc::summarize_draws(v);
  CHECK(s.mean == doctest::Approx(gc::mean(v)).epsilon(1e-15));
  CHECK(s.sd == doctest::Approx(gc::sd(v)).epsilon(1e-15));
  CHECK(s.q2_5 == doctest::Approx(gc::quantile(v, 0.025)).epsilon(1e-15));
  CHECK(s.q50 == doctest::Approx(gc::quantile(v, 0.5)).epsilon(1e-15));
  CHECK(s.q97_5 == doctest::Approx(gc::quantile(v, 0.975)).epsilon(1e-15));
}

// independent re-derivation of the initial-monotone-pairs truncation,
// with autocovariances computed by the direct O(n^2) sum
static double ess_oracle(const VectorXd& x) {
  const auto n = x.size();
  const double m = x.mean();
  auto acov = [&](Eigen::Index k) {
    double s = 0;
    for (Eigen::Index i = 0; i + k < n; ++i) s += (x[i] - m) * (x[i + k] - m);
    return s / double(n);
  };
  const double c0 = acov(0);
  double sum = 0, prev = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; 2 * k + 1 < n; ++k) {
    double pair = acov(2 * k) + acov(2 * k + 1);
    if (pair <= 0) break;
    pair = std::min(pair, prev);  // monotone envelope
    prev = pair;
    sum += pair;
  }
  const double denom = std::max(2.0 * sum / c0 - 1.0, 1e-6);
  return double(n) / denom;
}

TEST_CASE("ess agrees with an independent implementation on an AR(1) chain") {
  gc::Rng rng = gc::make_rng(7, 3);
  const double rho = 0.6;
  VectorXd x(600);
  x[0] = gc::rnorm(rng);
  for (int i = 1; i < 600; ++i) x[i] = rho * x[i - 1] + std::sqrt(1 - rho * rho) * gc::rnorm(rng);
  const auto got = gc::ess(x);
  REQUIRE(got.has_value());
  CHECK(*got == doctest::Approx(ess_oracle(x)).epsilon(1e-10));
}

TEST_CASE("ess calibration: iid, correlated, constant") {
  gc::Rng rng = gc::make_rng(11, 0);
  VectorXd iid(10000);
  for (auto& x : iid) x = gc::rnorm(rng);
  const auto e_iid = gc::ess(iid);
  REQUIRE(e_iid.has_value());
  CHECK(*e_iid > 8000.0);
  CHECK(*e_iid < 12000.0);

  // AR(1) rho = 0.9: asymptotic ESS = n (1-rho)/(1+rho)
  const double rho = 0.9;
  VectorXd ar(20000);
  ar[0] = gc::rnorm(rng);
  for (int i = 1; i < ar.size(); ++i)
    ar[i] = rho * ar[i - 1] + std::sqrt(1 - rho * rho) * gc::rnorm(rng);
  const auto e_ar = gc::ess(ar);
  REQUIRE(e_ar.has_value());
  const double expect = ar.size() * (1 - rho) / (1 + rho);
  CHECK(*e_ar > 0.7 * expect);
  CHECK(*e_ar < 1.3 * expect);

  CHECK_FALSE(gc::ess(VectorXd::Constant(100, 3.0)).has_value());
  CHECK_FALSE(gc::ess(VectorXd::Constant(2, 1.0)).has_value());  // too short
}

TEST_CASE("split_rhat near 1 for stationary chains, large under drift") {
  gc::Rng rng = gc::make_rng(13, 1);
  VectorXd x(8000);
  for (auto& v : x) v = gc::rnorm(rng);
  const auto r = gc::split_rhat(x);
  REQUIRE(r.has_value());
  CHECK(*r > 0.99);
  CHECK(*r < 1.02);

  VectorXd shifted = x;
  shifted.tail(4000).array() += 5.0;  // second half far away
  const auto r2 = gc::split_rhat(shifted);
  REQUIRE(r2.has_value());
  CHECK(*r2 > 1.5);

  CHECK_FALSE(gc::split_rhat(VectorXd::Constant(50, 2.0)).has_value());
}

TEST_CASE("silverman bandwidth: scale equivariance and normal-reference value") {
  gc::Rng rng = gc::make_rng(17, 2);
  VectorXd x(100000);
  for (auto& v : x) v = gc::rnorm(rng);
  const double bw = gc::silverman_bandwidth(x);
  // 0.9 min(sd, IQR/1.349) n^{-1/5}; both spread measures ~1 here
  CHECK(bw == doctest::Approx(0.9 * std::pow(100000.0, -0.2)).epsilon(0.05));

  VectorXd scaled = 3.0 * x;
  CHECK(gc::silverman_bandwidth(scaled) == doctest::Approx(3.0 * bw).epsilon(1e-10));
  CHECK(gc::silverman_bandwidth(x) > 0.0);
}

TEST_CASE("kde grid: shape, normalization, mode location") {
  gc::Rng rng = gc::make_rng(19, 4);
  VectorXd x(20000);
  for (auto& v : x) v = gc::rnorm(rng);
  const gc::DensityGrid g = gc::kde_grid(x, 256);
  REQUIRE(g.x.size() == 256);
  REQUIRE(g.density.size() == 256);
  CHECK((g.density.array() >= 0.0).all());
  for (int i = 1; i < g.x.size(); ++i) CHECK(g.x[i] > g.x[i - 1]);

  const double bw = gc::silverman_bandwidth(x);
  CHECK(g.x[0] == doctest::Approx(x.minCoeff() - 3 * bw).epsilon(1e-12));
  CHECK(g.x[g.x.size() - 1] == doctest::Approx(x.maxCoeff() + 3 * bw).epsilon(1e-12));

  double integral = 0;
  for (int i = 1; i < g.x.size(); ++i)
    integral += 0.5 * (g.density[i] + g.density[i - 1]) * (g.x[i] - g.x[i - 1]);
  CHECK(integral == doctest::Approx(1.0).epsilon(0.01));

  Eigen::Index peak;
  g.density.maxCoeff(&peak);
  CHECK(std::abs(g.x[peak]) < 0.25);  // single-sample argmax wobbles ~0.1
  CHECK(g.density[peak] == doctest::Approx(1.0 / std::sqrt(2 * M_PI)).epsilon(0.1));

  // the mode *location* is 0: averaging over replications takes out the
  // argmax jitter that a single draw of this size cannot
  double mode_sum = 0;
  for (uint64_t s = 0; s < 30; ++s) {
    gc::Rng r = gc::make_rng(23, s);
    VectorXd z(20000);
    for (auto& v : z) v = gc::rnorm(r);
    const gc::DensityGrid gz = gc::kde_grid(z, 256);
    Eigen::Index pk;
    gz.density.maxCoeff(&pk);
    mode_sum += gz.x[pk];
  }
  CHECK(std::abs(mode_sum / 30.0) < 0.05);
}

TEST_CASE("kde grid input validation") {
  VectorXd tiny(5);
  tiny << 1, 2, 3, 4, 5;
  CHECK_THROWS(gc::kde_grid(tiny, 64));     // < 10 samples
  VectorXd ok = VectorXd::LinSpaced(50, 0.0, 1.0);
  CHECK_THROWS(gc::kde_grid(ok, 16));       // grid below minimum
  CHECK_NOTHROW(gc::kde_grid(ok, 32));
}
