#include <doctest.h>

#include <cmath>

#include "gibbs_causal/bootstrap.hpp"

namespace {

gc::Dataset boot_dataset(int n, unsigned seed) {
  gc::Rng rng = gc::make_rng(seed, 0);
  gc::Dataset ds;
  ds.names = {"x"};
  ds.y.resize(n);
  ds.d.resize(n);
  ds.X.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    ds.X(i, 0) = gc::rnorm(rng);
    ds.d[i] = gc::runif(rng) < gc::expit(0.5 * ds.X(i, 0)) ? 1.0 : 0.0;
    ds.y[i] = 1.0 + 2.0 * ds.d[i] + 0.8 * ds.X(i, 0) + 0.5 * gc::rnorm(rng);
  }
  ds.d[0] = 0.0;
  ds.d[1] = 1.0;
  return ds;
}

}  // namespace

TEST_CASE("dirichlet weights: edge case and moments") {
  gc::Rng rng = gc::make_rng(71, 0);
  const gc::VectorXd one = gc::draw_dirichlet_weights(1, rng);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == 1.0);

  // Dirichlet(1,..,1) with n=5: E[xi] = 1/5, Var[xi] = (1/5)(4/5)/6
  const int n = 5, S = 20000;
  double sum0 = 0, sumsq0 = 0;
  for (int s = 0; s < S; ++s) {
    const gc::VectorXd xi = gc::draw_dirichlet_weights(n, rng);
    CHECK(xi.minCoeff() > 0);
    CHECK(xi.sum() == doctest::Approx(1.0).epsilon(1e-12));
    sum0 += xi[0];
    sumsq0 += xi[0] * xi[0];
  }
  const double mean = sum0 / S;
  const double var = sumsq0 / S - mean * mean;
  const double true_var = (1.0 / n) * (1.0 - 1.0 / n) / (n + 1);
  const double se_mean = std::sqrt(true_var / S);
  CHECK(std::abs(mean - 0.2) < 3 * se_mean);
  // SE of a variance estimate ~ var * sqrt(2/S) up to kurtosis; use 5x slack
  CHECK(std::abs(var - true_var) < 5 * true_var * std::sqrt(2.0 / S));
}

TEST_CASE("uniform xi with weighting off reduces to OLS") {
  const gc::Dataset ds = boot_dataset(60, 501);
  gc::BootstrapConfig cfg;
  cfg.ps.selectors = {"x"};
  cfg.outcome.covariate_terms = {"x"};
  cfg.outcome.include_ps_covariate = true;
  cfg.weighted = false;

  gc::Rng rng = gc::make_rng(1, 0);
  const gc::VectorXd xi = gc::VectorXd::Constant(60, 1.0 / 60.0);
  const gc::VectorXd draw = gc::abdr_draw(ds, cfg, xi, rng);

  // reference: fit the same PS by plain IRLS, build the same design, then an
  // ordinary least-squares solve straight from the normal equations
  const gc::MatrixXd psX = gc::ps_design(ds, {"x"});
  const gc::PsFit fit = gc::fit_logistic_irls(psX, ds.d, std::optional<gc::VectorXd>(xi));
  gc::VectorXd e(60);
  for (int i = 0; i < 60; ++i) e[i] = gc::expit(psX.row(i).dot(fit.gamma));
  const gc::DesignMatrix design = gc::build_design_matrix(cfg.outcome, ds, e);
  const gc::VectorXd ref =
      (design.M.transpose() * design.M).ldlt().solve(design.M.transpose() * ds.y);

  REQUIRE(draw.size() == ref.size() + 1);  // pred0_mean appended
  for (Eigen::Index j = 0; j < ref.size(); ++j)
    CHECK(draw[j] == doctest::Approx(ref[j]).epsilon(1e-10));

  const double pred0 =
      (design.M * ref).mean() - ref[gc::kTreatmentIndex] * ds.d.mean();
  CHECK(draw[ref.size()] == doctest::Approx(pred0).epsilon(1e-10));
}

TEST_CASE("rescaling xi leaves a draw invariant") {
  const gc::Dataset ds = boot_dataset(45, 502);
  gc::BootstrapConfig cfg;
  cfg.ps.selectors = {"x"};
  cfg.outcome.covariate_terms = {"x"};

  gc::Rng rng_xi = gc::make_rng(8, 1);
  const gc::VectorXd xi = gc::draw_dirichlet_weights(45, rng_xi);

  gc::Rng r1 = gc::make_rng(2, 2), r2 = gc::make_rng(2, 2), r3 = gc::make_rng(2, 2);
  const gc::VectorXd a = gc::abdr_draw(ds, cfg, xi, r1);
  const gc::VectorXd b = gc::abdr_draw(ds, cfg, gc::VectorXd(xi * 4.0), r2);   // power of two
  const gc::VectorXd c = gc::abdr_draw(ds, cfg, gc::VectorXd(xi * 3.7), r3);
  REQUIRE(a.size() == b.size());
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    CHECK(a[j] == b[j]);  // bitwise: scaling by 2^k only shifts exponents
    CHECK(c[j] == doctest::Approx(a[j]).epsilon(1e-12));
  }
}

TEST_CASE("latent family draws fresh uniforms and stays deterministic in the seed") {
  const gc::Dataset ds = boot_dataset(50, 503);
  gc::BootstrapConfig cfg;
  cfg.ps.family = gc::PsFamily::latent_uniform;
  cfg.outcome.covariate_terms = {"x"};
  cfg.n_draws = 40;
  cfg.seed = 909;

  const gc::PosteriorSamples s1 = gc::abdr_posterior(ds, cfg);
  const gc::PosteriorSamples s2 = gc::abdr_posterior(ds, cfg);
  REQUIRE(s1.draws.rows() == 40);
  CHECK((s1.draws - s2.draws).cwiseAbs().maxCoeff() == 0.0);
  CHECK(s1.labels == s2.labels);
  REQUIRE(s1.labels.size() == 4);  // intercept, d, x, pred0_mean
  CHECK(s1.labels[3] == "pred0_mean");

  cfg.seed = 910;
  const gc::PosteriorSamples s3 = gc::abdr_posterior(ds, cfg);
  CHECK((s1.draws - s3.draws).cwiseAbs().maxCoeff() > 0.0);

  // draw-order independence: draw s depends only on (seed, s)
  cfg.seed = 909;
  gc::Rng r7 = gc::make_rng(909, 7);
  const gc::VectorXd xi7 = gc::draw_dirichlet_weights(50, r7);
  const gc::VectorXd d7 = gc::abdr_draw(ds, cfg, xi7, r7);
  for (Eigen::Index j = 0; j < d7.size(); ++j) CHECK(d7[j] == s1.draws(7, j));
}

TEST_CASE("abdr summarizes like the sampler output") {
  const gc::Dataset ds = boot_dataset(150, 504);
  gc::BootstrapConfig cfg;
  cfg.ps.selectors = {"x"};
  cfg.outcome.covariate_terms = {"x"};
  cfg.n_draws = 300;
  cfg.seed = 11;

  const gc::PosteriorSamples s = gc::abdr_posterior(ds, cfg);
  const gc::Summary ate = gc::ate_from_samples(s.draws, s.labels);
  CHECK(std::abs(ate.mean - 2.0) < 0.5);  // truth recovered roughly
  CHECK(ate.q2_5 < ate.mean);
  CHECK(ate.mean < ate.q97_5);
  REQUIRE(s.blocks.size() == 1);
  CHECK(s.blocks[0].name == "bootstrap");
  CHECK(s.blocks[0].acceptance == 1.0);  // nothing discarded
  CHECK(s.auto_rejects == 0);
}

TEST_CASE("a degenerate design trips the discard guard") {
  gc::Dataset ds = boot_dataset(30, 505);
  ds.X.col(0).setZero();  // covariate column collinear with the intercept
  gc::BootstrapConfig cfg;
  cfg.ps.selectors = {};
  cfg.outcome.covariate_terms = {"x"};
  cfg.n_draws = 20;
  CHECK_THROWS_AS(gc::abdr_posterior(ds, cfg), gc::numeric_error);
}

TEST_CASE("config validation") {
  const gc::Dataset ds = boot_dataset(20, 506);
  gc::BootstrapConfig cfg;
  cfg.n_draws = 0;
  CHECK_THROWS_AS(cfg.validate(ds), gc::config_error);
  cfg.n_draws = 10;
  cfg.ps.selectors = {"zzz"};
  CHECK_THROWS_AS(cfg.validate(ds), gc::config_error);
}
