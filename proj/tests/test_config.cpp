#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gibbs_causal/config.hpp"

namespace {

gc::json parse(const char* text) { return gc::json::parse(text); }

}  // namespace

TEST_CASE("load_config_file catches IO and syntax problems") {
  CHECK_THROWS_AS(gc::load_config_file("/no/such/file.json"), gc::config_error);

  const auto p = std::filesystem::temp_directory_path() / "cfg_bad.json";
  std::ofstream(p) << "{ not json";
  CHECK_THROWS_AS(gc::load_config_file(p.string()), gc::config_error);
  std::ofstream(p) << "[1,2,3]";
  CHECK_THROWS_AS(gc::load_config_file(p.string()), gc::config_error);
  std::ofstream(p) << "{\"dataset\": \"d.csv\"}";
  const gc::json j = gc::load_config_file(p.string());
  CHECK(j.at("dataset") == "d.csv");
}

TEST_CASE("fit config roundtrip") {
  const gc::json j = parse(R"({
    "dataset": "data.csv",
    "outcome": {"covariate_terms": ["x1", "x2"],
                "spline_terms": [{"column": "x1", "degree": 3}]},
    "ps": {"family": "logistic", "selectors": ["x1"], "marginal_treatment_prob": 0.4},
    "prior": {"beta_mean": 0.0, "beta_sd": 25.0, "sigma_scale": 10.0},
    "sampler": {"n_iterations": 800, "n_burnin": 200, "seed": 42},
    "alpha_prior_sd": 50.0,
    "weighted": false,
    "out_dir": "out"
  })");
  const gc::FitConfig cfg = gc::parse_fit_config(j);
  CHECK(cfg.dataset_path == "data.csv");
  CHECK(cfg.outcome.covariate_terms == std::vector<std::string>{"x1", "x2"});
  REQUIRE(cfg.outcome.spline_terms.size() == 1);
  CHECK(cfg.outcome.spline_terms[0].column == "x1");
  REQUIRE(cfg.ps.has_value());
  CHECK(cfg.ps->family == gc::PsFamily::logistic);
  CHECK(cfg.ps->p_E == 0.4);
  CHECK(cfg.sampler.n_iterations == 800);
  CHECK(cfg.sampler.seed == 42);
  CHECK(cfg.alpha_prior_sd == 50.0);
  CHECK_FALSE(cfg.weighted);
  CHECK(cfg.out_dir == "out");

  const gc::PriorSpec prior = gc::resolve_prior(cfg.prior, 5);
  CHECK(prior.beta_mean.size() == 5);
  CHECK(prior.beta_mean.cwiseAbs().maxCoeff() == 0.0);
  CHECK(prior.beta_sd.minCoeff() == 25.0);
  CHECK(prior.sigma_scale == 10.0);
}

TEST_CASE("fit config defaults are minimal") {
  const gc::FitConfig cfg = gc::parse_fit_config(parse(R"({"dataset": "d.csv"})"));
  CHECK(cfg.dataset_path == "d.csv");
  CHECK_FALSE(cfg.ps.has_value());
  CHECK(cfg.outcome.covariate_terms.empty());
  CHECK(cfg.weighted);
  CHECK(cfg.sampler.n_iterations == 4000);
  CHECK(cfg.out_dir == ".");
  CHECK(cfg.prior.is_null());
  const gc::PriorSpec prior = gc::resolve_prior(cfg.prior, 2);
  CHECK(prior.beta_sd.minCoeff() == 100.0);
}

TEST_CASE("strict key checking") {
  CHECK_THROWS_AS(gc::parse_fit_config(parse(R"({"dataset": "d.csv", "extra": 1})")),
                  gc::config_error);
  CHECK_THROWS_AS(gc::parse_fit_config(parse(R"({"dataset": "d.csv",
    "outcome": {"covariates": ["x"]}})")),
                  gc::config_error);
  CHECK_THROWS_AS(gc::parse_fit_config(parse(R"({"dataset": "d.csv",
    "sampler": {"iterations": 10}})")),
                  gc::config_error);
  CHECK_THROWS_AS(gc::parse_fit_config(parse(R"({"dataset": "d.csv",
    "prior": {"beta_var": 4}})")),
                  gc::config_error);
  CHECK_THROWS_AS(gc::parse_fit_config(parse(R"({"dataset": "d.csv",
    "ps": {"family": "logistic", "pE": 0.5}})")),
                  gc::config_error);
}

TEST_CASE("type and range violations") {
  CHECK_THROWS_AS(gc::parse_fit_config(parse(R"({})")), gc::config_error);  // dataset missing
  CHECK_THROWS_AS(gc::parse_fit_config(parse(R"({"dataset": 3})")), gc::config_error);
  CHECK_THROWS_AS(gc::parse_fit_config(parse(R"({"dataset": "d.csv", "weighted": "yes"})")),
                  gc::config_error);
  CHECK_THROWS_AS(gc::parse_fit_config(parse(R"({"dataset": "d.csv", "alpha_prior_sd": -1})")),
                  gc::config_error);
  CHECK_THROWS_AS(
      gc::parse_fit_config(parse(R"({"dataset": "d.csv",
        "sampler": {"n_iterations": 100, "n_burnin": 100}})")),
      gc::config_error);
  CHECK_THROWS_AS(
      gc::parse_fit_config(parse(R"({"dataset": "d.csv",
        "ps": {"family": "probit"}})")),
      gc::config_error);
  CHECK_THROWS_AS(
      gc::parse_fit_config(parse(R"({"dataset": "d.csv",
        "ps": {"family": "logistic", "marginal_treatment_prob": 1.0}})")),
      gc::config_error);
  CHECK_THROWS_AS(
      gc::parse_fit_config(parse(R"({"dataset": "d.csv",
        "outcome": {"covariate_terms": ["x", "x"]}})")),
      gc::config_error);
  CHECK_THROWS_AS(
      gc::parse_fit_config(parse(R"({"dataset": "d.csv",
        "outcome": {"spline_terms": [{"column": "x", "degree": 0}]}})")),
      gc::config_error);
  CHECK_THROWS_AS(
      gc::parse_fit_config(parse(R"({"dataset": "d.csv",
        "outcome": {"spline_terms": [{"column": "x", "knot_rule": "uniform"}]}})")),
      gc::config_error);
  // ps covariate without a ps block
  CHECK_THROWS_AS(
      gc::parse_fit_config(parse(R"({"dataset": "d.csv",
        "outcome": {"include_ps_covariate": true}})")),
      gc::config_error);
}

TEST_CASE("prior arrays must match the design width") {
  const gc::json prior = parse(R"({"beta_mean": [1, 2, 3], "beta_sd": [1, 1, 1]})");
  const gc::PriorSpec ok = gc::resolve_prior(prior, 3);
  CHECK(ok.beta_mean[2] == 3.0);
  CHECK_THROWS_AS(gc::resolve_prior(prior, 4), gc::config_error);
  CHECK_THROWS_AS(gc::resolve_prior(parse(R"({"beta_sd": -2})"), 3), gc::config_error);
  CHECK_THROWS_AS(gc::resolve_prior(parse(R"({"beta_mean": "zero"})"), 3), gc::config_error);
  CHECK_THROWS_AS(gc::resolve_prior(parse(R"({"sigma_scale": 0})"), 3), gc::config_error);
}

TEST_CASE("abdr config roundtrip and validation") {
  const gc::json j = parse(R"({
    "dataset": "d.csv",
    "outcome": {"covariate_terms": ["x"]},
    "ps": {"family": "latent_uniform"},
    "n_draws": 500,
    "seed": 7,
    "weighted": false
  })");
  const gc::AbdrConfig cfg = gc::parse_abdr_config(j);
  CHECK(cfg.n_draws == 500);
  CHECK(cfg.seed == 7);
  CHECK(cfg.ps.family == gc::PsFamily::latent_uniform);
  CHECK_FALSE(cfg.weighted);

  CHECK_THROWS_AS(gc::parse_abdr_config(parse(R"({"dataset": "d.csv"})")),
                  gc::config_error);  // ps required
  CHECK_THROWS_AS(gc::parse_abdr_config(parse(R"({"dataset": "d.csv",
    "ps": {"family": "logistic"}, "n_draws": 0})")),
                  gc::config_error);
}

TEST_CASE("simulate config covers every scenario string") {
  const gc::json base = parse(R"({
    "study": {
      "dgp": {"example": "two", "n": 100},
      "estimator": "abdr",
      "model_variant": "bspline_x1",
      "scenario": "scenario_I",
      "n_replicates": 10,
      "bootstrap_draws": 200,
      "master_seed": 99
    },
    "out_dir": "runs"
  })");
  const gc::SimulateConfig cfg = gc::parse_simulate_config(base);
  CHECK(cfg.study.dgp.example == gc::DgpSpec::Example::two);
  CHECK(cfg.study.dgp.n == 100);
  CHECK(cfg.study.estimator == gc::Estimator::abdr);
  CHECK(cfg.study.model_variant == gc::ModelVariant::bspline_x1);
  CHECK(cfg.study.scenario == gc::Scenario::scenario_I);
  CHECK(cfg.study.n_replicates == 10);
  CHECK(cfg.study.bootstrap_draws == 200);
  CHECK(cfg.study.master_seed == 99);
  CHECK(cfg.out_dir == "runs");

  auto with = [&](const char* key, const gc::json& v) {
    gc::json j = base;
    j["study"][key] = v;
    return j;
  };
  CHECK(gc::parse_simulate_config(with("scenario", "scenario_II")).study.scenario ==
        gc::Scenario::scenario_II);
  CHECK_THROWS_AS(gc::parse_simulate_config(with("scenario", "case9")), gc::config_error);
  CHECK_THROWS_AS(gc::parse_simulate_config(with("estimator", "mcmc")), gc::config_error);
  CHECK_THROWS_AS(gc::parse_simulate_config(with("model_variant", "quadratic")),
                  gc::config_error);
  // scenario/example compatibility enforced by StudySpec::validate
  CHECK_THROWS_AS(gc::parse_simulate_config(with("scenario", "both_incorrect")),
                  gc::config_error);

  gc::json ex1 = base;
  ex1["study"]["dgp"] = parse(R"({"example": "one", "variance_convention": "sd",
                                  "theta1": 4.0, "x_disp": 2.0})");
  ex1["study"]["scenario"] = "both_incorrect";
  ex1["study"]["model_variant"] = "plain";
  const gc::SimulateConfig c1 = gc::parse_simulate_config(ex1);
  CHECK(c1.study.dgp.variance_convention == gc::DgpSpec::VarConv::sd);
  CHECK(c1.study.dgp.theta1 == 4.0);
  CHECK(c1.study.dgp.x_disp == 2.0);
  CHECK(c1.study.dgp.truth() == 4.0);

  gc::json bad = base;
  bad["study"].erase("dgp");
  CHECK_THROWS_AS(gc::parse_simulate_config(bad), gc::config_error);
}
