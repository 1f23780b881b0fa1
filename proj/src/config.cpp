#include "gibbs_causal/config.hpp"

#include <fstream>
#include <set>

#include "gibbs_causal/dataset.hpp"

namespace gc {

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw config_error(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      throw config_error(where + ": unknown key \"" + it.key() + "\"");
  }
}

double get_number(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw config_error(key + " must be a number");
  return j.at(key).get<double>();
}

long get_integer(const json& j, const std::string& key, long fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) throw config_error(key + " must be an integer");
  return j.at(key).get<long>();
}

bool get_bool(const json& j, const std::string& key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) throw config_error(key + " must be a boolean");
  return j.at(key).get<bool>();
}

std::string get_string(const json& j, const std::string& key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw config_error(key + " must be a string");
  return j.at(key).get<std::string>();
}

std::string require_string(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw config_error(where + ": missing required key \"" + key + "\"");
  if (!j.at(key).is_string()) throw config_error(where + "." + key + " must be a string");
  return j.at(key).get<std::string>();
}

std::vector<std::string> get_string_list(const json& j, const std::string& key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  const json& arr = j.at(key);
  if (!arr.is_array()) throw config_error(key + " must be an array of strings");
  for (const auto& v : arr) {
    if (!v.is_string()) throw config_error(key + " must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw config_error("config parse error in " + path + ": " + e.what());
  }
  if (!j.is_object()) throw config_error("config root must be a JSON object: " + path);
  return j;
}

OutcomeSpec parse_outcome_spec(const json& j) {
  check_keys(j, {"covariate_terms", "include_ps_covariate", "include_inverse_ps_covariate",
                 "spline_terms"},
             "outcome");
  OutcomeSpec spec;
  spec.covariate_terms = get_string_list(j, "covariate_terms");
  spec.include_ps_covariate = get_bool(j, "include_ps_covariate", false);
  spec.include_inverse_ps_covariate = get_bool(j, "include_inverse_ps_covariate", false);
  if (j.contains("spline_terms")) {
    const json& arr = j.at("spline_terms");
    if (!arr.is_array()) throw config_error("outcome.spline_terms must be an array");
    for (const auto& t : arr) {
      check_keys(t, {"column", "degree", "knot_rule"}, "spline_terms entry");
      SplineTerm term;
      term.column = require_string(t, "column", "spline_terms entry");
      term.degree = static_cast<int>(get_integer(t, "degree", 3));
      term.knot_rule = get_string(t, "knot_rule", "quartiles");
      if (term.degree < 1 || term.degree > 7)
        throw config_error("spline degree must lie in [1,7]");
      if (term.knot_rule != "quartiles")
        throw config_error("unsupported knot_rule: " + term.knot_rule);
      spec.spline_terms.push_back(std::move(term));
    }
  }
  // column existence is checked against the dataset at assembly time
  std::set<std::string> seen;
  for (const auto& c : spec.covariate_terms)
    if (!seen.insert(c).second) throw config_error("duplicate outcome covariate \"" + c + "\"");
  return spec;
}

PsSpec parse_ps_spec(const json& j) {
  check_keys(j, {"family", "selectors", "marginal_treatment_prob"}, "ps");
  PsSpec spec;
  const std::string family = require_string(j, "family", "ps");
  if (family == "logistic") {
    spec.family = PsFamily::logistic;
  } else if (family == "latent_uniform") {
    spec.family = PsFamily::latent_uniform;
  } else {
    throw config_error("ps.family must be \"logistic\" or \"latent_uniform\"");
  }
  spec.selectors = get_string_list(j, "selectors");
  spec.p_E = get_number(j, "marginal_treatment_prob", 0.5);
  if (!(spec.p_E > 0.0 && spec.p_E < 1.0))
    throw config_error("ps.marginal_treatment_prob must be in (0,1)");
  return spec;
}

SamplerConfig parse_sampler_config(const json& j) {
  check_keys(j, {"n_iterations", "n_burnin", "seed", "adapt", "target_accept_multivariate",
                 "target_accept_scalar", "stuck_rejections"},
             "sampler");
  SamplerConfig cfg;
  cfg.n_iterations = get_integer(j, "n_iterations", cfg.n_iterations);
  cfg.n_burnin = get_integer(j, "n_burnin", cfg.n_burnin);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
      throw config_error("sampler.seed must be an integer");
    cfg.seed = j.at("seed").get<uint64_t>();
  }
  cfg.adapt = get_bool(j, "adapt", cfg.adapt);
  cfg.target_accept_multivariate =
      get_number(j, "target_accept_multivariate", cfg.target_accept_multivariate);
  cfg.target_accept_scalar = get_number(j, "target_accept_scalar", cfg.target_accept_scalar);
  cfg.stuck_rejections = get_integer(j, "stuck_rejections", cfg.stuck_rejections);
  cfg.validate();
  return cfg;
}

PriorSpec resolve_prior(const json& prior, Eigen::Index k) {
  PriorSpec spec = PriorSpec::flat_default(k);
  if (prior.is_null()) return spec;
  check_keys(prior, {"beta_mean", "beta_sd", "sigma_scale"}, "prior");
  auto fill = [&](const char* key, Eigen::VectorXd& dest) {
    if (!prior.contains(key)) return;
    const json& v = prior.at(key);
    if (v.is_number()) {
      dest.setConstant(v.get<double>());
    } else if (v.is_array()) {
      if (static_cast<Eigen::Index>(v.size()) != k)
        throw config_error(std::string("prior.") + key + " length " +
                           std::to_string(v.size()) + " does not match design width " +
                           std::to_string(k));
      for (Eigen::Index i = 0; i < k; ++i) {
        if (!v.at(i).is_number())
          throw config_error(std::string("prior.") + key + " entries must be numbers");
        dest(i) = v.at(i).get<double>();
      }
    } else {
      throw config_error(std::string("prior.") + key + " must be a number or array");
    }
  };
  fill("beta_mean", spec.beta_mean);
  fill("beta_sd", spec.beta_sd);
  spec.sigma_scale = get_number(prior, "sigma_scale", spec.sigma_scale);
  if (spec.sigma_scale <= 0.0) throw config_error("prior.sigma_scale must be positive");
  if ((spec.beta_sd.array() <= 0.0).any())
    throw config_error("prior.beta_sd entries must be positive");
  return spec;
}

FitConfig parse_fit_config(const json& j) {
  check_keys(j, {"dataset", "outcome", "ps", "prior", "sampler", "alpha_prior_sd", "weighted",
                 "out_dir"},
             "fit config");
  FitConfig cfg;
  cfg.dataset_path = require_string(j, "dataset", "fit config");
  cfg.outcome = j.contains("outcome") ? parse_outcome_spec(j.at("outcome")) : OutcomeSpec{};
  if (j.contains("ps") && !j.at("ps").is_null()) cfg.ps = parse_ps_spec(j.at("ps"));
  cfg.sampler = j.contains("sampler") ? parse_sampler_config(j.at("sampler")) : SamplerConfig{};
  cfg.prior = j.contains("prior") ? j.at("prior") : json(nullptr);
  if (!cfg.prior.is_null())
    check_keys(cfg.prior, {"beta_mean", "beta_sd", "sigma_scale"}, "prior");
  cfg.alpha_prior_sd = get_number(j, "alpha_prior_sd", cfg.alpha_prior_sd);
  if (cfg.alpha_prior_sd <= 0.0) throw config_error("alpha_prior_sd must be positive");
  cfg.weighted = get_bool(j, "weighted", cfg.weighted);
  cfg.out_dir = get_string(j, "out_dir", cfg.out_dir);
  if (cfg.outcome.needs_ps() && !cfg.ps)
    throw config_error("outcome requests a propensity covariate but no ps block is given");
  return cfg;
}

AbdrConfig parse_abdr_config(const json& j) {
  check_keys(j, {"dataset", "outcome", "ps", "n_draws", "seed", "weighted", "out_dir"},
             "abdr config");
  AbdrConfig cfg;
  cfg.dataset_path = require_string(j, "dataset", "abdr config");
  cfg.outcome = j.contains("outcome") ? parse_outcome_spec(j.at("outcome")) : OutcomeSpec{};
  if (!j.contains("ps")) throw config_error("abdr config: missing required key \"ps\"");
  cfg.ps = parse_ps_spec(j.at("ps"));
  cfg.n_draws = get_integer(j, "n_draws", cfg.n_draws);
  if (cfg.n_draws < 1) throw config_error("n_draws must be positive");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
      throw config_error("seed must be an integer");
    cfg.seed = j.at("seed").get<uint64_t>();
  }
  cfg.weighted = get_bool(j, "weighted", cfg.weighted);
  cfg.out_dir = get_string(j, "out_dir", cfg.out_dir);
  return cfg;
}

DgpSpec parse_dgp_spec(const json& j) {
  check_keys(j, {"example", "n", "variance_convention", "alpha0", "alpha1", "theta0", "theta1",
                 "theta2", "x_disp", "y_disp"},
             "dgp");
  DgpSpec dgp;
  const std::string ex = require_string(j, "example", "dgp");
  if (ex == "one") {
    dgp.example = DgpSpec::Example::one;
  } else if (ex == "two") {
    dgp.example = DgpSpec::Example::two;
  } else {
    throw config_error("dgp.example must be \"one\" or \"two\"");
  }
  dgp.n = get_integer(j, "n", dgp.n);
  if (dgp.n < 2) throw config_error("dgp.n must be at least 2");
  const std::string vc = get_string(j, "variance_convention", "variance");
  if (vc == "variance") {
    dgp.variance_convention = DgpSpec::VarConv::variance;
  } else if (vc == "sd") {
    dgp.variance_convention = DgpSpec::VarConv::sd;
  } else {
    throw config_error("dgp.variance_convention must be \"variance\" or \"sd\"");
  }
  dgp.alpha0 = get_number(j, "alpha0", dgp.alpha0);
  dgp.alpha1 = get_number(j, "alpha1", dgp.alpha1);
  dgp.theta0 = get_number(j, "theta0", dgp.theta0);
  dgp.theta1 = get_number(j, "theta1", dgp.theta1);
  dgp.theta2 = get_number(j, "theta2", dgp.theta2);
  dgp.x_disp = get_number(j, "x_disp", dgp.x_disp);
  dgp.y_disp = get_number(j, "y_disp", dgp.y_disp);
  if (dgp.x_disp <= 0.0 || dgp.y_disp <= 0.0)
    throw config_error("dgp dispersions must be positive");
  return dgp;
}

SimulateConfig parse_simulate_config(const json& j) {
  check_keys(j, {"study", "out_dir"}, "simulate config");
  if (!j.contains("study")) throw config_error("simulate config: missing required key \"study\"");
  const json& s = j.at("study");
  check_keys(s, {"dgp", "estimator", "model_variant", "scenario", "n_replicates", "sampler",
                 "bootstrap_draws", "master_seed"},
             "study");
  SimulateConfig cfg;
  StudySpec& spec = cfg.study;
  if (!s.contains("dgp")) throw config_error("study: missing required key \"dgp\"");
  spec.dgp = parse_dgp_spec(s.at("dgp"));

  const std::string est = get_string(s, "estimator", "gibbs");
  if (est == "gibbs") {
    spec.estimator = Estimator::gibbs;
  } else if (est == "abdr") {
    spec.estimator = Estimator::abdr;
  } else {
    throw config_error("study.estimator must be \"gibbs\" or \"abdr\"");
  }

  const std::string variant = get_string(s, "model_variant", "plain");
  if (variant == "plain") {
    spec.model_variant = ModelVariant::plain;
  } else if (variant == "ps_cov") {
    spec.model_variant = ModelVariant::ps_cov;
  } else if (variant == "inv_ps_cov") {
    spec.model_variant = ModelVariant::inv_ps_cov;
  } else if (variant == "bspline_x1") {
    spec.model_variant = ModelVariant::bspline_x1;
  } else {
    throw config_error("study.model_variant must be one of plain, ps_cov, inv_ps_cov, bspline_x1");
  }

  const std::string scen = require_string(s, "scenario", "study");
  if (scen == "correct_or_incorrect_ps") {
    spec.scenario = Scenario::correct_or_incorrect_ps;
  } else if (scen == "incorrect_or_correct_ps") {
    spec.scenario = Scenario::incorrect_or_correct_ps;
  } else if (scen == "both_incorrect") {
    spec.scenario = Scenario::both_incorrect;
  } else if (scen == "scenario_I") {
    spec.scenario = Scenario::scenario_I;
  } else if (scen == "scenario_II") {
    spec.scenario = Scenario::scenario_II;
  } else {
    throw config_error("unknown study.scenario: " + scen);
  }

  spec.n_replicates = get_integer(s, "n_replicates", spec.n_replicates);
  if (spec.n_replicates < 1) throw config_error("study.n_replicates must be positive");
  if (s.contains("sampler")) spec.sampler = parse_sampler_config(s.at("sampler"));
  spec.bootstrap_draws = get_integer(s, "bootstrap_draws", spec.bootstrap_draws);
  if (spec.bootstrap_draws < 1) throw config_error("study.bootstrap_draws must be positive");
  if (s.contains("master_seed")) {
    if (!s.at("master_seed").is_number_unsigned() && !s.at("master_seed").is_number_integer())
      throw config_error("study.master_seed must be an integer");
    spec.master_seed = s.at("master_seed").get<uint64_t>();
  }
  spec.validate();
  cfg.out_dir = get_string(j, "out_dir", cfg.out_dir);
  return cfg;
}

}  // namespace gc
