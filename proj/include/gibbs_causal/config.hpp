#pragma once
#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "gibbs_causal/bootstrap.hpp"
#include "gibbs_causal/model.hpp"
#include "gibbs_causal/propensity.hpp"
#include "gibbs_causal/sampler.hpp"
#include "gibbs_causal/sim.hpp"

namespace gc {

using nlohmann::json;

// parse failures and schema violations raise config_error (CLI exit 2)
json load_config_file(const std::string& path);

struct FitConfig {
  std::string dataset_path;
  OutcomeSpec outcome;
  std::optional<PsSpec> ps;
  SamplerConfig sampler;
  json prior;  // resolved against the design width at assembly time
  double alpha_prior_sd = 100.0;
  bool weighted = true;  // false: unweighted outcome loss (regression adjustment)
  std::string out_dir = ".";
};

struct AbdrConfig {
  std::string dataset_path;
  OutcomeSpec outcome;
  PsSpec ps;
  long n_draws = 1000;
  uint64_t seed = 1;
  bool weighted = true;
  std::string out_dir = ".";
};

struct SimulateConfig {
  StudySpec study;
  std::string out_dir = ".";
};

FitConfig parse_fit_config(const json& j);
AbdrConfig parse_abdr_config(const json& j);
SimulateConfig parse_simulate_config(const json& j);

// number (broadcast) or array (exact length k); defaults: mean 0, sd 100
PriorSpec resolve_prior(const json& prior, Eigen::Index k);

OutcomeSpec parse_outcome_spec(const json& j);
PsSpec parse_ps_spec(const json& j);
SamplerConfig parse_sampler_config(const json& j);
DgpSpec parse_dgp_spec(const json& j);

}  // namespace gc
