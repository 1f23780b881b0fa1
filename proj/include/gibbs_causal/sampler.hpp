#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gibbs_causal/stats.hpp"
#include "gibbs_causal/target.hpp"

namespace gc {

struct SamplerConfig {
  long n_iterations = 4000;
  long n_burnin = 1000;
  uint64_t seed = 1;
  double target_accept_multivariate = 0.234;
  double target_accept_scalar = 0.44;  // also per-unit elementwise walks
  // per-block overrides of the target-declared initial step sizes
  std::optional<std::vector<double>> initial_steps;
  bool adapt = true;
  long stuck_rejections = 500;  // consecutive post-burn-in rejections => stuck

  void validate() const;
};

struct BlockStats {
  std::string name;
  double acceptance = 0;  // post-burn-in mean acceptance probability
  double final_step = 0;
};

struct PosteriorSamples {
  MatrixXd draws;  // retained iterations x parameter count
  std::vector<std::string> labels;
  std::vector<BlockStats> blocks;
  uint64_t seed = 0;
  bool stuck_flag = false;
  long auto_rejects = 0;  // non-finite proposal log-density events

  Eigen::Index col(const std::string& label) const;
};

struct Diagnostics {
  std::vector<std::optional<double>> ess;        // per parameter; nullopt = degenerate
  std::vector<std::optional<double>> split_rhat;
  std::vector<double> acceptance;                // per block
};

PosteriorSamples run_chain(SamplerTarget& target, const SamplerConfig& config);

Diagnostics diagnostics(const PosteriorSamples& samples);

Summary summarize(const PosteriorSamples& samples, const std::string& label);

}  // namespace gc
