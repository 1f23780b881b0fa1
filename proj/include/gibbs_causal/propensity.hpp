#pragma once
#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "gibbs_causal/dataset.hpp"

namespace gc {

constexpr double kPsClamp = 1e-12;

enum class PsFamily { logistic, latent_uniform };

struct PsSpec {
  PsFamily family = PsFamily::logistic;
  std::vector<std::string> selectors;  // logistic covariates (intercept implicit)
  double p_E = 0.5;                    // marginal experimental treatment probability

  void validate(const Dataset& data) const;
};

double expit(double t);

// expit of the linear predictor, clamped to [eps, 1-eps]; *clamp_count tracks
// activations (should stay 0 on the simulated designs)
double ps_probability(const VectorXd& gamma, const VectorXd& x_row, long* clamp_count = nullptr);

// stabilized weight (p_E/e)^d ((1-p_E)/(1-e))^(1-d) for binary d
double weight(double d, double e, double p_E);

// intercept + selected columns
MatrixXd ps_design(const Dataset& data, const std::vector<std::string>& selectors);

// elementwise: logistic family maps gamma through ps_probability; latent
// family takes per-unit u (entries outside (0,1) are the caller's rejectable
// state and must not reach here)
VectorXd weights_for_dataset(const PsSpec& spec, const VectorXd& gamma_or_u, const Dataset& data,
                             long* clamp_count = nullptr);

struct PsFit {
  VectorXd gamma;
  bool separation_flag = false;  // some fitted |eta| > 15
  int iterations = 0;
};

// logistic MLE by IRLS on [intercept, selected columns]; optional per-unit
// case weights. Stops when the case-weight-normalized gradient sup-norm
// drops to 1e-8 (or 100 iterations). Throws numeric_error on rank deficiency.
PsFit fit_ps_mle(const Dataset& data, const std::vector<std::string>& selectors,
                 const std::optional<VectorXd>& case_weights = std::nullopt);
PsFit fit_logistic_irls(const MatrixXd& design, const VectorXd& d,
                        const std::optional<VectorXd>& case_weights = std::nullopt);

double logistic_loglik(const VectorXd& d, const VectorXd& e);

}  // namespace gc
