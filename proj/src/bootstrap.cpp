#include "gibbs_causal/bootstrap.hpp"

#include <cmath>

namespace gc {

void BootstrapConfig::validate(const Dataset& data) const {
  if (n_draws < 1) throw config_error("bootstrap needs n_draws >= 1");
  ps.validate(data);
  outcome.validate(data);
}

VectorXd draw_dirichlet_weights(Eigen::Index n, Rng& rng) {
  if (n < 1) throw config_error("dirichlet weights need n >= 1");
  VectorXd xi(n);
  for (Eigen::Index i = 0; i < n; ++i) xi[i] = rexp(rng);
  return xi / xi.sum();
}

VectorXd abdr_draw(const Dataset& data, const BootstrapConfig& config, const VectorXd& xi,
                   Rng& rng) {
  const auto n = data.n();
  if (xi.size() != n || !(xi.array() > 0).all())
    throw config_error("xi must be a positive weight per unit");

  VectorXd ps_vals(n), w(n);
  if (config.ps.family == PsFamily::logistic) {
    const MatrixXd psX = ps_design(data, config.ps.selectors);
    const PsFit fit = config.refit_ps
                          ? fit_logistic_irls(psX, data.d, std::optional<VectorXd>(xi))
                          : fit_logistic_irls(psX, data.d);
    for (Eigen::Index i = 0; i < n; ++i)
      ps_vals[i] = std::clamp(expit(psX.row(i).dot(fit.gamma)), kPsClamp, 1.0 - kPsClamp);
  } else {
    for (Eigen::Index i = 0; i < n; ++i)
      ps_vals[i] = std::clamp(runif(rng), kPsClamp, 1.0 - kPsClamp);
  }
  for (Eigen::Index i = 0; i < n; ++i) w[i] = weight(data.d[i], ps_vals[i], config.ps.p_E);

  const DesignMatrix design = build_design_matrix(config.outcome, data,
                                                  config.outcome.needs_ps()
                                                      ? std::optional<VectorXd>(ps_vals)
                                                      : std::nullopt);
  const VectorXd combined =
      config.weighted ? VectorXd((w.array() * xi.array()).matrix()) : xi;
  const VectorXd beta = wls_solve(design.M, data.y, combined).beta;

  // mean predicted outcome with the treatment column zeroed (pct-change base)
  const double pred0_mean =
      (design.M * beta).mean() - beta[kTreatmentIndex] * design.M.col(kTreatmentIndex).mean();
  VectorXd out(beta.size() + 1);
  out << beta, pred0_mean;
  return out;
}

PosteriorSamples abdr_posterior(const Dataset& data, const BootstrapConfig& config) {
  config.validate(data);
  // labels match the MCMC report so summaries are shared
  const DesignMatrix probe = build_design_matrix(
      config.outcome, data,
      config.outcome.needs_ps() ? std::optional<VectorXd>(VectorXd::Constant(data.n(), 0.5))
                                : std::nullopt);

  PosteriorSamples out;
  out.seed = config.seed;
  out.labels = probe.labels;
  out.labels.push_back("pred0_mean");
  out.draws.resize(config.n_draws, (Eigen::Index)out.labels.size());

  long discarded = 0;
  Eigen::Index row = 0;
  for (long s = 0; s < config.n_draws; ++s) {
    Rng rng = make_rng(config.seed, (uint64_t)s);
    const VectorXd xi = draw_dirichlet_weights(data.n(), rng);
    try {
      out.draws.row(row) = abdr_draw(data, config, xi, rng);
      ++row;
    } catch (const numeric_error&) {
      ++discarded;
    }
  }
  if (double(discarded) > 0.05 * double(config.n_draws))
    throw numeric_error("bootstrap discarded " + std::to_string(discarded) + " of " +
                        std::to_string(config.n_draws) + " draws (> 5%)");
  out.draws.conservativeResize(row, Eigen::NoChange);
  out.blocks.push_back({"bootstrap", 1.0 - double(discarded) / double(config.n_draws), 0.0});
  out.auto_rejects = discarded;
  return out;
}

}  // namespace gc
