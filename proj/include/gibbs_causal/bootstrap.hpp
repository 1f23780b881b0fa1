#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "gibbs_causal/dataset.hpp"
#include "gibbs_causal/model.hpp"
#include "gibbs_causal/propensity.hpp"
#include "gibbs_causal/rng.hpp"
#include "gibbs_causal/sampler.hpp"

namespace gc {

struct BootstrapConfig {
  long n_draws = 1000;
  uint64_t seed = 1;
  PsSpec ps;
  OutcomeSpec outcome;
  bool refit_ps = true;  // false: plug-in PS fixed at its unweighted MLE
  bool weighted = true;  // false: per-draw loss uses xi alone (regression adjustment)

  void validate(const Dataset& data) const;
};

// xi_i > 0, sum 1: normalized standard exponentials (Dirichlet(1,...,1))
VectorXd draw_dirichlet_weights(Eigen::Index n, Rng& rng);

// one weighted-likelihood bootstrap draw:
//   logistic PS: gamma(xi) by xi-weighted IRLS -> w(xi) -> (w.xi)-weighted LS
//   latent-uniform PS: fresh u ~ U(0,1)^n for the draw (its prior; a per-unit
//   "refit" is degenerate at u=d) -> same weighted LS
// rng only consumed on the latent path. Returns the coefficient vector with
// the mean untreated prediction appended. Throws numeric_error on
// rank-deficient weighted designs (caller may discard the draw).
VectorXd abdr_draw(const Dataset& data, const BootstrapConfig& config, const VectorXd& xi,
                   Rng& rng);

// S independent draws labeled like MCMC output; draws that fail with
// numeric_error are discarded and counted, > 5% discarded is a hard error
PosteriorSamples abdr_posterior(const Dataset& data, const BootstrapConfig& config);

}  // namespace gc
