#pragma once
#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gibbs_causal/dataset.hpp"
#include "gibbs_causal/model.hpp"
#include "gibbs_causal/propensity.hpp"

namespace gc {

struct BlockInfo {
  enum Kind { multivariate, scalar, elementwise } kind = multivariate;
  Eigen::Index size = 1;  // parameter count; elementwise: element count
  std::string name;
  double initial_step = 1.0;
};

// A log-density the Metropolis-within-Gibbs driver can update blockwise.
// propose() holds exactly one pending move until accept/reject.
class SamplerTarget {
 public:
  virtual ~SamplerTarget() = default;
  virtual int n_blocks() const = 0;
  virtual BlockInfo block_info(int b) const = 0;
  // unit-scale proposal shape for multivariate blocks (identity default)
  virtual MatrixXd proposal_chol(int b) const {
    return MatrixXd::Identity(block_info(b).size, block_info(b).size);
  }
  virtual double log_posterior() const = 0;
  // delta: displacement, already scaled; elementwise blocks get a length-1
  // delta for element i. Returns the log-posterior change of the move.
  virtual double propose(int b, Eigen::Index i, const VectorXd& delta) = 0;
  virtual void accept_pending() = 0;
  virtual void reject_pending() = 0;
  // recompute running caches from the committed state (called once per sweep
  // to keep incremental updates from drifting)
  virtual void refresh() {}
  virtual VectorXd report_state() const = 0;
  virtual std::vector<std::string> report_labels() const = 0;
};

// Joint model assembly: Gaussian outcome pseudo-likelihood with stabilized
// weights, plus the propensity block that drives those weights.
//   - logistic PS: weights from e(x;alpha); alpha carries the Bernoulli
//     treatment likelihood, tilted by the same weights in a weighted model
//     (it anchors alpha; the pseudo-likelihood alone pushes the weights
//     flat) and a N(0, sd^2) prior, sampled as one block.
//   - latent-uniform PS: one u_i per unit, prior Uniform(0,1), no treatment
//     term; sampled elementwise on the logit scale (Jacobian u(1-u)).
//   - no PS: fixed caller-supplied weights (oracle/ablation path).
struct GibbsModel {
  OutcomeSpec outcome;
  PriorSpec prior;                  // beta coefficients + sigma scale
  std::optional<PsSpec> ps;
  std::optional<VectorXd> fixed_weights;  // used when !ps (defaults to 1)
  // false: pure regression adjustment — w ≡ 1 in the outcome likelihood while
  // the PS block is still sampled (it feeds the PS covariate columns). The
  // PS-as-covariate variants use this; weighting them as well over-corrects.
  bool weighted = true;
  double alpha_prior_sd = 100.0;
  bool sample_sigma = true;
  double fixed_sigma = 1.0;         // when !sample_sigma
};

class GibbsTarget : public SamplerTarget {
 public:
  GibbsTarget(const Dataset& data, GibbsModel model);

  int n_blocks() const override { return (int)blocks_.size(); }
  BlockInfo block_info(int b) const override { return blocks_[(size_t)b]; }
  MatrixXd proposal_chol(int b) const override;
  double log_posterior() const override;
  double propose(int b, Eigen::Index i, const VectorXd& delta) override;
  void accept_pending() override;
  void reject_pending() override;
  void refresh() override;
  VectorXd report_state() const override;
  std::vector<std::string> report_labels() const override;

  const DesignMatrix& design() const { return design_; }
  const VectorXd& current_weights() const { return w_; }
  long clamp_events() const { return clamp_events_; }
  // predicted outcome at d=0 for every observed unit (percentage-change base)
  VectorXd predict_untreated(const VectorXd& beta) const;

 private:
  enum class BlockId { beta, sigma, alpha, latent_u };

  const Dataset& data_;
  GibbsModel model_;
  std::vector<BlockInfo> blocks_;
  std::vector<BlockId> block_ids_;

  // committed state
  VectorXd beta_;
  double log_sigma_ = 0.0;
  VectorXd alpha_;   // logistic
  VectorXd v_;       // latent: logit(u)
  VectorXd u_;

  // caches
  DesignMatrix design_;
  MatrixXd ps_design_;
  VectorXd eta_ps_, e_, w_, resid_;
  double sq_ = 0, sw_ = 0, ps_loglik_ = 0;
  long clamp_events_ = 0;

  // proposal geometry fixed at initialization
  MatrixXd beta_chol_, alpha_chol_;

  // pending move
  int pend_block_ = -1;
  Eigen::Index pend_elem_ = -1;
  VectorXd pend_beta_, pend_eta_, pend_e_, pend_w_, pend_resid_;
  double pend_log_sigma_ = 0, pend_sq_ = 0, pend_sw_ = 0, pend_ps_loglik_ = 0;
  VectorXd pend_alpha_;
  double pend_v_ = 0, pend_u_ = 0, pend_wi_ = 0, pend_resid_i_ = 0;

  double sigma() const { return std::exp(log_sigma_); }
  bool logistic_ps() const { return model_.ps && model_.ps->family == PsFamily::logistic; }
  bool latent_ps() const { return model_.ps && model_.ps->family == PsFamily::latent_uniform; }
  VectorXd current_ps_values() const;
  double pseudo_loglik(double sq, double sw, double log_sig) const;
  double sigma_log_prior(double log_sig) const;  // includes the log-scale Jacobian
  double alpha_log_prior(const VectorXd& a) const;
  double latent_log_prior() const;  // sum log u(1-u)
  void rebuild_caches();
};

}  // namespace gc
