#include "gibbs_causal/target.hpp"

#include <cmath>

namespace gc {

static constexpr double kLog2Pi = 1.8378770664093453;

static double softplus(double t) {
  return t > 30 ? t : std::log1p(std::exp(t));
}

// stable logit-scale pieces for the latent-uniform block
static double latent_weight(double d, double v, double p_E) {
  return d == 1.0 ? p_E * (1.0 + std::exp(-v)) : (1.0 - p_E) * (1.0 + std::exp(v));
}
static double latent_jacobian(double v) {  // log u(1-u)
  return -(softplus(v) + softplus(-v));
}

GibbsTarget::GibbsTarget(const Dataset& data, GibbsModel model)
    : data_(data), model_(std::move(model)) {
  data_.validate();
  const auto n = data_.n();
  model_.outcome.validate(data_);
  if (model_.ps) model_.ps->validate(data_);
  if (model_.outcome.needs_ps() && !model_.ps)
    throw config_error("outcome spec requests PS columns but the assembly has no PS model");

  if (logistic_ps()) {
    ps_design_ = ps_design(data_, model_.ps->selectors);
    alpha_ = fit_logistic_irls(ps_design_, data_.d).gamma;
  } else if (latent_ps()) {
    v_ = VectorXd::Zero(n);
    u_ = VectorXd::Constant(n, 0.5);
  } else {
    w_ = model_.fixed_weights && model_.weighted ? *model_.fixed_weights : VectorXd::Ones(n);
    if (w_.size() != n || !(w_.array() > 0).all() || !w_.allFinite())
      throw config_error("fixed weights must be positive, finite, one per unit");
  }

  // design + weights from the initial PS state
  if (model_.ps) {
    VectorXd ps_vals;
    if (logistic_ps()) {
      eta_ps_ = ps_design_ * alpha_;
      e_.resize(n);
      for (Eigen::Index i = 0; i < n; ++i)
        e_[i] = std::clamp(expit(eta_ps_[i]), kPsClamp, 1.0 - kPsClamp);
      ps_vals = e_;
    } else {
      ps_vals = u_;
    }
    w_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
      w_[i] = model_.weighted ? weight(data_.d[i], ps_vals[i], model_.ps->p_E) : 1.0;
    design_ = build_design_matrix(model_.outcome, data_,
                                  model_.outcome.needs_ps() ? std::optional<VectorXd>(ps_vals)
                                                            : std::nullopt);
  } else {
    design_ = build_design_matrix(model_.outcome, data_);
  }

  const auto k = design_.M.cols();
  model_.prior.validate(k);

  // latent-uniform PS columns start at u = 0.5, collinear with the intercept;
  // initialize/shape proposals from a prior-spread proxy column instead
  MatrixXd geom = design_.M;
  if (latent_ps() && model_.outcome.needs_ps()) {
    VectorXd proxy(n);
    for (Eigen::Index i = 0; i < n; ++i) proxy[i] = (double(i) + 0.5) / double(n);
    if (design_.ps_col) geom.col(*design_.ps_col) = proxy;
    if (design_.inv_ps_col) geom.col(*design_.inv_ps_col) = proxy.array().inverse();
  }
  WlsFit init = wls_solve(geom, data_.y, w_);
  beta_ = init.beta;
  if (model_.sample_sigma) {
    const VectorXd r = data_.y - geom * beta_;
    const double s2 = (w_.array() * r.array().square()).sum() / w_.sum();
    log_sigma_ = std::log(std::max(std::sqrt(s2), 1e-3));
  } else {
    if (!(model_.fixed_sigma > 0)) throw config_error("fixed sigma must be positive");
    log_sigma_ = std::log(model_.fixed_sigma);
  }

  // proposal shapes: beta from the weighted normal equations at the start,
  // alpha from the Fisher information at its MLE; 2.38^2/dim optimal scaling
  {
    MatrixXd cov = init.xtwx;
    cov.diagonal().array() += 1e-12 * cov.diagonal().array().maxCoeff() + 1e-300;
    const double sig2 = model_.sample_sigma ? std::exp(2.0 * log_sigma_)
                                            : model_.fixed_sigma * model_.fixed_sigma;
    MatrixXd c = cov.inverse() * sig2 * (2.38 * 2.38 / double(k));
    beta_chol_ = Eigen::LLT<MatrixXd>(c).matrixL();
    if (!beta_chol_.allFinite()) throw numeric_error("beta proposal factor is not finite");
  }
  if (logistic_ps()) {
    const auto m = ps_design_.cols();
    VectorXd ee = (e_.array() * (1.0 - e_.array())).matrix();
    MatrixXd info = ps_design_.transpose() * ee.asDiagonal() * ps_design_;
    info.diagonal().array() += 1e-12 * info.diagonal().array().maxCoeff() + 1e-300;
    MatrixXd c = info.inverse() * (2.38 * 2.38 / double(m));
    alpha_chol_ = Eigen::LLT<MatrixXd>(c).matrixL();
    if (!alpha_chol_.allFinite()) throw numeric_error("alpha proposal factor is not finite");
  }

  blocks_.push_back({BlockInfo::multivariate, k, "beta", 1.0});
  block_ids_.push_back(BlockId::beta);
  if (model_.sample_sigma) {
    blocks_.push_back({BlockInfo::scalar, 1, "sigma", 0.3});
    block_ids_.push_back(BlockId::sigma);
  }
  if (logistic_ps()) {
    blocks_.push_back({BlockInfo::multivariate, ps_design_.cols(), "ps", 1.0});
    block_ids_.push_back(BlockId::alpha);
  } else if (latent_ps()) {
    blocks_.push_back({BlockInfo::elementwise, n, "latent_u", 2.0});
    block_ids_.push_back(BlockId::latent_u);
  }

  rebuild_caches();
  pend_beta_.resize(k);
  pend_resid_.resize(n);
  if (logistic_ps()) {
    pend_eta_.resize(n);
    pend_e_.resize(n);
    pend_w_.resize(n);
    pend_alpha_.resize(alpha_.size());
  }
}

MatrixXd GibbsTarget::proposal_chol(int b) const {
  switch (block_ids_[(size_t)b]) {
    case BlockId::beta: return beta_chol_;
    case BlockId::alpha: return alpha_chol_;
    default: return MatrixXd::Identity(1, 1);
  }
}

VectorXd GibbsTarget::current_ps_values() const {
  if (logistic_ps()) return e_;
  return u_;
}

void GibbsTarget::rebuild_caches() {
  const auto n = data_.n();
  if (logistic_ps()) {
    eta_ps_ = ps_design_ * alpha_;
    for (Eigen::Index i = 0; i < n; ++i) {
      double e = expit(eta_ps_[i]);
      if (e < kPsClamp || e > 1.0 - kPsClamp) {
        ++clamp_events_;
        e = std::clamp(e, kPsClamp, 1.0 - kPsClamp);
      }
      e_[i] = e;
      w_[i] = model_.weighted ? weight(data_.d[i], e, model_.ps->p_E) : 1.0;
    }
    // the importance weight tilts the whole per-unit log joint, treatment
    // factor included, not just the outcome term
    ps_loglik_ = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      ps_loglik_ += w_[i] * (data_.d[i] == 1.0 ? std::log(e_[i]) : std::log1p(-e_[i]));
    if (model_.outcome.needs_ps()) refresh_ps_columns(design_, e_);
  } else if (latent_ps()) {
    for (Eigen::Index i = 0; i < n; ++i) {
      u_[i] = expit(v_[i]);
      w_[i] = model_.weighted ? latent_weight(data_.d[i], v_[i], model_.ps->p_E) : 1.0;
    }
    if (model_.outcome.needs_ps()) refresh_ps_columns(design_, u_);
  }
  resid_ = data_.y - design_.M * beta_;
  sq_ = (w_.array() * resid_.array().square()).sum();
  sw_ = w_.sum();
}

void GibbsTarget::refresh() { rebuild_caches(); }

double GibbsTarget::pseudo_loglik(double sq, double sw, double log_sig) const {
  return -0.5 * sq * std::exp(-2.0 * log_sig) - sw * (log_sig + 0.5 * kLog2Pi);
}

double GibbsTarget::sigma_log_prior(double log_sig) const {
  // Half-Normal density at sigma plus the d sigma / d log sigma Jacobian
  return model_.prior.log_sigma_density(std::exp(log_sig)) + log_sig;
}

double GibbsTarget::alpha_log_prior(const VectorXd& a) const {
  const double sd = model_.alpha_prior_sd;
  return -0.5 * a.squaredNorm() / (sd * sd) - double(a.size()) * (std::log(sd) + 0.5 * kLog2Pi);
}

double GibbsTarget::latent_log_prior() const {
  double s = 0;
  for (Eigen::Index i = 0; i < v_.size(); ++i) s += latent_jacobian(v_[i]);
  return s;
}

double GibbsTarget::log_posterior() const {
  double lp = pseudo_loglik(sq_, sw_, log_sigma_) + model_.prior.log_beta_density(beta_);
  if (model_.sample_sigma) lp += sigma_log_prior(log_sigma_);
  if (logistic_ps()) lp += ps_loglik_ + alpha_log_prior(alpha_);
  if (latent_ps()) lp += latent_log_prior();
  return lp;
}

double GibbsTarget::propose(int b, Eigen::Index i, const VectorXd& delta) {
  pend_block_ = b;
  pend_elem_ = i;
  const double t = log_sigma_;
  switch (block_ids_[(size_t)b]) {
    case BlockId::beta: {
      pend_beta_ = beta_ + delta;
      pend_resid_ = resid_;
      pend_resid_.noalias() -= design_.M * delta;
      pend_sq_ = (w_.array() * pend_resid_.array().square()).sum();
      return -0.5 * (pend_sq_ - sq_) * std::exp(-2.0 * t) +
             model_.prior.log_beta_density(pend_beta_) - model_.prior.log_beta_density(beta_);
    }
    case BlockId::sigma: {
      pend_log_sigma_ = t + delta[0];
      return -0.5 * sq_ * (std::exp(-2.0 * pend_log_sigma_) - std::exp(-2.0 * t)) -
             sw_ * (pend_log_sigma_ - t) + sigma_log_prior(pend_log_sigma_) - sigma_log_prior(t);
    }
    case BlockId::alpha: {
      const auto n = data_.n();
      pend_alpha_ = alpha_ + delta;
      pend_eta_.noalias() = eta_ps_ + ps_design_ * delta;
      pend_ps_loglik_ = 0;
      for (Eigen::Index r = 0; r < n; ++r) {
        double e = expit(pend_eta_[r]);
        e = std::clamp(e, kPsClamp, 1.0 - kPsClamp);
        pend_e_[r] = e;
        pend_w_[r] = model_.weighted ? weight(data_.d[r], e, model_.ps->p_E) : 1.0;
        pend_ps_loglik_ += pend_w_[r] * (data_.d[r] == 1.0 ? std::log(e) : std::log1p(-e));
      }
      if (model_.outcome.needs_ps()) {
        pend_resid_ = resid_;
        if (design_.ps_col)
          pend_resid_.array() -= beta_[*design_.ps_col] * (pend_e_ - e_).array();
        if (design_.inv_ps_col)
          pend_resid_.array() -= beta_[*design_.inv_ps_col] *
                                 (pend_e_.array().inverse() - e_.array().inverse());
      } else {
        pend_resid_ = resid_;
      }
      pend_sq_ = (pend_w_.array() * pend_resid_.array().square()).sum();
      pend_sw_ = pend_w_.sum();
      return pseudo_loglik(pend_sq_, pend_sw_, t) - pseudo_loglik(sq_, sw_, t) +
             pend_ps_loglik_ - ps_loglik_ + alpha_log_prior(pend_alpha_) - alpha_log_prior(alpha_);
    }
    case BlockId::latent_u: {
      pend_v_ = v_[i] + delta[0];
      pend_u_ = expit(pend_v_);
      pend_wi_ = model_.weighted ? latent_weight(data_.d[i], pend_v_, model_.ps->p_E) : 1.0;
      pend_resid_i_ = resid_[i];
      if (design_.ps_col) pend_resid_i_ -= beta_[*design_.ps_col] * (pend_u_ - u_[i]);
      if (design_.inv_ps_col)
        pend_resid_i_ -= beta_[*design_.inv_ps_col] * (1.0 / pend_u_ - 1.0 / u_[i]);
      const double old_term = w_[i] * resid_[i] * resid_[i];
      const double new_term = pend_wi_ * pend_resid_i_ * pend_resid_i_;
      pend_sq_ = sq_ - old_term + new_term;
      pend_sw_ = sw_ - w_[i] + pend_wi_;
      return -0.5 * (new_term - old_term) * std::exp(-2.0 * t) -
             (pend_wi_ - w_[i]) * (t + 0.5 * kLog2Pi) +
             latent_jacobian(pend_v_) - latent_jacobian(v_[i]);
    }
  }
  return -std::numeric_limits<double>::infinity();
}

void GibbsTarget::accept_pending() {
  switch (block_ids_[(size_t)pend_block_]) {
    case BlockId::beta:
      beta_.swap(pend_beta_);
      resid_.swap(pend_resid_);
      sq_ = pend_sq_;
      break;
    case BlockId::sigma:
      log_sigma_ = pend_log_sigma_;
      break;
    case BlockId::alpha:
      alpha_.swap(pend_alpha_);
      eta_ps_.swap(pend_eta_);
      e_.swap(pend_e_);
      w_.swap(pend_w_);
      resid_.swap(pend_resid_);
      sq_ = pend_sq_;
      sw_ = pend_sw_;
      ps_loglik_ = pend_ps_loglik_;
      if (model_.outcome.needs_ps()) refresh_ps_columns(design_, e_);
      break;
    case BlockId::latent_u:
      v_[pend_elem_] = pend_v_;
      u_[pend_elem_] = pend_u_;
      w_[pend_elem_] = pend_wi_;
      resid_[pend_elem_] = pend_resid_i_;
      sq_ = pend_sq_;
      sw_ = pend_sw_;
      if (design_.ps_col) design_.M(pend_elem_, *design_.ps_col) = pend_u_;
      if (design_.inv_ps_col) design_.M(pend_elem_, *design_.inv_ps_col) = 1.0 / pend_u_;
      break;
  }
  pend_block_ = -1;
}

void GibbsTarget::reject_pending() { pend_block_ = -1; }

VectorXd GibbsTarget::report_state() const {
  const auto k = beta_.size();
  Eigen::Index extra = 1 + (logistic_ps() ? alpha_.size() : 0) + 1;  // sigma, alpha, pred0_mean
  VectorXd out(k + extra);
  out.head(k) = beta_;
  out[k] = sigma();
  Eigen::Index j = k + 1;
  if (logistic_ps()) {
    out.segment(j, alpha_.size()) = alpha_;
    j += alpha_.size();
  }
  // mean model prediction at d=0 over observed covariates (report auxiliary);
  // resid_ is already y - M beta, so mean(pred0) = mean(y - resid) - beta_d dbar
  out[j] = (data_.y - resid_).mean() - beta_[kTreatmentIndex] * data_.d.mean();
  return out;
}

std::vector<std::string> GibbsTarget::report_labels() const {
  std::vector<std::string> lab = design_.labels;
  lab.push_back("sigma");
  if (logistic_ps()) {
    lab.push_back("ps_intercept");
    for (const auto& s : model_.ps->selectors) lab.push_back("ps_" + s);
  }
  lab.push_back("pred0_mean");
  return lab;
}

VectorXd GibbsTarget::predict_untreated(const VectorXd& beta) const {
  VectorXd pred = design_.M * beta;
  pred -= beta[kTreatmentIndex] * data_.d;
  return pred;
}

}  // namespace gc
