#include "gibbs_causal/propensity.hpp"

#include <cmath>

namespace gc {

void PsSpec::validate(const Dataset& data) const {
  if (!(p_E > 0.0 && p_E < 1.0)) throw config_error("marginal_treatment_prob must be in (0,1)");
  if (family == PsFamily::logistic)
    for (const auto& s : selectors) (void)data.col(s);
}

double expit(double t) {
  if (t >= 0) {
    const double z = std::exp(-t);
    return 1.0 / (1.0 + z);
  }
  const double z = std::exp(t);
  return z / (1.0 + z);
}

static double clamp_prob(double e, long* clamp_count) {
  if (e < kPsClamp) {
    if (clamp_count) ++*clamp_count;
    return kPsClamp;
  }
  if (e > 1.0 - kPsClamp) {
    if (clamp_count) ++*clamp_count;
    return 1.0 - kPsClamp;
  }
  return e;
}

double ps_probability(const VectorXd& gamma, const VectorXd& x_row, long* clamp_count) {
  const double lp = gamma.dot(x_row);
  if (!std::isfinite(lp)) throw numeric_error("non-finite propensity linear predictor");
  return clamp_prob(expit(lp), clamp_count);
}

double weight(double d, double e, double p_E) {
  return d == 1.0 ? p_E / e : (1.0 - p_E) / (1.0 - e);
}

MatrixXd ps_design(const Dataset& data, const std::vector<std::string>& selectors) {
  MatrixXd m(data.n(), (Eigen::Index)selectors.size() + 1);
  m.col(0).setOnes();
  for (size_t j = 0; j < selectors.size(); ++j) m.col((Eigen::Index)j + 1) = data.X.col(data.col(selectors[j]));
  return m;
}

VectorXd weights_for_dataset(const PsSpec& spec, const VectorXd& gamma_or_u, const Dataset& data,
                             long* clamp_count) {
  const auto n = data.n();
  VectorXd w(n);
  if (spec.family == PsFamily::logistic) {
    const MatrixXd m = ps_design(data, spec.selectors);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = clamp_prob(expit(m.row(i).dot(gamma_or_u)), clamp_count);
      w[i] = weight(data.d[i], e, spec.p_E);
    }
  } else {
    if (gamma_or_u.size() != n) throw config_error("latent-uniform weights need one u per unit");
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = clamp_prob(gamma_or_u[i], clamp_count);
      w[i] = weight(data.d[i], e, spec.p_E);
    }
  }
  return w;
}

double logistic_loglik(const VectorXd& d, const VectorXd& e) {
  double s = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    s += d[i] == 1.0 ? std::log(e[i]) : std::log1p(-e[i]);
  return s;
}

PsFit fit_logistic_irls(const MatrixXd& design, const VectorXd& d,
                        const std::optional<VectorXd>& case_weights) {
  const auto n = design.rows(), k = design.cols();
  VectorXd cw = case_weights ? *case_weights : VectorXd::Ones(n);
  const double total_w = cw.sum();
  if (!(total_w > 0)) throw numeric_error("logistic fit: nonpositive total case weight");

  PsFit fit;
  fit.gamma = VectorXd::Zero(k);
  VectorXd eta = VectorXd::Zero(n), mu(n), s(n);
  for (int it = 1; it <= 100; ++it) {
    fit.iterations = it;
    for (Eigen::Index i = 0; i < n; ++i) {
      mu[i] = expit(eta[i]);
      s[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-10);
    }
    const VectorXd grad = design.transpose() * (cw.array() * (d - mu).array()).matrix();
    if ((grad.array().abs() / total_w).maxCoeff() <= 1e-8) break;
    const VectorXd irls_w = cw.array() * s.array();
    const MatrixXd xtwx = design.transpose() * irls_w.asDiagonal() * design;
    // working response step: solve XtWX delta = grad
    Eigen::LDLT<MatrixXd> ldlt(xtwx);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > total_w * 1e-13).all())
      throw numeric_error("logistic fit: rank-deficient weighted design");
    fit.gamma += ldlt.solve(grad);
    eta = design * fit.gamma;
    if (!eta.allFinite()) throw numeric_error("logistic fit: diverged");
  }
  // fitted probabilities within ~3e-7 of 0/1; coefficient-scale thresholds
  // never trip because the gradient test stops the climb first
  fit.separation_flag = eta.array().abs().maxCoeff() > 15.0;
  return fit;
}

PsFit fit_ps_mle(const Dataset& data, const std::vector<std::string>& selectors,
                 const std::optional<VectorXd>& case_weights) {
  return fit_logistic_irls(ps_design(data, selectors), data.d, case_weights);
}

}  // namespace gc
