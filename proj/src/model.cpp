#include "gibbs_causal/model.hpp"

#include <cmath>
#include <set>

namespace gc {

static constexpr double kLog2Pi = 1.8378770664093453;

void OutcomeSpec::validate(const Dataset& data) const {
  std::set<std::string> seen;
  for (const auto& c : covariate_terms) {
    (void)data.col(c);
    if (!seen.insert(c).second) throw config_error("duplicate covariate term '" + c + "'");
  }
  std::set<std::string> splined;
  for (const auto& s : spline_terms) {
    (void)data.col(s.column);
    if (!splined.insert(s.column).second)
      throw config_error("duplicate spline term on '" + s.column + "'");
    if (s.degree < 1) throw config_error("spline degree must be >= 1");
    if (s.knot_rule != "quartiles") throw config_error("unknown knot rule '" + s.knot_rule + "'");
  }
}

PriorSpec PriorSpec::flat_default(Eigen::Index k) {
  PriorSpec p;
  p.beta_mean = VectorXd::Zero(k);
  p.beta_sd = VectorXd::Constant(k, 100.0);
  return p;
}

void PriorSpec::validate(Eigen::Index k) const {
  if (beta_mean.size() != k || beta_sd.size() != k)
    throw config_error("prior length does not match design column count");
  if (!(beta_sd.array() > 0).all() || !(sigma_scale > 0))
    throw config_error("prior sds and sigma scale must be positive");
}

double PriorSpec::log_beta_density(const VectorXd& beta) const {
  double s = 0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double z = (beta[j] - beta_mean[j]) / beta_sd[j];
    s += -0.5 * z * z - std::log(beta_sd[j]) - 0.5 * kLog2Pi;
  }
  return s;
}

double PriorSpec::log_sigma_density(double sigma) const {
  if (!(sigma > 0)) return -std::numeric_limits<double>::infinity();
  const double z = sigma / sigma_scale;
  return 0.5 * std::log(2.0) - 0.5 * std::log(M_PI) - std::log(sigma_scale) - 0.5 * z * z;
}

DesignMatrix build_design_matrix(const OutcomeSpec& spec, const Dataset& data,
                                 const std::optional<VectorXd>& ps_values) {
  spec.validate(data);
  if (spec.needs_ps() && !ps_values)
    throw config_error("outcome spec requests PS columns but no PS values were assembled");
  if (ps_values) {
    if (ps_values->size() != data.n()) throw config_error("ps_values length mismatch");
    if (!((ps_values->array() > 0).all() && (ps_values->array() < 1).all()))
      throw config_error("ps_values must lie strictly in (0,1)");
  }

  DesignMatrix out;
  const auto n = data.n();
  // spline term replaces a same-column plain term
  std::vector<std::string> plain;
  for (const auto& c : spec.covariate_terms) {
    bool splined = false;
    for (const auto& s : spec.spline_terms) splined = splined || s.column == c;
    if (!splined) plain.push_back(c);
  }

  Eigen::Index k = 2 + (Eigen::Index)plain.size();
  std::vector<SplineBasis> bases;
  for (const auto& s : spec.spline_terms) {
    bases.push_back(make_quartile_basis(data.X.col(data.col(s.column)), s.degree));
    k += bases.back().column_count - 1;  // first basis column dropped
  }
  if (spec.include_ps_covariate) ++k;
  if (spec.include_inverse_ps_covariate) ++k;

  out.M.resize(n, k);
  out.labels.resize(k);
  out.M.col(0).setOnes();
  out.labels[0] = "intercept";
  out.M.col(kTreatmentIndex) = data.d;
  out.labels[kTreatmentIndex] = "d";
  Eigen::Index j = 2;
  for (const auto& c : plain) {
    out.M.col(j) = data.X.col(data.col(c));
    out.labels[j] = c;
    ++j;
  }
  for (size_t t = 0; t < spec.spline_terms.size(); ++t) {
    const auto& term = spec.spline_terms[t];
    const auto& b = bases[t];
    const MatrixXd full = b.evaluate(data.X.col(data.col(term.column)), &out.clamp_events);
    const Eigen::Index nb = b.column_count - 1;
    out.spline_cols.emplace_back(j, nb);
    out.M.middleCols(j, nb) = full.rightCols(nb);
    for (Eigen::Index c = 0; c < nb; ++c)
      out.labels[j + c] = "bs(" + term.column + ")[" + std::to_string(c + 2) + "]";
    j += nb;
  }
  out.bases = std::move(bases);
  if (spec.include_ps_covariate) {
    out.ps_col = j;
    out.M.col(j) = *ps_values;
    out.labels[j] = "ps";
    ++j;
  }
  if (spec.include_inverse_ps_covariate) {
    out.inv_ps_col = j;
    out.M.col(j) = ps_values->array().inverse();
    out.labels[j] = "inv_ps";
    ++j;
  }
  return out;
}

void refresh_ps_columns(DesignMatrix& design, const VectorXd& ps_values) {
  if (design.ps_col) design.M.col(*design.ps_col) = ps_values;
  if (design.inv_ps_col) design.M.col(*design.inv_ps_col) = ps_values.array().inverse();
}

double weighted_loglik(const ParamVector& theta, const MatrixXd& design, const VectorXd& y,
                       const VectorXd& w) {
  if (design.cols() != theta.beta.size() || design.rows() != y.size() || w.size() != y.size())
    throw config_error("weighted_loglik: dimension mismatch");
  const double sig2 = theta.sigma * theta.sigma;
  const VectorXd resid = y - design * theta.beta;
  const double sq = (w.array() * resid.array().square()).sum();
  const double sw = w.sum();
  const double out = -0.5 * sq / sig2 - sw * (std::log(theta.sigma) + 0.5 * kLog2Pi);
  if (!std::isfinite(out)) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double r = resid[i];
      const double term = w[i] * (-0.5 * r * r / sig2 - std::log(theta.sigma) - 0.5 * kLog2Pi);
      if (!std::isfinite(term))
        throw numeric_error("weighted_loglik: non-finite contribution at index " + std::to_string(i));
    }
    throw numeric_error("weighted_loglik: non-finite sum");
  }
  return out;
}

double gibbs_log_posterior(const ParamVector& theta, const MatrixXd& design, const VectorXd& y,
                           const VectorXd& w, const PriorSpec& prior) {
  if (!(theta.sigma > 0)) return -std::numeric_limits<double>::infinity();
  return weighted_loglik(theta, design, y, w) + prior.log_beta_density(theta.beta) +
         prior.log_sigma_density(theta.sigma);
}

WlsFit wls_solve(const MatrixXd& design, const VectorXd& y, const VectorXd& w) {
  const auto n = design.rows(), k = design.cols();
  WlsFit fit;
  fit.xtwx = design.transpose() * w.asDiagonal() * design;
  const VectorXd xtwy = design.transpose() * (w.array() * y.array()).matrix();
  Eigen::LDLT<MatrixXd> ldlt(fit.xtwx);
  const double dmax = ldlt.vectorD().array().abs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > dmax * 1e-12).all())
    throw numeric_error("weighted least squares: rank-deficient design");
  fit.beta = ldlt.solve(xtwy);
  const VectorXd resid = y - design * fit.beta;
  const double sq = (w.array() * resid.array().square()).sum();
  const double dof = std::max(1.0, double(n - k));
  fit.sigma = std::sqrt(std::max(sq / dof, 1e-12));
  return fit;
}

Summary ate_from_samples(const MatrixXd& draws, const std::vector<std::string>& labels) {
  if (draws.rows() == 0) throw config_error("ate_from_samples: empty sample set");
  std::optional<Eigen::Index> col;
  for (Eigen::Index j = 0; j < (Eigen::Index)labels.size(); ++j)
    if (labels[j] == "d") col = j;
  if (!col) throw config_error("ate_from_samples: no column labelled 'd'");
  return summarize_draws(draws.col(*col));
}

}  // namespace gc
