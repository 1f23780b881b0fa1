#pragma once
#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "gibbs_causal/basis.hpp"
#include "gibbs_causal/dataset.hpp"
#include "gibbs_causal/stats.hpp"

namespace gc {

struct SplineTerm {
  std::string column;
  int degree = 3;
  std::string knot_rule = "quartiles";  // only rule implemented
};

struct OutcomeSpec {
  std::vector<std::string> covariate_terms;
  bool include_ps_covariate = false;
  bool include_inverse_ps_covariate = false;
  std::vector<SplineTerm> spline_terms;
  // noise: Gaussian with unknown scale sigma (the only family)

  bool needs_ps() const { return include_ps_covariate || include_inverse_ps_covariate; }
  void validate(const Dataset& data) const;
};

struct ParamVector {
  VectorXd beta;   // [intercept, treatment coef, covariate/spline/ps terms]
  double sigma = 1.0;
};

// treatment coefficient position in every design
constexpr Eigen::Index kTreatmentIndex = 1;

struct PriorSpec {
  VectorXd beta_mean;        // per-coefficient Normal means
  VectorXd beta_sd;          // per-coefficient Normal sds (> 0)
  double sigma_scale = 50.0; // Half-Normal scale for sigma

  static PriorSpec flat_default(Eigen::Index k);
  void validate(Eigen::Index k) const;
  double log_beta_density(const VectorXd& beta) const;
  double log_sigma_density(double sigma) const;  // -inf for sigma <= 0
};

struct DesignMatrix {
  MatrixXd M;                       // n x k
  std::vector<std::string> labels;  // k labels
  std::vector<SplineBasis> bases;   // one per spline term, training-data knots
  // column range occupied by each spline term, [first, count]
  std::vector<std::pair<Eigen::Index, Eigen::Index>> spline_cols;
  std::optional<Eigen::Index> ps_col, inv_ps_col;
  long clamp_events = 0;            // out-of-range spline evaluations
};

// columns ordered [intercept, d, covariate terms, spline terms, ps terms].
// Spline basis drops its first column (the intercept is already present);
// a spline term on column c replaces a plain c term when both are requested.
DesignMatrix build_design_matrix(const OutcomeSpec& spec, const Dataset& data,
                                 const std::optional<VectorXd>& ps_values = std::nullopt);

// rebuild only the PS-dependent columns in place (sampler fast path)
void refresh_ps_columns(DesignMatrix& design, const VectorXd& ps_values);

// sum_i w_i logNormal(y_i; row_i . beta, sigma^2); throws numeric_error with
// the offending index when a term is non-finite
double weighted_loglik(const ParamVector& theta, const MatrixXd& design, const VectorXd& y,
                       const VectorXd& w);

// weighted_loglik + log prior; sigma <= 0 yields -inf (rejectable), not a throw
double gibbs_log_posterior(const ParamVector& theta, const MatrixXd& design, const VectorXd& y,
                           const VectorXd& w, const PriorSpec& prior);

// weighted least squares: argmin sum w_i (y_i - row_i b)^2, plus weighted
// residual scale. Throws numeric_error on rank deficiency.
struct WlsFit {
  VectorXd beta;
  double sigma = 1.0;
  MatrixXd xtwx;  // weighted normal-equations matrix (proposal geometry)
};
WlsFit wls_solve(const MatrixXd& design, const VectorXd& y, const VectorXd& w);

// posterior summary of the treatment-coefficient column
Summary ate_from_samples(const MatrixXd& draws, const std::vector<std::string>& labels);

}  // namespace gc
