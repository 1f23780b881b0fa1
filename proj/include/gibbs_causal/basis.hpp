#pragma once
#include <Eigen/Dense>

namespace gc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// B-spline basis on a clamped knot vector: boundary knots repeated degree+1
// times, interior knots at chosen quantiles. column_count = n_interior + degree + 1.
struct SplineBasis {
  int degree = 3;
  VectorXd interior_knots;                 // sorted, strictly inside boundary
  double boundary_lo = 0, boundary_hi = 0; // min/max of the training data
  int column_count = 0;

  // evaluation clamps x into [boundary_lo, boundary_hi]; clamp events are
  // counted into *clamped when provided
  VectorXd row(double x, long* clamped = nullptr) const;
  MatrixXd evaluate(const VectorXd& x, long* clamped = nullptr) const;
};

// interior knots at the 25/50/75% quantiles of x (same interpolation rule as
// the posterior summaries); boundary at min/max. Degree-3 default.
SplineBasis make_quartile_basis(const VectorXd& x, int degree = 3);

}  // namespace gc
