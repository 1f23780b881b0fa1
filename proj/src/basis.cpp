#include "gibbs_causal/basis.hpp"

#include <algorithm>
#include <set>
#include <vector>

#include "gibbs_causal/dataset.hpp"
#include "gibbs_causal/stats.hpp"

namespace gc {

SplineBasis make_quartile_basis(const VectorXd& x, int degree) {
  if (degree < 1) throw config_error("spline degree must be >= 1");
  std::set<double> distinct(x.data(), x.data() + x.size());
  if (distinct.size() < 4) throw config_error("quartile basis needs >= 4 distinct values");
  SplineBasis b;
  b.degree = degree;
  b.interior_knots.resize(3);
  b.interior_knots[0] = quantile(x, 0.25);
  b.interior_knots[1] = quantile(x, 0.50);
  b.interior_knots[2] = quantile(x, 0.75);
  b.boundary_lo = x.minCoeff();
  b.boundary_hi = x.maxCoeff();
  b.column_count = int(b.interior_knots.size()) + degree + 1;
  return b;
}

VectorXd SplineBasis::row(double x, long* clamped) const {
  const int k = degree;
  const int nb = column_count;
  // clamped knot vector: lo repeated k+1 times, interior, hi repeated k+1 times
  const int nknots = nb + k + 1;
  std::vector<double> t(nknots);
  for (int i = 0; i <= k; ++i) t[i] = boundary_lo;
  for (int i = 0; i < interior_knots.size(); ++i) t[k + 1 + i] = interior_knots[i];
  for (int i = 0; i <= k; ++i) t[nknots - 1 - i] = boundary_hi;

  if (x < boundary_lo || x > boundary_hi) {
    if (clamped) ++*clamped;
    x = std::clamp(x, boundary_lo, boundary_hi);
  }

  // locate the knot interval [t[j], t[j+1]) containing x; x == hi belongs to
  // the last nonempty interval
  int j = k;
  const int last = nb - 1;  // last valid interval index
  while (j < last && x >= t[j + 1]) ++j;

  // Cox–de Boor, de Boor's triangular scheme over the k+1 active functions
  VectorXd nvals = VectorXd::Zero(k + 1);
  nvals[0] = 1.0;
  for (int deg = 1; deg <= k; ++deg) {
    double saved = 0.0;
    for (int r = 0; r < deg; ++r) {
      const double tl = t[j - deg + 1 + r + deg] - t[j - deg + 1 + r];  // t[j+1+r] - t[j-deg+1+r]
      const double term = tl > 0 ? nvals[r] / tl : 0.0;
      nvals[r] = saved + (t[j + 1 + r] - x) * term;
      saved = (x - t[j - deg + 1 + r]) * term;
    }
    nvals[deg] = saved;
  }

  VectorXd out = VectorXd::Zero(nb);
  for (int r = 0; r <= k; ++r) {
    const int idx = j - k + r;
    if (idx >= 0 && idx < nb) out[idx] = nvals[r];
  }
  return out;
}

MatrixXd SplineBasis::evaluate(const VectorXd& x, long* clamped) const {
  MatrixXd out(x.size(), column_count);
  for (Eigen::Index i = 0; i < x.size(); ++i) out.row(i) = row(x[i], clamped);
  return out;
}

}  // namespace gc
