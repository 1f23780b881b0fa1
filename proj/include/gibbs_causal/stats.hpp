#pragma once
#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace gc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double mean(const VectorXd& v);
// unbiased sample variance (n-1 denominator); 0 for n < 2
double variance(const VectorXd& v);
double sd(const VectorXd& v);

// Linear interpolation of order statistics, h = (n-1)p ("type 7").
// Shared by posterior quantiles and spline quartile knots.
double quantile(VectorXd v, double p);  // by value: sorts a copy

struct Summary {
  double mean = 0, sd = 0, q2_5 = 0, q50 = 0, q97_5 = 0;
};
Summary summarize_draws(const VectorXd& draws);

// Effective sample size via initial-monotone-sequence truncation of the
// autocorrelation sum (Geyer). Returns nullopt for a (near-)constant chain.
std::optional<double> ess(const VectorXd& chain);

// Split-Rhat: halve the single chain, compare within/between variance.
// nullopt when degenerate (constant halves).
std::optional<double> split_rhat(const VectorXd& chain);

double silverman_bandwidth(const VectorXd& v);

struct DensityGrid {
  VectorXd x;        // ascending, evenly spaced
  VectorXd density;  // Gaussian KDE values
};
// grid spans [min - 3bw, max + 3bw]
DensityGrid kde_grid(const VectorXd& samples, int grid_size);

}  // namespace gc
