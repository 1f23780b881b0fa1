#include "gibbs_causal/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gc {

double mean(const VectorXd& v) {
  if (v.size() == 0) throw std::invalid_argument("mean: empty vector");
  return v.mean();
}

double variance(const VectorXd& v) {
  const auto n = v.size();
  if (n < 2) return 0.0;
  const double m = v.mean();
  return (v.array() - m).square().sum() / double(n - 1);
}

double sd(const VectorXd& v) { return std::sqrt(variance(v)); }

double quantile(VectorXd v, double p) {
  const auto n = v.size();
  if (n == 0) throw std::invalid_argument("quantile: empty vector");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p outside [0,1]");
  std::sort(v.data(), v.data() + n);
  if (n == 1) return v[0];
  const double h = (double(n) - 1.0) * p;
  const auto lo = (Eigen::Index)std::floor(h);
  if (lo >= n - 1) return v[n - 1];
  const double frac = h - double(lo);
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

Summary summarize_draws(const VectorXd& draws) {
  if (draws.size() == 0) throw std::invalid_argument("summarize_draws: empty sample set");
  Summary s;
  s.mean = draws.mean();
  s.sd = sd(draws);
  s.q2_5 = quantile(draws, 0.025);
  s.q50 = quantile(draws, 0.50);
  s.q97_5 = quantile(draws, 0.975);
  return s;
}

std::optional<double> ess(const VectorXd& chain) {
  const auto n = chain.size();
  if (n < 4) return std::nullopt;
  const double m = chain.mean();
  VectorXd c = chain.array() - m;
  const double c0 = c.squaredNorm() / double(n);
  if (!(c0 > 0) || c0 < 1e-300) return std::nullopt;  // constant chain

  auto acov = [&](Eigen::Index lag) {
    return c.head(n - lag).dot(c.tail(n - lag)) / double(n);
  };

  // pair sums Γ_k = γ_{2k} + γ_{2k+1}: keep while positive, clamp to be
  // nonincreasing (initial monotone sequence), then
  // n/ESS = 2 Σ_k Γ_k / γ_0 − 1
  double sum_pairs = 0.0;
  double prev_pair = 1e300;
  for (Eigen::Index k = 0;; ++k) {
    const Eigen::Index l1 = 2 * k, l2 = 2 * k + 1;
    if (l2 >= n) break;
    double g = acov(l1) + acov(l2);
    if (g <= 0) break;
    g = std::min(g, prev_pair);
    prev_pair = g;
    sum_pairs += g;
  }
  double denom = 2.0 * sum_pairs / c0 - 1.0;
  if (denom < 1e-6) denom = 1e-6;
  return double(n) / denom;
}

std::optional<double> split_rhat(const VectorXd& chain) {
  const auto n = chain.size();
  if (n < 4) return std::nullopt;
  const auto h = n / 2;
  VectorXd a = chain.head(h), b = chain.segment(n - h, h);
  const double va = variance(a), vb = variance(b);
  const double w = 0.5 * (va + vb);
  if (!(w > 0) || w < 1e-300) return std::nullopt;
  const double ma = a.mean(), mb = b.mean(), gm = 0.5 * (ma + mb);
  const double bvar = (ma - gm) * (ma - gm) + (mb - gm) * (mb - gm);  // = B/h * (m-1)/m with m=2
  const double var_plus = double(h - 1) / double(h) * w + bvar;
  return std::sqrt(var_plus / w);
}

double silverman_bandwidth(const VectorXd& v) {
  const auto n = v.size();
  if (n < 2) throw std::invalid_argument("silverman_bandwidth: need >= 2 samples");
  const double s = sd(v);
  const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
  double spread = s;
  if (iqr > 0) spread = std::min(s, iqr / 1.349);
  if (!(spread > 0)) spread = (s > 0 ? s : 1.0);
  return 0.9 * spread * std::pow(double(n), -0.2);
}

DensityGrid kde_grid(const VectorXd& samples, int grid_size) {
  if (samples.size() < 10) throw std::invalid_argument("kde_grid: need >= 10 samples");
  if (grid_size < 32) throw std::invalid_argument("kde_grid: grid size minimum is 32");
  const double bw = silverman_bandwidth(samples);
  const double lo = samples.minCoeff() - 3.0 * bw, hi = samples.maxCoeff() + 3.0 * bw;
  DensityGrid g;
  g.x = VectorXd::LinSpaced(grid_size, lo, hi);
  g.density.resize(grid_size);
  const double norm = 1.0 / (double(samples.size()) * bw * std::sqrt(2.0 * M_PI));
  for (int i = 0; i < grid_size; ++i) {
    const double xi = g.x[i];
    g.density[i] = norm * ((samples.array() - xi).square() / (-2.0 * bw * bw)).exp().sum();
  }
  return g;
}

}  // namespace gc
