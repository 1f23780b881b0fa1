#include "gibbs_causal/sampler.hpp"

#include <cmath>

#include "gibbs_causal/rng.hpp"

namespace gc {

void SamplerConfig::validate() const {
  if (n_iterations < 1 || n_burnin < 0 || n_burnin >= n_iterations)
    throw config_error("sampler needs 0 <= n_burnin < n_iterations");
  if (!(target_accept_multivariate > 0 && target_accept_multivariate < 1) ||
      !(target_accept_scalar > 0 && target_accept_scalar < 1))
    throw config_error("target acceptance rates must be in (0,1)");
  if (initial_steps)
    for (double s : *initial_steps)
      if (!(s > 0)) throw config_error("initial step sizes must be positive");
}

Eigen::Index PosteriorSamples::col(const std::string& label) const {
  for (Eigen::Index j = 0; j < (Eigen::Index)labels.size(); ++j)
    if (labels[j] == label) return j;
  throw config_error("no sampled parameter labeled '" + label + "'");
}

PosteriorSamples run_chain(SamplerTarget& target, const SamplerConfig& config) {
  config.validate();
  const int nb = target.n_blocks();
  if (config.initial_steps && (int)config.initial_steps->size() != nb)
    throw config_error("initial_steps must list one value per block");

  std::vector<BlockInfo> info(nb);
  std::vector<MatrixXd> chol(nb);
  // one step per block; elementwise blocks carry one step per element
  std::vector<VectorXd> log_step(nb);
  for (int b = 0; b < nb; ++b) {
    info[b] = target.block_info(b);
    if (info[b].kind == BlockInfo::multivariate) chol[b] = target.proposal_chol(b);
    const double s0 = config.initial_steps ? (*config.initial_steps)[(size_t)b] : info[b].initial_step;
    const Eigen::Index m = info[b].kind == BlockInfo::elementwise ? info[b].size : 1;
    log_step[b] = VectorXd::Constant(m, std::log(s0));
  }

  target.refresh();
  if (!std::isfinite(target.log_posterior()))
    throw numeric_error("initial sampler state has non-finite log posterior");

  Rng rng(config.seed);
  const long retained = config.n_iterations - config.n_burnin;
  PosteriorSamples out;
  out.seed = config.seed;
  out.labels = target.report_labels();
  out.draws.resize(retained, (Eigen::Index)out.labels.size());

  std::vector<double> acc_sum(nb, 0.0);
  std::vector<long> acc_n(nb, 0);
  std::vector<long> consec_rej(nb, 0);

  VectorXd z, delta, d1(1);
  for (long t = 0; t < config.n_iterations; ++t) {
    const bool adapting = config.adapt && t < config.n_burnin;
    const double gamma = std::pow(double(t) + 1.0, -0.7);
    target.refresh();
    for (int b = 0; b < nb; ++b) {
      const auto& bi = info[b];
      const double tgt = bi.kind == BlockInfo::multivariate ? config.target_accept_multivariate
                                                            : config.target_accept_scalar;
      if (bi.kind == BlockInfo::elementwise) {
        long accepted_in_block = 0;
        double mean_a = 0;
        for (Eigen::Index i = 0; i < bi.size; ++i) {
          d1[0] = std::exp(log_step[b][i]) * rnorm(rng);
          const double dl = target.propose(b, i, d1);
          double a;
          if (std::isnan(dl)) {
            ++out.auto_rejects;
            a = 0.0;
            target.reject_pending();
          } else {
            a = std::min(1.0, std::exp(std::min(dl, 0.0)));
            if (std::log(runif(rng)) < dl) {
              target.accept_pending();
              ++accepted_in_block;
            } else {
              target.reject_pending();
            }
          }
          if (adapting) log_step[b][i] += gamma * (a - tgt);
          mean_a += a;
        }
        mean_a /= double(bi.size);
        if (t >= config.n_burnin) {
          acc_sum[b] += mean_a;
          ++acc_n[b];
          consec_rej[b] = accepted_in_block == 0 ? consec_rej[b] + 1 : 0;
        }
      } else {
        if (bi.kind == BlockInfo::multivariate) {
          z.resize(bi.size);
          for (Eigen::Index i = 0; i < bi.size; ++i) z[i] = rnorm(rng);
          delta = std::exp(log_step[b][0]) * (chol[b] * z);
        } else {
          delta = d1;
          delta[0] = std::exp(log_step[b][0]) * rnorm(rng);
        }
        const double dl = target.propose(b, 0, delta);
        double a;
        bool accepted = false;
        if (std::isnan(dl)) {
          ++out.auto_rejects;
          a = 0.0;
          target.reject_pending();
        } else {
          a = std::min(1.0, std::exp(std::min(dl, 0.0)));
          if (std::log(runif(rng)) < dl) {
            target.accept_pending();
            accepted = true;
          } else {
            target.reject_pending();
          }
        }
        if (adapting) log_step[b][0] += gamma * (a - tgt);
        if (t >= config.n_burnin) {
          acc_sum[b] += a;
          ++acc_n[b];
          consec_rej[b] = accepted ? 0 : consec_rej[b] + 1;
        }
      }
      if (t >= config.n_burnin && consec_rej[b] >= config.stuck_rejections) out.stuck_flag = true;
    }
    if (t >= config.n_burnin) out.draws.row(t - config.n_burnin) = target.report_state();
  }

  if (!out.draws.allFinite()) throw numeric_error("sampler produced non-finite draws");
  out.blocks.resize(nb);
  for (int b = 0; b < nb; ++b) {
    out.blocks[(size_t)b].name = info[b].name;
    out.blocks[(size_t)b].acceptance = acc_n[b] ? acc_sum[b] / double(acc_n[b]) : 0.0;
    out.blocks[(size_t)b].final_step = std::exp(log_step[b].mean());
  }
  return out;
}

Diagnostics diagnostics(const PosteriorSamples& samples) {
  if (samples.draws.rows() < 4) throw config_error("diagnostics need >= 4 retained draws");
  Diagnostics d;
  const auto p = samples.draws.cols();
  d.ess.resize(p);
  d.split_rhat.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    d.ess[j] = ess(samples.draws.col(j));
    d.split_rhat[j] = split_rhat(samples.draws.col(j));
  }
  for (const auto& b : samples.blocks) d.acceptance.push_back(b.acceptance);
  return d;
}

Summary summarize(const PosteriorSamples& samples, const std::string& label) {
  return summarize_draws(samples.draws.col(samples.col(label)));
}

}  // namespace gc
