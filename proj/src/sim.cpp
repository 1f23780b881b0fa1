#include "gibbs_causal/sim.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "gibbs_causal/stats.hpp"

namespace gc {

void DgpSpec::validate() const {
  if (n < 10) throw config_error("dgp needs n >= 10");
  if (!(x_disp > 0) || !(y_disp > 0)) throw config_error("dgp dispersions must be positive");
}

double DgpSpec::truth() const { return example == Example::one ? theta1 : 1.0; }

Dataset dgp_example1(const DgpSpec& spec, Rng& rng) {
  spec.validate();
  const auto n = spec.n;
  const double xs = spec.variance_convention == DgpSpec::VarConv::variance
                        ? std::sqrt(spec.x_disp) : spec.x_disp;
  const double ys = spec.variance_convention == DgpSpec::VarConv::variance
                        ? std::sqrt(spec.y_disp) : spec.y_disp;
  Dataset ds;
  ds.y.resize(n);
  ds.d.resize(n);
  ds.X.resize(n, 1);
  ds.names = {"x"};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = xs * rnorm(rng);
    const double e = expit(spec.alpha0 + spec.alpha1 * x);
    const double d = runif(rng) < e ? 1.0 : 0.0;
    const double y = spec.theta0 + spec.theta1 * d + spec.theta2 * x + ys * rnorm(rng);
    ds.X(i, 0) = x;
    ds.d[i] = d;
    ds.y[i] = y;
  }
  ds.validate();
  return ds;
}

Dataset dgp_example2(const DgpSpec& spec, Rng& rng) {
  spec.validate();
  const auto n = spec.n;
  const double c = std::sqrt(1.0 - 2.0 / M_PI);
  Dataset ds;
  ds.y.resize(n);
  ds.d.resize(n);
  ds.X.resize(n, 5);
  ds.names = {"x1", "x2", "x3", "x4", "u1"};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x1 = rnorm(rng), x2 = rnorm(rng), x3 = rnorm(rng), x4 = rnorm(rng);
    const double u1 = std::abs(x1) / c;
    const double e = expit(0.4 * u1 + 0.4 * x2 + 0.8 * x3);
    const double d = runif(rng) < e ? 1.0 : 0.0;
    const double y = d - u1 - x2 - x4 + rnorm(rng);
    ds.X(i, 0) = x1;
    ds.X(i, 1) = x2;
    ds.X(i, 2) = x3;
    ds.X(i, 3) = x4;
    ds.X(i, 4) = u1;
    ds.d[i] = d;
    ds.y[i] = y;
  }
  ds.validate();
  return ds;
}

Dataset make_dataset(const DgpSpec& spec, Rng& rng) {
  return spec.example == DgpSpec::Example::one ? dgp_example1(spec, rng) : dgp_example2(spec, rng);
}

void StudySpec::validate() const {
  dgp.validate();
  sampler.validate();
  if (n_replicates < 1) throw config_error("study needs n_replicates >= 1");
  if (bootstrap_draws < 1) throw config_error("study needs bootstrap_draws >= 1");
  const bool ex1 = dgp.example == DgpSpec::Example::one;
  const bool ex1_scenario = scenario == Scenario::correct_or_incorrect_ps ||
                            scenario == Scenario::incorrect_or_correct_ps ||
                            scenario == Scenario::both_incorrect;
  if (ex1 != ex1_scenario) throw config_error("scenario is incompatible with the dgp example");
  if (model_variant == ModelVariant::bspline_x1 && ex1)
    throw config_error("bspline_x1 applies to example 2 designs");
}

namespace {

struct Wiring {
  OutcomeSpec outcome;
  PsSpec ps;
  bool weighted = true;
  VectorXd prior_means;  // resized later to design width
};

Wiring wire(const StudySpec& spec) {
  Wiring w;
  const auto variant = spec.model_variant;
  switch (spec.scenario) {
    case Scenario::correct_or_incorrect_ps:
      w.outcome.covariate_terms = {"x"};
      w.ps.family = PsFamily::latent_uniform;
      break;
    case Scenario::incorrect_or_correct_ps:
      w.ps.family = PsFamily::logistic;
      w.ps.selectors = {"x"};
      break;
    case Scenario::both_incorrect:
      w.ps.family = PsFamily::latent_uniform;
      break;
    case Scenario::scenario_I:
      w.outcome.covariate_terms = {"x1", "x2", "x4"};
      w.ps.family = PsFamily::logistic;
      w.ps.selectors = {"u1", "x2", "x3"};
      break;
    case Scenario::scenario_II:
      w.outcome.covariate_terms = {"u1", "x2", "x4"};
      w.ps.family = PsFamily::logistic;
      w.ps.selectors = {"x1", "x2", "x3"};
      break;
  }
  w.outcome.include_ps_covariate = variant == ModelVariant::ps_cov;
  w.outcome.include_inverse_ps_covariate = variant == ModelVariant::inv_ps_cov;
  // PS-as-covariate rows are regression adjustment: the PS block still mixes
  // (it drives the covariate column) but the outcome loss is unweighted
  w.weighted = !w.outcome.needs_ps();
  if (variant == ModelVariant::bspline_x1) w.outcome.spline_terms = {{"x1", 3, "quartiles"}};
  return w;
}

// prior centers: the paper's example-1 values for the named coefficients,
// zero elsewhere; everything at sd 100 so the centers are weakly informative
VectorXd prior_means_for(const StudySpec& spec, const DesignMatrix& design) {
  VectorXd m = VectorXd::Zero(design.M.cols());
  if (spec.dgp.example == DgpSpec::Example::one) {
    m[0] = spec.dgp.theta0;
    m[kTreatmentIndex] = spec.dgp.theta1;
    for (Eigen::Index j = 0; j < (Eigen::Index)design.labels.size(); ++j)
      if (design.labels[j] == "x") m[j] = spec.dgp.theta2;
  }
  return m;
}

}  // namespace

GibbsModel assemble_model(const StudySpec& spec, const Dataset& data) {
  const Wiring w = wire(spec);
  GibbsModel model;
  model.outcome = w.outcome;
  model.ps = w.ps;
  model.weighted = w.weighted;

  // probe design to size the prior (PS columns need interior placeholder values)
  const DesignMatrix probe = build_design_matrix(
      w.outcome, data,
      w.outcome.needs_ps() ? std::optional<VectorXd>(VectorXd::Constant(data.n(), 0.5))
                           : std::nullopt);
  model.prior = PriorSpec::flat_default(probe.M.cols());
  model.prior.beta_mean = prior_means_for(spec, probe);
  return model;
}

BootstrapConfig assemble_bootstrap(const StudySpec& spec, uint64_t seed) {
  const Wiring w = wire(spec);
  BootstrapConfig cfg;
  cfg.n_draws = spec.bootstrap_draws;
  cfg.seed = seed;
  cfg.ps = w.ps;
  cfg.outcome = w.outcome;
  cfg.weighted = w.weighted;
  return cfg;
}

int worker_count() {
  if (const char* env = std::getenv("GIBBS_CAUSAL_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? (int)hw : 1;
}

SimulationReport run_study(const StudySpec& spec) {
  spec.validate();
  const long R = spec.n_replicates;
  std::vector<ReplicateRecord> recs((size_t)R);

  auto run_one = [&](long r) {
    Rng rng = make_rng(spec.master_seed, (uint64_t)r);
    const Dataset data = make_dataset(spec.dgp, rng);
    const uint64_t est_seed = rng();

    ReplicateRecord rec;
    rec.index = r;
    PosteriorSamples samples;
    if (spec.estimator == Estimator::gibbs) {
      GibbsTarget target(data, assemble_model(spec, data));
      SamplerConfig cfg = spec.sampler;
      cfg.seed = est_seed;
      samples = run_chain(target, cfg);
    } else {
      samples = abdr_posterior(data, assemble_bootstrap(spec, est_seed));
    }
    const VectorXd draws = samples.draws.col(samples.col("d"));
    const Summary s = summarize_draws(draws);
    rec.posterior_mean = s.mean;
    rec.ci_lo = s.q2_5;
    rec.ci_hi = s.q97_5;
    rec.posterior_var = s.sd * s.sd;
    rec.stuck = samples.stuck_flag;
    if (spec.estimator == Estimator::gibbs && draws.size() >= 4)
      rec.treatment_rhat = split_rhat(draws).value_or(1.0);
    recs[(size_t)r] = rec;
  };

  const int workers = std::min<long>(worker_count(), R);
  if (workers <= 1) {
    for (long r = 0; r < R; ++r) run_one(r);
  } else {
    std::atomic<long> next{0};
    std::exception_ptr first_error;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (;;) {
          const long r = next.fetch_add(1);
          if (r >= R) return;
          try {
            run_one(r);
          } catch (...) {
            std::lock_guard<std::mutex> lk(err_mu);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  SimulationReport rep;
  rep.truth = spec.dgp.truth();
  long stuck_count = 0;
  for (const auto& r : recs) stuck_count += r.stuck;
  const bool exclude_stuck = double(stuck_count) > 0.02 * double(R);

  VectorXd means(R), pvars(R);
  Eigen::Index m = 0;
  long covered = 0;
  for (auto& r : recs) {
    r.excluded = exclude_stuck && r.stuck;
    if (r.excluded) {
      ++rep.excluded;
      continue;
    }
    means[m] = r.posterior_mean;
    pvars[m] = r.posterior_var;
    ++m;
    covered += (r.ci_lo <= rep.truth && rep.truth <= r.ci_hi);
  }
  if (m == 0) throw numeric_error("all replicates were excluded as stuck");
  means.conservativeResize(m);
  pvars.conservativeResize(m);
  rep.av_est = means.mean();
  rep.emp_var = variance(means);
  const double bias = rep.av_est - rep.truth;
  rep.mse = bias * bias + rep.emp_var;
  rep.coverage = double(covered) / double(m);
  rep.mean_posterior_var = pvars.mean();
  rep.replicates = std::move(recs);
  return rep;
}

}  // namespace gc
