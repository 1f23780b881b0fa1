#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "gibbs_causal/bootstrap.hpp"
#include "gibbs_causal/config.hpp"
#include "gibbs_causal/dataset.hpp"
#include "gibbs_causal/model.hpp"
#include "gibbs_causal/sampler.hpp"
#include "gibbs_causal/sim.hpp"
#include "gibbs_causal/stats.hpp"
#include "gibbs_causal/target.hpp"

namespace fs = std::filesystem;
using gc::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw gc::data_error("cannot write '" + p.string() + "'");
  out << s;
}

// completion marker: written after every other output, lists them all
void write_manifest(const fs::path& dir, const std::string& command,
                    const std::string& config_path, uint64_t seed,
                    std::vector<std::string> outputs, const std::string& started) {
  outputs.push_back((dir / "manifest.json").string());
  json m{{"command", command},
         {"config", config_path},
         {"seed", seed},
         {"version", kVersion},
         {"started_at", started},
         {"finished_at", timestamp_utc()},
         {"outputs", outputs}};
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

json summary_block(const gc::Summary& s) {
  return json{{"posterior_mean", s.mean},
              {"posterior_sd", s.sd},
              {"ci_2_5", s.q2_5},
              {"ci_97_5", s.q97_5}};
}

json opt_num(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

// treatment-effect summary JSON shared by fit and abdr outputs
json summarize_fit(const gc::PosteriorSamples& samples) {
  const auto di = samples.col("d");
  const auto pi = samples.col("pred0_mean");
  const gc::VectorXd ate = samples.draws.col(di);
  const gc::VectorXd pct =
      (100.0 * ate.array() / samples.draws.col(pi).array()).matrix();

  const gc::Diagnostics diag = gc::diagnostics(samples);
  json acceptance = json::object();
  for (const auto& b : samples.blocks) acceptance[b.name] = b.acceptance;

  json warnings = json::array();
  const auto rhat = diag.split_rhat[(size_t)di];
  if (rhat && *rhat > 1.05) {
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "split_rhat %.3f for the treatment coefficient exceeds 1.05; "
                  "treat the chain as unconverged", *rhat);
    warnings.push_back(buf);
  }
  if (samples.stuck_flag) warnings.push_back("chain flagged stuck (500+ rejections in a row)");
  if (samples.auto_rejects > 0)
    warnings.push_back(std::to_string(samples.auto_rejects) +
                       " proposals auto-rejected or draws discarded (non-finite density)");

  json params = json::object();
  for (size_t j = 0; j < samples.labels.size(); ++j)
    params[samples.labels[j]] = summary_block(gc::summarize_draws(samples.draws.col((Eigen::Index)j)));

  json pct_block = summary_block(gc::summarize_draws(pct));
  pct_block["definition"] =
      "per draw: 100 * ATE / (mean model-predicted outcome at d=0 over the observed covariates)";

  json out = summary_block(gc::summarize_draws(ate));
  out["pct_change"] = pct_block;
  out["diagnostics"] = json{{"ess", opt_num(diag.ess[(size_t)di])},
                            {"split_rhat", opt_num(rhat)},
                            {"acceptance", acceptance}};
  out["warnings"] = warnings;
  out["n_draws"] = samples.draws.rows();
  out["parameters"] = params;
  return out;
}

void write_samples_csv(const fs::path& p, const gc::PosteriorSamples& samples) {
  gc::write_matrix_csv(p.string(), samples.draws, samples.labels);
}

int cmd_fit(const std::string& config_path, const std::optional<uint64_t>& seed,
            const std::optional<std::string>& out_dir) {
  const std::string started = timestamp_utc();
  gc::FitConfig cfg = gc::parse_fit_config(gc::load_config_file(config_path));
  if (seed) cfg.sampler.seed = *seed;
  if (out_dir) cfg.out_dir = *out_dir;
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);

  const gc::Dataset data = gc::read_csv(cfg.dataset_path);
  gc::GibbsModel model;
  model.outcome = cfg.outcome;
  model.ps = cfg.ps;
  model.weighted = cfg.weighted;
  model.alpha_prior_sd = cfg.alpha_prior_sd;
  const gc::DesignMatrix probe = gc::build_design_matrix(
      cfg.outcome, data,
      cfg.outcome.needs_ps() ? std::optional<gc::VectorXd>(gc::VectorXd::Constant(data.n(), 0.5))
                             : std::nullopt);
  model.prior = gc::resolve_prior(cfg.prior, probe.M.cols());

  gc::GibbsTarget target(data, std::move(model));
  const gc::PosteriorSamples samples = gc::run_chain(target, cfg.sampler);

  write_samples_csv(dir / "samples.csv", samples);
  write_text(dir / "summary.json", summarize_fit(samples).dump(2) + "\n");
  write_manifest(dir, "fit", config_path, cfg.sampler.seed,
                 {(dir / "samples.csv").string(), (dir / "summary.json").string()}, started);
  return 0;
}

int cmd_abdr(const std::string& config_path, const std::optional<uint64_t>& seed,
             const std::optional<std::string>& out_dir) {
  const std::string started = timestamp_utc();
  gc::AbdrConfig cfg = gc::parse_abdr_config(gc::load_config_file(config_path));
  if (seed) cfg.seed = *seed;
  if (out_dir) cfg.out_dir = *out_dir;
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);

  const gc::Dataset data = gc::read_csv(cfg.dataset_path);
  gc::BootstrapConfig bc;
  bc.n_draws = cfg.n_draws;
  bc.seed = cfg.seed;
  bc.ps = cfg.ps;
  bc.outcome = cfg.outcome;
  bc.weighted = cfg.weighted;
  const gc::PosteriorSamples samples = gc::abdr_posterior(data, bc);

  write_samples_csv(dir / "samples.csv", samples);
  write_text(dir / "summary.json", summarize_fit(samples).dump(2) + "\n");
  write_manifest(dir, "abdr", config_path, cfg.seed,
                 {(dir / "samples.csv").string(), (dir / "summary.json").string()}, started);
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::optional<uint64_t>& seed,
                 const std::optional<std::string>& out_dir) {
  const std::string started = timestamp_utc();
  const json raw = gc::load_config_file(config_path);
  gc::SimulateConfig cfg = gc::parse_simulate_config(raw);
  if (seed) cfg.study.master_seed = *seed;
  if (out_dir) cfg.out_dir = *out_dir;
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);

  const gc::SimulationReport report = gc::run_study(cfg.study);

  json rep{{"av_est", report.av_est},
           {"emp_var", report.emp_var},
           {"mse", report.mse},
           {"coverage", report.coverage},
           {"truth", report.truth},
           {"mean_posterior_var", report.mean_posterior_var},
           {"n_replicates", (long)report.replicates.size()},
           {"excluded", report.excluded},
           {"study", raw.at("study")}};
  rep["study"]["master_seed"] = cfg.study.master_seed;
  write_text(dir / "report.json", rep.dump(2) + "\n");

  gc::MatrixXd rows((Eigen::Index)report.replicates.size(), 8);
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const auto& r = report.replicates[(size_t)i];
    rows.row(i) << (double)r.index, r.posterior_mean, r.ci_lo, r.ci_hi, r.posterior_var,
        (double)r.stuck, (double)r.excluded, r.treatment_rhat;
  }
  gc::write_matrix_csv((dir / "replicates.csv").string(), rows,
                       {"replicate", "posterior_mean", "ci_lo", "ci_hi", "posterior_var", "stuck",
                        "excluded", "treatment_rhat"});

  write_manifest(dir, "simulate", config_path, cfg.study.master_seed,
                 {(dir / "report.json").string(), (dir / "replicates.csv").string()}, started);
  return 0;
}

int cmd_density(const std::string& samples_path, const std::string& parameter, int grid_size,
                const std::string& out_dir) {
  const std::string started = timestamp_utc();
  if (grid_size < 32) throw gc::config_error("grid size must be at least 32");
  const gc::NamedMatrix table = gc::read_named_csv(samples_path);
  Eigen::Index col = -1;
  for (Eigen::Index j = 0; j < (Eigen::Index)table.names.size(); ++j)
    if (table.names[j] == parameter) col = j;
  if (col < 0) throw gc::config_error("no column '" + parameter + "' in " + samples_path);
  if (table.values.rows() < 10)
    throw gc::data_error("need at least 10 samples for a density, got " +
                         std::to_string(table.values.rows()));

  const gc::DensityGrid grid = gc::kde_grid(table.values.col(col), grid_size);
  double integral = 0;  // trapezoid sanity check on the returned grid
  for (Eigen::Index i = 1; i < grid.x.size(); ++i)
    integral += 0.5 * (grid.density[i] + grid.density[i - 1]) * (grid.x[i] - grid.x[i - 1]);
  if (std::abs(integral - 1.0) > 0.01)
    throw gc::numeric_error("density integrates to " + std::to_string(integral) +
                            ", outside 1 +- 0.01");

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  gc::MatrixXd out(grid.x.size(), 2);
  out.col(0) = grid.x;
  out.col(1) = grid.density;
  gc::write_matrix_csv((dir / "density.csv").string(), out, {"x", "density"});
  write_manifest(dir, "density", samples_path, 0, {(dir / "density.csv").string()}, started);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Doubly robust Bayesian inference for average treatment effects"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config_path, samples_path, parameter;
  std::optional<uint64_t> seed;
  std::optional<std::string> out_dir;
  int grid_size = 128;
  std::string density_out = ".";

  auto add_common = [&](CLI::App* c) {
    c->add_option("config", config_path, "JSON run configuration")->required();
    c->add_option("--seed", seed, "override the configured seed");
    c->add_option("--out-dir", out_dir, "override the configured output directory");
  };
  CLI::App* fit = app.add_subcommand("fit", "sample the weighted posterior on a dataset");
  add_common(fit);
  CLI::App* abdr = app.add_subcommand("abdr", "Bayesian-bootstrap comparator on a dataset");
  add_common(abdr);
  CLI::App* sim = app.add_subcommand("simulate", "replicate study with known truth");
  add_common(sim);
  CLI::App* dens = app.add_subcommand("density", "kernel density grid from a samples CSV");
  dens->add_option("samples", samples_path, "posterior samples CSV")->required();
  dens->add_option("--parameter", parameter, "column to summarize")->required();
  dens->add_option("--grid-size", grid_size, "grid points (min 32)");
  dens->add_option("--out-dir", density_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (fit->parsed()) return cmd_fit(config_path, seed, out_dir);
    if (abdr->parsed()) return cmd_abdr(config_path, seed, out_dir);
    if (sim->parsed()) return cmd_simulate(config_path, seed, out_dir);
    if (dens->parsed()) return cmd_density(samples_path, parameter, grid_size, density_out);
  } catch (const gc::config_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const gc::data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const gc::numeric_error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
