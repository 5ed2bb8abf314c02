// Command-line driver for the ETF selection pipeline:
//   fit -> select -> portfolio, plus rolling windows, the simulation study,
//   and the bivariate closed-form benchmark. Every command is a deterministic
//   function of (config, input files, seed) and writes a resolved config copy
//   next to its outputs.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "etfsel/bivariate.hpp"
#include "etfsel/config.hpp"
#include "etfsel/draw_io.hpp"
#include "etfsel/errors.hpp"
#include "etfsel/lasso_path.hpp"
#include "etfsel/latent_factor.hpp"
#include "etfsel/moments.hpp"
#include "etfsel/portfolio.hpp"
#include "etfsel/returns_panel.hpp"
#include "etfsel/selection.hpp"
#include "etfsel/simulation.hpp"
#include "etfsel/ssvs.hpp"

namespace fs = std::filesystem;
using namespace etfsel;

namespace {

constexpr std::uint64_t kFactorSeedSalt = 0x9e3779b97f4a7c15ull;
constexpr std::uint64_t kSelectedDESalt = 0xa24baed4963ee407ull;
constexpr std::uint64_t kDenseDESalt = 0x6a09e667f3bcc909ull;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ModelPrior parse_prior(const std::string& s) {
  if (s == "uniform") return {ModelPrior::Kind::uniform};
  if (s == "multiplicity") return {ModelPrior::Kind::multiplicity_adjusted};
  throw config_error("model_prior must be 'uniform' or 'multiplicity', got '" + s + "'");
}

GPolicy parse_g_policy(const std::string& s) {
  if (s == "eb") return GPolicy::empirical_bayes();
  if (s.rfind("fixed:", 0) == 0) {
    try {
      return GPolicy::fixed(std::stod(s.substr(6)));
    } catch (const std::exception&) {
      throw config_error("bad fixed g value in '" + s + "'");
    }
  }
  throw config_error("g_policy must be 'eb' or 'fixed:<value>', got '" + s + "'");
}

DPolicy parse_d_policy(const std::string& s) {
  if (s == "residual") return DPolicy::residual_precision();
  if (s == "identity") return DPolicy::identity();
  if (s.rfind("fixed:", 0) == 0) {
    std::vector<double> vals;
    std::stringstream ss(s.substr(6));
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw config_error("bad fixed D entry '" + cell + "'");
      }
    }
    Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(vals.data(),
                                                    static_cast<Eigen::Index>(vals.size()));
    return DPolicy::fixed(std::move(d));
  }
  throw config_error("d_policy must be 'residual', 'identity' or 'fixed:v1,v2,...', got '" +
                     s + "'");
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw config_error("missing required path for " + what);
  if (!fs::exists(path)) throw config_error(what + " file not found: " + path);
}

ChainConfig chain_config(const RunConfig& cfg) {
  ChainConfig c;
  c.n_sweeps = cfg.sweeps;
  c.n_burn = cfg.burn;
  c.thin = cfg.thin;
  c.seed = cfg.seed;
  c.prior = parse_prior(cfg.model_prior);
  c.g_policy = parse_g_policy(cfg.g_policy);
  c.shuffle_coords = cfg.shuffle_coords;
  return c;
}

FactorConfig factor_config(const RunConfig& cfg) {
  FactorConfig f;
  f.k = cfg.factor_k;
  f.n_sweeps = cfg.factor_sweeps < 0 ? cfg.sweeps : cfg.factor_sweeps;
  f.n_burn = cfg.factor_burn < 0 ? cfg.burn : cfg.factor_burn;
  f.thin = cfg.factor_thin < 0 ? cfg.thin : cfg.factor_thin;
  f.seed = cfg.seed ^ kFactorSeedSalt;
  return f;
}

int retained_count(int sweeps, int burn, int thin) {
  return (sweeps - burn + thin - 1) / thin;
}

AlignedData load_aligned(const RunConfig& cfg) {
  require_file(cfg.targets_path, "targets");
  require_file(cfg.candidates_path, "candidates");
  ReturnsPanel targets = load_returns_csv(cfg.targets_path, cfg.date_col);
  ReturnsPanel candidates = load_returns_csv(cfg.candidates_path, cfg.date_col);
  if (!cfg.start.empty() || !cfg.end.empty()) {
    targets = slice_window(targets, cfg.start, cfg.end);
    candidates = slice_window(candidates, cfg.start, cfg.end);
  }
  AlignedData data = align_panels(targets, candidates);
  if (!cfg.risk_free_col.empty()) {
    apply_risk_free(data.targets, data.candidates, cfg.risk_free_col);
    data = align_panels(data.targets, data.candidates);  // revalidate sizes
  }
  return data;
}

void write_resolved(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  cfg.write_resolved((fs::path(cfg.out_dir) / "config.resolved").string());
}

// --- fit ---------------------------------------------------------------------

void cmd_fit(const RunConfig& cfg) {
  const AlignedData data = load_aligned(cfg);
  const ChainConfig ccfg = chain_config(cfg);
  const FactorConfig fcfg = factor_config(cfg);
  if (retained_count(ccfg.n_sweeps, ccfg.n_burn, ccfg.thin) !=
      retained_count(fcfg.n_sweeps, fcfg.n_burn, fcfg.thin))
    throw config_error(
        "fit: conditional and factor samplers must retain the same draw count "
        "(adjust factor_sweeps/factor_burn/factor_thin)");

  const ChainResult chain = run_chain(data, ccfg);
  const std::vector<FactorDraw> factor = fit_factor_model(data.candidates, fcfg);

  write_resolved(cfg);
  const fs::path out(cfg.out_dir);
  save_conditional_draws(chain.draws, chain.candidate_labels, chain.target_labels,
                         (out / "conditional_draws.txt").string());
  save_factor_draws(factor, chain.candidate_labels, (out / "factor_draws.txt").string());
  save_inclusion_csv(chain.inclusion, chain.candidate_labels,
                     (out / "inclusion.csv").string());
  std::printf("fit: %zu retained draws, %d candidates, %d targets, T=%d\n",
              chain.draws.size(), static_cast<int>(data.p()), static_cast<int>(data.q()),
              static_cast<int>(data.T()));
}

// --- select ------------------------------------------------------------------

struct LoadedDraws {
  ConditionalDrawFile cond;
  FactorDrawFile fact;
};

LoadedDraws load_draws(const RunConfig& cfg) {
  const std::string dir = cfg.draws_dir.empty() ? cfg.out_dir : cfg.draws_dir;
  const fs::path base(dir);
  require_file((base / "conditional_draws.txt").string(), "conditional draws");
  require_file((base / "factor_draws.txt").string(), "factor draws");
  LoadedDraws d;
  d.cond = load_conditional_draws((base / "conditional_draws.txt").string());
  d.fact = load_factor_draws((base / "factor_draws.txt").string());
  if (d.cond.draws.size() != d.fact.draws.size())
    throw validation_error("draw files hold different draw counts; refit with paired settings");
  if (d.cond.candidate_labels != d.fact.candidate_labels)
    throw validation_error("draw files disagree on candidate labels");
  return d;
}

Eigen::MatrixXd penalty_weights_from(const std::string& unpenalize,
                                     const std::vector<std::string>& candidates,
                                     const std::vector<std::string>& targets) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(targets.size()),
                                            static_cast<Eigen::Index>(candidates.size()));
  if (unpenalize.empty()) return w;
  std::stringstream ss(unpenalize);
  std::string pair;
  while (std::getline(ss, pair, ',')) {
    const auto colon = pair.find(':');
    if (colon == std::string::npos)
      throw config_error("unpenalize entries must look like CANDIDATE:TARGET, got '" + pair +
                         "'");
    const std::string cand = pair.substr(0, colon), targ = pair.substr(colon + 1);
    Eigen::Index ci = -1, ti = -1;
    for (std::size_t j = 0; j < candidates.size(); ++j)
      if (candidates[j] == cand) ci = static_cast<Eigen::Index>(j);
    for (std::size_t i = 0; i < targets.size(); ++i)
      if (targets[i] == targ) ti = static_cast<Eigen::Index>(i);
    if (ci < 0) throw lookup_error("unpenalize: unknown candidate '" + cand + "'");
    if (ti < 0) throw lookup_error("unpenalize: unknown target '" + targ + "'");
    w(ti, ci) = 0.0;
  }
  return w;
}

void cmd_select(const RunConfig& cfg) {
  const LoadedDraws d = load_draws(cfg);
  const PosteriorMoments moments =
      accumulate_moments(d.cond.draws, d.fact.draws, parse_d_policy(cfg.d_policy));
  const Eigen::MatrixXd weights =
      penalty_weights_from(cfg.unpenalize, d.cond.candidate_labels, d.cond.target_labels);

  PathConfig pcfg;
  pcfg.grid_size = cfg.lambda_grid;
  pcfg.lambda_min_ratio = cfg.lambda_min_ratio;
  const LossPath path = solution_path(moments, d.cond.draws, d.fact.draws, weights, pcfg);
  const SelectionGraph graph = select_model(path, {cfg.band_low, cfg.band_high},
                                            d.cond.candidate_labels, d.cond.target_labels);

  write_resolved(cfg);
  const fs::path out(cfg.out_dir);
  save_path_csv(path, (out / "loss_path.csv").string());
  save_edge_list(graph, (out / "selected_graph.tsv").string());
  std::printf("select: chose path point %zu of %zu (lambda=%s), %zu candidates, %zu edges\n",
              graph.path_index + 1, path.actions.size(),
              fmt(path.lambdas[static_cast<Eigen::Index>(graph.path_index)]).c_str(),
              graph.selected_candidates.size(), graph.edges.size());
}

// --- portfolio ---------------------------------------------------------------

void cmd_portfolio(const RunConfig& cfg) {
  const LoadedDraws d = load_draws(cfg);
  const std::string draws_dir = cfg.draws_dir.empty() ? cfg.out_dir : cfg.draws_dir;
  const std::string graph_path = cfg.graph_path.empty()
                                     ? (fs::path(draws_dir) / "selected_graph.tsv").string()
                                     : cfg.graph_path;
  require_file(graph_path, "selection graph");
  const auto edges = load_edge_list(graph_path);

  std::vector<std::string> selected;
  for (const auto& label : d.cond.candidate_labels) {
    for (const auto& [cand, target] : edges) {
      if (cand == label) {
        selected.push_back(label);
        break;
      }
    }
  }
  if (selected.empty()) throw validation_error("selection graph has no edges");

  DEConfig de;
  de.weight_f = cfg.de_f;
  de.crossover = cfg.de_cr;
  de.pop_mult = cfg.de_pop_mult;
  de.max_generations = cfg.de_max_gens;
  de.stall_generations = cfg.de_stall_gens;

  const DrawMoments candidates = candidate_universe(d.fact.draws, d.fact.candidate_labels);
  const DrawMoments targets =
      target_universe(d.cond.draws, d.fact.draws, d.cond.target_labels);

  const PortfolioWeights w_sel =
      maximize_posterior_mean_sharpe(candidates, selected, de, cfg.seed ^ kSelectedDESalt);
  const PortfolioWeights w_dense = maximize_posterior_mean_sharpe(
      candidates, d.cond.candidate_labels, de, cfg.seed ^ kDenseDESalt);

  std::vector<SharpeSamples> samples;
  samples.push_back(sharpe_distribution_for_weights(w_sel, candidates, "selected"));
  samples.push_back(sharpe_distribution_for_weights(w_dense, candidates, "dense"));
  samples.push_back(tangency_sharpe_distribution(targets, "tangency_targets"));
  if (!cfg.fixed_weights_path.empty()) {
    require_file(cfg.fixed_weights_path, "fixed weights");
    const PortfolioWeights bench = load_weights_csv(cfg.fixed_weights_path);
    samples.push_back(sharpe_distribution_for_weights(
        bench, candidates, fs::path(cfg.fixed_weights_path).stem().string()));
  }

  write_resolved(cfg);
  const fs::path out(cfg.out_dir);
  save_weights_csv(w_sel, (out / "weights_selected.csv").string());
  save_weights_csv(w_dense, (out / "weights_dense.csv").string());
  save_sharpe_samples_csv(samples, (out / "sharpe_samples.csv").string());

  const double unit = cfg.annualize ? std::sqrt(12.0) : 1.0;
  for (const auto& s : samples)
    std::printf("portfolio: mean %s Sharpe%s = %s\n", s.label.c_str(),
                cfg.annualize ? " (annualized)" : "", fmt(unit * s.values.mean()).c_str());
}

// --- rolling -----------------------------------------------------------------

void cmd_rolling(const RunConfig& cfg) {
  require_file(cfg.targets_path, "targets");
  require_file(cfg.candidates_path, "candidates");
  if (cfg.window_months <= 0 || cfg.step_months <= 0)
    throw config_error("rolling: window and step must be positive");
  const ReturnsPanel targets = load_returns_csv(cfg.targets_path, cfg.date_col);
  const ReturnsPanel candidates = load_returns_csv(cfg.candidates_path, cfg.date_col);

  std::set<std::string> tset(targets.dates.begin(), targets.dates.end());
  std::vector<std::string> common;
  for (const auto& dt : candidates.dates)
    if (tset.count(dt)) common.push_back(dt);
  if (static_cast<int>(common.size()) < cfg.window_months)
    throw config_error("rolling: window of " + std::to_string(cfg.window_months) +
                       " months exceeds the " + std::to_string(common.size()) +
                       "-month common span");

  int n_windows = 0;
  for (std::size_t start = 0; start + cfg.window_months <= common.size();
       start += static_cast<std::size_t>(cfg.step_months)) {
    const std::string w_start = common[start];
    const std::string w_end = common[start + cfg.window_months - 1];
    RunConfig wcfg = cfg;
    wcfg.start = w_start;
    wcfg.end = w_end;
    wcfg.seed = cfg.seed + static_cast<std::uint64_t>(n_windows);
    wcfg.out_dir =
        (fs::path(cfg.out_dir) / ("window_" + w_start + "_" + w_end)).string();
    wcfg.draws_dir.clear();
    wcfg.graph_path.clear();
    std::printf("rolling: window %s .. %s (seed %llu)\n", w_start.c_str(), w_end.c_str(),
                static_cast<unsigned long long>(wcfg.seed));
    cmd_fit(wcfg);
    cmd_select(wcfg);
    cmd_portfolio(wcfg);
    ++n_windows;
  }
  if (n_windows == 0) throw config_error("rolling: no complete windows in the data range");
  std::printf("rolling: completed %d windows\n", n_windows);
}

// --- simulate ----------------------------------------------------------------

void cmd_simulate(const RunConfig& cfg) {
  if (cfg.sim_seeds < 1) throw config_error("simulate: need at least one seed");
  const GeneratingMoments gm = default_generating_moments();
  PipelineConfig pcfg;
  pcfg.chain = chain_config(cfg);
  pcfg.factor = factor_config(cfg);
  pcfg.factor.k = cfg.factor_k < 0 ? 2 : cfg.factor_k;  // bundle is a 2-factor model
  if (pcfg.retained_chain() != pcfg.retained_factor())
    throw config_error("simulate: samplers must retain equal draw counts");

  write_resolved(cfg);
  const fs::path out(cfg.out_dir);
  std::ofstream summary((out / "summary.txt").string());
  if (!summary) throw config_error("cannot write simulate summary");

  int covered = 0;
  for (int s = 0; s < cfg.sim_seeds; ++s) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(s);
    const RecoveryReport rep = run_simulation_study(gm, cfg.sim_T, seed, pcfg);

    std::ofstream rc((out / ("recovery_seed" + std::to_string(seed) + ".csv")).string());
    rc << "true_beta,posterior_mean_beta\n";
    for (Eigen::Index j = 0; j < rep.beta_true.rows(); ++j)
      for (Eigen::Index i = 0; i < rep.beta_true.cols(); ++i)
        rc << fmt(rep.beta_true(j, i)) << ',' << fmt(rep.beta_post_mean(j, i)) << '\n';

    const bool inside = rep.truth_quantile >= 0.05 && rep.truth_quantile <= 0.95;
    covered += inside ? 1 : 0;
    summary << "seed " << seed << ": beta_rmse=" << fmt(rep.beta_rmse)
            << " true_sharpe=" << fmt(rep.true_tangency_sharpe)
            << " truth_quantile=" << fmt(rep.truth_quantile)
            << " in_central_90=" << (inside ? 1 : 0) << '\n';
    std::printf("simulate: seed %llu rmse=%s quantile=%s\n",
                static_cast<unsigned long long>(seed), fmt(rep.beta_rmse).c_str(),
                fmt(rep.truth_quantile).c_str());
  }
  summary << "coverage_90: " << covered << "/" << cfg.sim_seeds << '\n';
  std::printf("simulate: coverage_90 %d/%d\n", covered, cfg.sim_seeds);
}

// --- bench-glasso ------------------------------------------------------------

void cmd_bench_glasso(const RunConfig& cfg) {
  write_resolved(cfg);
  const fs::path out(cfg.out_dir);
  auto emit = [&](double a) {
    const BivariateParams params{a, cfg.bench_b, cfg.bench_c};
    const auto rows = path_comparison_table(params, cfg.bench_grid);
    char name[64];
    std::snprintf(name, sizeof name, "bench_glasso_a%g.csv", a);
    std::ofstream csv((out / name).string());
    if (!csv) throw config_error("cannot write bench output");
    csv << "t,gamma_conditional,gamma_glasso\n";
    for (const auto& r : rows)
      csv << fmt(r.t) << ',' << fmt(r.gamma_conditional) << ',' << fmt(r.gamma_glasso) << '\n';
    std::printf("bench-glasso: wrote %s\n", name);
  };
  emit(cfg.bench_a);
  if (cfg.bench_a != 200.0) emit(200.0);  // the wide-separation comparison case
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse tradable-basket selection and Sharpe-optimal allocation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::vector<std::string> unpenalize_edges;
  bool shuffle_flag = false, annualize_flag = false;

  app.add_option("--config", config_path, "flat key=value config file");
  auto opt = [&](CLI::App* cmd, const std::string& flag, const std::string& key,
                 const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [&overrides, key](const std::string& v) { overrides[key] = v; }, help);
  };

  opt(&app, "--out-dir", "out_dir", "output directory");
  opt(&app, "--seed", "seed", "base random seed");

  CLI::App* fit = app.add_subcommand("fit", "run both samplers and persist paired draws");
  opt(fit, "--targets", "targets", "target returns CSV");
  opt(fit, "--candidates", "candidates", "candidate returns CSV");
  opt(fit, "--date-col", "date_col", "date column name");
  opt(fit, "--start", "start", "window start YYYY-MM");
  opt(fit, "--end", "end", "window end YYYY-MM");
  opt(fit, "--risk-free-col", "risk_free_col", "column to subtract as the risk-free rate");
  opt(fit, "--sweeps", "sweeps", "Gibbs sweeps");
  opt(fit, "--burn", "burn", "burn-in sweeps");
  opt(fit, "--thin", "thin", "thinning interval");
  opt(fit, "--prior", "model_prior", "model prior: uniform|multiplicity");
  opt(fit, "--g", "g_policy", "g policy: eb|fixed:<value>");
  fit->add_flag("--shuffle-coords", shuffle_flag, "random coordinate scan order");
  opt(fit, "--factor-k", "factor_k", "latent factor count (-1 = heuristic)");
  opt(fit, "--factor-sweeps", "factor_sweeps", "factor sampler sweeps");
  opt(fit, "--factor-burn", "factor_burn", "factor sampler burn-in");
  opt(fit, "--factor-thin", "factor_thin", "factor sampler thinning");

  CLI::App* select = app.add_subcommand("select", "trace the loss path and pick a graph");
  opt(select, "--draws-dir", "draws_dir", "directory with fit outputs");
  select->add_option("--band", [&overrides](const std::vector<std::string>& v) {
    overrides["band_low"] = v.at(0);
    overrides["band_high"] = v.at(1);
    return true;
  }, "dense-fit quantile band (two values)")->expected(2);
  opt(select, "--lambda-grid", "lambda_grid", "path grid size");
  opt(select, "--lambda-min-ratio", "lambda_min_ratio", "smallest lambda as fraction of max");
  opt(select, "--d-policy", "d_policy", "D policy: residual|identity|fixed:v1,v2,...");
  select->add_option("--unpenalize", unpenalize_edges,
                     "CANDIDATE:TARGET edge left unpenalized (repeatable)");

  CLI::App* portfolio = app.add_subcommand("portfolio", "allocate over the selected graph");
  opt(portfolio, "--draws-dir", "draws_dir", "directory with fit outputs");
  opt(portfolio, "--graph", "graph", "edge-list file (default <draws-dir>/selected_graph.tsv)");
  opt(portfolio, "--fixed-weights", "fixed_weights", "benchmark weights CSV");
  opt(portfolio, "--de-f", "de_f", "differential weight");
  opt(portfolio, "--de-cr", "de_cr", "crossover probability");
  opt(portfolio, "--de-pop-mult", "de_pop_mult", "population = mult * dimension");
  opt(portfolio, "--de-max-gens", "de_max_gens", "maximum generations");
  opt(portfolio, "--de-stall-gens", "de_stall_gens", "stall generations before stopping");
  portfolio->add_flag("--annualize", annualize_flag,
                      "display Sharpe summaries scaled by sqrt(12)");

  CLI::App* rolling = app.add_subcommand("rolling", "fit+select+portfolio per window");
  opt(rolling, "--targets", "targets", "target returns CSV");
  opt(rolling, "--candidates", "candidates", "candidate returns CSV");
  opt(rolling, "--date-col", "date_col", "date column name");
  opt(rolling, "--window", "window_months", "window length in months");
  opt(rolling, "--step", "step_months", "window step in months");
  opt(rolling, "--sweeps", "sweeps", "Gibbs sweeps");
  opt(rolling, "--burn", "burn", "burn-in sweeps");
  opt(rolling, "--thin", "thin", "thinning interval");
  opt(rolling, "--factor-k", "factor_k", "latent factor count (-1 = heuristic)");

  CLI::App* simulate = app.add_subcommand("simulate", "recovery study on bundled moments");
  opt(simulate, "--sim-T", "sim_T", "simulated sample size");
  opt(simulate, "--seeds", "sim_seeds", "number of seeds");
  opt(simulate, "--sweeps", "sweeps", "Gibbs sweeps");
  opt(simulate, "--burn", "burn", "burn-in sweeps");
  opt(simulate, "--thin", "thin", "thinning interval");

  CLI::App* bench = app.add_subcommand("bench-glasso", "closed-form path comparison tables");
  opt(bench, "--a", "bench_a", "posterior-mean variance of the candidate");
  opt(bench, "--b", "bench_b", "posterior-mean variance of the target");
  opt(bench, "--c", "bench_c", "posterior-mean covariance");
  opt(bench, "--grid", "bench_grid", "grid points on the shared penalty axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::from_file(config_path);
    for (const auto& [key, value] : overrides) cfg.set(key, value);
    if (shuffle_flag) cfg.shuffle_coords = true;
    if (annualize_flag) cfg.annualize = true;
    if (!unpenalize_edges.empty()) {
      std::string joined;
      for (const auto& e : unpenalize_edges) {
        if (!joined.empty()) joined += ',';
        joined += e;
      }
      cfg.unpenalize = joined;
    }

    if (fit->parsed()) cmd_fit(cfg);
    if (select->parsed()) cmd_select(cfg);
    if (portfolio->parsed()) cmd_portfolio(cfg);
    if (rolling->parsed()) cmd_rolling(cfg);
    if (simulate->parsed()) cmd_simulate(cfg);
    if (bench->parsed()) cmd_bench_glasso(cfg);
    return 0;
  } catch (const parse_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const validation_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const config_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const lookup_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const pairing_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const singularity_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const numerical_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
}
