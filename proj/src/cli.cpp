#include "covdecomp/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "covdecomp/assumptions.hpp"
#include "covdecomp/error.hpp"
#include "covdecomp/inference.hpp"
#include "covdecomp/sampling.hpp"
#include "covdecomp/solver.hpp"
#include "covdecomp/sweep.hpp"
#include "covdecomp/synth.hpp"

namespace fs = std::filesystem;

namespace covdecomp {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

double parse_real_or_inf(const std::string& s, const std::string& flag) {
  if (s == "inf" || s == "infinity") return kInfinity;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidInput, flag + ": expected a number, 'inf' or 'schedule', got '" + s + "'");
}

/// Options given in a key=value config file apply unless the flag was set
/// on the command line (or through its environment variable).
void apply_config(CLI::App& sub, const std::string& path) {
  if (path.empty()) return;
  for (const auto& [key, value] : read_key_values(path)) {
    std::string name = key;
    std::replace(name.begin(), name.end(), '_', '-');
    CLI::Option* opt = sub.get_option_no_throw("--" + name);
    if (opt == nullptr || name == "config") throw Error(ErrorCode::InvalidInput, path + ": unknown key '" + key + "'");
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

struct SynthArgs {
  SynthConfig config;
  std::string out;
};

struct SampleArgs {
  std::string model;
  std::string cov;
  int n = 1000;
  std::uint64_t seed = 0;
  bool centered = false;
  std::string out;
};

struct DecomposeArgs {
  std::string cov;
  std::string gamma = "0";
  std::string lambda = "inf";
  double lambda_star = std::numeric_limits<double>::quiet_NaN();
  ScheduleConfig schedule;
  int n = 0;
  double tol = 1e-8;
  int max_iters = 50000;
  double active_tol = 1e-7;
  std::string out;
};

struct CheckArgs {
  std::string model;
  double tol = 1e-9;
  bool strict = false;
  std::string out;
};

struct LbpArgs {
  std::string model;
  int iters = 100;
  double tol = 1e-10;
  double damping = 0.0;
  std::string out;
};

struct SweepArgs {
  std::string config_file;
  std::string model;
  std::vector<int> sizes{1000, 2000, 4000, 8000};
  std::vector<std::string> methods{"l1_linf", "l1_only"};
  SweepConfig config;
  std::string out;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const GroundTruthModel model = gen_model(a.config);
  save_model(a.out, model, a.config.to_metadata());
  out << "wrote model p=" << model.j_m.dim() << " lambda_star=" << model.lambda_star
      << " residual_edges=" << support_off(model.sigma_r, 0.0).size() << " to " << a.out << '\n';
  return kExitOk;
}

int cmd_sample(const SampleArgs& a, std::ostream& out) {
  if (a.model.empty() == a.cov.empty()) throw Error(ErrorCode::InvalidInput, "give exactly one of --model or --cov");
  const SymmetricMatrix sigma = a.model.empty() ? read_matrix_csv(a.cov) : load_model(a.model).sigma;
  Rng rng(a.seed);
  const SampleSet samples = sample_gaussian(sigma, a.n, rng);
  fs::create_directories(a.out);
  write_samples_csv(fs::path(a.out) / "samples.csv", samples);
  write_matrix_csv(fs::path(a.out) / "sigma-hat.csv", sample_covariance(samples, a.centered));
  out << "wrote " << a.n << " samples and sigma-hat.csv to " << a.out << '\n';
  return kExitOk;
}

int cmd_decompose(const DecomposeArgs& a, std::ostream& out) {
  const SymmetricMatrix sigma_hat = read_matrix_csv(a.cov);
  const bool schedule_gamma = a.gamma == "schedule";
  const bool schedule_lambda = a.lambda == "schedule";
  SolverOptions options;
  options.tol = a.tol;
  options.max_iterations = a.max_iters;
  options.active_tol = a.active_tol;
  if (schedule_gamma || schedule_lambda) {
    if (a.n < 1) throw Error(ErrorCode::InvalidInput, "schedule mode needs --n");
    ScheduleConfig sc = a.schedule;
    if (schedule_lambda) {
      if (std::isnan(a.lambda_star)) throw Error(ErrorCode::InvalidInput, "--lambda schedule needs --lambda-star");
      sc.lambda_star = a.lambda_star;
    }
    const Regularization reg = regularization_schedule(sigma_hat.dim(), a.n, sc);
    if (schedule_gamma) options.gamma = reg.gamma;
    if (schedule_lambda) options.lambda = reg.lambda;
  }
  if (!schedule_gamma) options.gamma = parse_real_or_inf(a.gamma, "--gamma");
  if (!schedule_lambda) options.lambda = parse_real_or_inf(a.lambda, "--lambda");

  const PrimalSolution primal = solve_primal(sigma_hat, options);
  const SymmetricMatrix sigma_r = recover_dual(sigma_hat, primal.j_m_hat, options);
  const KktReport kkt = kkt_residual(sigma_hat, primal.j_m_hat, sigma_r, options);

  fs::create_directories(a.out);
  write_matrix_csv(fs::path(a.out) / "j_m_hat.csv", primal.j_m_hat);
  write_matrix_csv(fs::path(a.out) / "sigma_r_hat.csv", sigma_r);
  write_key_values(fs::path(a.out) / "diagnostics.txt",
                   {{"gamma", fmt(options.gamma)},
                    {"lambda", std::isfinite(options.lambda) ? fmt(options.lambda) : "inf"},
                    {"iterations", std::to_string(primal.iterations)},
                    {"objective", fmt(primal.objective)},
                    {"converged", primal.kkt.converged ? "true" : "false"},
                    {"stationarity_residual", fmt(kkt.stationarity_residual)},
                    {"dual_feasibility_residual", fmt(kkt.dual_feasibility_residual)},
                    {"box_violation", fmt(kkt.box_violation)}});
  out << "iterations=" << primal.iterations << " objective=" << primal.objective
      << " stationarity=" << kkt.stationarity_residual << (primal.kkt.converged ? "" : " (not converged)") << '\n';
  return primal.kkt.converged ? kExitOk : kExitNumerical;
}

int cmd_check(const CheckArgs& a, std::ostream& out) {
  const GroundTruthModel model = load_model(a.model);
  CheckOptions opts;
  opts.tol = a.tol;
  opts.strict_support = a.strict;
  const std::string text = check_all(model, opts).to_text();
  if (!a.out.empty()) {
    std::ofstream f(a.out);
    if (!f) throw Error(ErrorCode::Io, "cannot write " + a.out);
    f << text;
  }
  out << text;
  return kExitOk;
}

int cmd_lbp(const LbpArgs& a, std::ostream& out) {
  const GroundTruthModel model = load_model(a.model);
  const Eigen::VectorXd mean = model.mean.value_or(Eigen::VectorXd::Zero(model.j_m.dim()));
  const InfoModel markov = InfoModel::from_mean(model.j_m, mean);
  const InfoModel composite = InfoModel::from_mean(inverse_spd(model.sigma), mean);
  const auto [tm, tc] = lbp_compare(markov, composite, GabpOptions{a.iters, a.tol, a.damping});

  std::ofstream f(a.out);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + a.out);
  f << "iteration,mean_error_markov,var_error_markov,mean_error_composite,var_error_composite\n";
  f << std::setprecision(std::numeric_limits<double>::max_digits10);
  const auto rows = static_cast<std::size_t>(std::max(tm.iterations, tc.iterations));
  auto cell = [&f](const std::vector<double>& v, std::size_t k) {
    if (k < v.size())
      f << v[k];
    else
      f << "nan";
  };
  for (std::size_t k = 0; k < rows; ++k) {
    f << k + 1 << ',';
    cell(tm.mean_error, k);
    f << ',';
    cell(tm.variance_error, k);
    f << ',';
    cell(tc.mean_error, k);
    f << ',';
    cell(tc.variance_error, k);
    f << '\n';
  }
  out << "markov: rho_bar=" << tm.rho_bar << " iterations=" << tm.iterations
      << " converged=" << (tm.converged ? "true" : "false") << '\n'
      << "composite: rho_bar=" << tc.rho_bar << " iterations=" << tc.iterations
      << " converged=" << (tc.converged ? "true" : "false") << '\n';
  return kExitOk;
}

int cmd_sweep(SweepArgs& a, std::ostream& out) {
  a.config.sample_sizes = a.sizes;
  a.config.methods.clear();
  for (const auto& m : a.methods) a.config.methods.push_back(parse_method(m));
  const GroundTruthModel model = load_model(a.model);
  const std::vector<SweepRow> rows = run_sweep(model, a.config);
  write_sweep_csv(a.out, rows);
  int failed = 0;
  for (const auto& r : rows) failed += r.status != "ok";
  out << "wrote " << rows.size() << " rows to " << a.out << " (" << failed << " with non-ok status)\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decompose a covariance into a sparse Markov precision and a sparse residual covariance"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a grid ground-truth model");
  s->add_option("--rows", synth.config.rows, "Grid rows")->capture_default_str();
  s->add_option("--cols", synth.config.cols, "Grid columns")->capture_default_str();
  s->add_option("--edge-weight", synth.config.edge_weight_magnitude, "Markov edge magnitude")->capture_default_str();
  s->add_option("--residual-fraction", synth.config.residual_fraction, "Fraction of edges with residuals")
      ->capture_default_str();
  s->add_option("--residual-magnitude", synth.config.residual_magnitude, "Residual magnitude")->capture_default_str();
  s->add_option("--pd-margin", synth.config.pd_margin, "Minimum eigenvalue of J_M")->capture_default_str();
  s->add_option("--seed", synth.config.seed, "Random seed")->capture_default_str();
  s->add_option("--out", synth.out, "Model directory")->required();

  SampleArgs sample;
  auto* sm = app.add_subcommand("sample", "Draw Gaussian samples and write sigma-hat.csv");
  sm->add_option("--model", sample.model, "Model directory (uses sigma.csv)");
  sm->add_option("--cov", sample.cov, "Covariance CSV");
  sm->add_option("--n", sample.n, "Sample count")->capture_default_str();
  sm->add_option("--seed", sample.seed, "Random seed")->capture_default_str();
  sm->add_flag("--centered", sample.centered, "Subtract the sample mean");
  sm->add_option("--out", sample.out, "Output directory")->required();

  DecomposeArgs dec;
  auto* d = app.add_subcommand("decompose", "Solve the penalized log-det program and recover the residual");
  d->add_option("--cov", dec.cov, "Sample or exact covariance CSV")->required();
  d->add_option("--gamma", dec.gamma, "l1 penalty: real or 'schedule'")->capture_default_str();
  d->add_option("--lambda", dec.lambda, "Box bound: real, 'inf' or 'schedule'")->capture_default_str();
  d->add_option("--lambda-star", dec.lambda_star, "lambda* for the schedule");
  d->add_option("--c1", dec.schedule.c1, "Schedule constant for gamma")->capture_default_str();
  d->add_option("--c2", dec.schedule.c2, "Schedule constant for lambda")->capture_default_str();
  d->add_option("--n", dec.n, "Sample count for the schedule");
  d->add_option("--tol", dec.tol, "KKT stationarity tolerance")->capture_default_str();
  d->add_option("--max-iters", dec.max_iters, "Iteration cap")->capture_default_str();
  d->add_option("--active-tol", dec.active_tol, "Box activity tolerance")->capture_default_str();
  d->add_option("--out", dec.out, "Output directory")->required();

  CheckArgs chk;
  auto* c = app.add_subcommand("check", "Check identifiability and incoherence conditions of a model");
  c->add_option("--model", chk.model, "Model directory")->required();
  c->add_option("--tol", chk.tol, "Tolerance for |J_ij| == lambda*")->capture_default_str();
  c->add_flag("--strict", chk.strict, "Require both directions of the residual/box support relation");
  c->add_option("--out", chk.out, "Report file");

  LbpArgs lbp;
  auto* l = app.add_subcommand("lbp", "Run Gaussian BP on the Markov and composite precisions");
  l->add_option("--model", lbp.model, "Model directory")->required();
  l->add_option("--iters", lbp.iters, "Iteration cap")->capture_default_str();
  l->add_option("--tol", lbp.tol, "Message convergence tolerance")->capture_default_str();
  l->add_option("--damping", lbp.damping, "Message damping in [0, 1)")->capture_default_str();
  l->add_option("--out", lbp.out, "Trace CSV")->required();

  SweepArgs sw;
  auto* w = app.add_subcommand("sweep", "Sample-size sweep comparing l1+linf against l1 only");
  w->add_option("--config", sw.config_file, "key=value file; flags override it");
  w->add_option("--model", sw.model, "Model directory");
  w->add_option("--sizes", sw.sizes, "Comma-separated sample sizes")->delimiter(',')->capture_default_str();
  w->add_option("--replicates", sw.config.replicates, "Replicates per size")->capture_default_str();
  w->add_option("--methods", sw.methods, "l1_linf and/or l1_only")->delimiter(',')->capture_default_str();
  w->add_option("--c1", sw.config.schedule.c1, "Schedule constant for gamma")->capture_default_str();
  w->add_option("--c2", sw.config.schedule.c2, "Schedule constant for lambda")->capture_default_str();
  w->add_option("--seed", sw.config.seed, "Random seed")->capture_default_str();
  w->add_option("--jobs", sw.config.jobs, "Parallel cells")->envname("COVDECOMP_JOBS")->capture_default_str();
  w->add_option("--tol", sw.config.tol, "KKT stationarity tolerance")->capture_default_str();
  w->add_option("--max-iters", sw.config.max_iterations, "Iteration cap")->capture_default_str();
  w->add_option("--out", sw.out, "Results CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand(s)) return cmd_synth(synth, out);
    if (app.got_subcommand(sm)) return cmd_sample(sample, out);
    if (app.got_subcommand(d)) return cmd_decompose(dec, out);
    if (app.got_subcommand(c)) return cmd_check(chk, out);
    if (app.got_subcommand(l)) return cmd_lbp(lbp, out);
    if (app.got_subcommand(w)) {
      apply_config(*w, sw.config_file);
      if (sw.model.empty() || sw.out.empty()) throw Error(ErrorCode::InvalidInput, "sweep needs --model and --out");
      return cmd_sweep(sw, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.is_numerical() ? kExitNumerical : kExitUsage;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace covdecomp
