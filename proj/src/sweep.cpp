#include "covdecomp/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include "covdecomp/error.hpp"
#include "covdecomp/metrics.hpp"
#include "covdecomp/rng.hpp"
#include "covdecomp/sampling.hpp"

namespace covdecomp {

namespace {

constexpr const char* kHeader =
    "method,n,replicate,edit_markov,edit_residual,linf_jm,linf_sigma_r,linf_composite_precision,iterations,"
    "kkt_residual,seed,status";

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SweepRow run_cell(const GroundTruthModel& model, const SweepConfig& config, Method method, int n, int replicate,
                  const SymmetricMatrix& true_precision) {
  SweepRow row;
  row.method = method;
  row.n = n;
  row.replicate = replicate;
  row.seed = cell_seed(config.seed, n, replicate);
  row.linf_jm = row.linf_sigma_r = row.linf_composite_precision = row.kkt_residual = kNaN;
  try {
    Rng rng(row.seed);
    const SymmetricMatrix sigma_hat = sample_covariance(sample_gaussian(model.sigma, n, rng));
    ScheduleConfig schedule = config.schedule;
    schedule.lambda_star = model.lambda_star;
    const Regularization reg = regularization_schedule(model.j_m.dim(), n, schedule);

    SolverOptions options;
    options.gamma = reg.gamma;
    options.lambda = method == Method::L1Only ? kInfinity : reg.lambda;
    options.tol = config.tol;
    options.max_iterations = config.max_iterations;

    const PrimalSolution primal = solve_primal(sigma_hat, options);
    row.iterations = primal.iterations;
    row.kkt_residual = primal.kkt.stationarity_residual;
    const SymmetricMatrix& j_hat = primal.j_m_hat;
    row.edit_markov = edit_distance(support_off(j_hat, default_support_threshold(j_hat)), support_off(model.j_m, 0.0));
    row.linf_jm = linf_error(j_hat, model.j_m);
    if (!primal.kkt.converged) row.status = "not_converged";

    const SymmetricMatrix sigma_r_hat = recover_dual(sigma_hat, j_hat, options);
    row.edit_residual = edit_distance(support_off(sigma_r_hat, default_support_threshold(sigma_r_hat)),
                                      support_off(model.sigma_r, 0.0));
    row.linf_sigma_r = linf_error(sigma_r_hat, model.sigma_r);

    const SymmetricMatrix j_composite = method == Method::L1Only ? j_hat : composite_precision(j_hat, sigma_r_hat);
    row.linf_composite_precision = linf_error(true_precision, j_composite);
  } catch (const Error& e) {
    row.status = std::string(to_string(e.code()));
  }
  return row;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

}  // namespace

std::string to_string(Method m) { return m == Method::L1Linf ? "l1_linf" : "l1_only"; }

Method parse_method(const std::string& name) {
  if (name == "l1_linf") return Method::L1Linf;
  if (name == "l1_only") return Method::L1Only;
  throw Error(ErrorCode::InvalidInput, "unknown method '" + name + "' (expected l1_linf or l1_only)");
}

void SweepConfig::validate() const {
  if (sample_sizes.empty()) throw Error(ErrorCode::InvalidInput, "sample_sizes must be non-empty");
  for (std::size_t k = 0; k < sample_sizes.size(); ++k) {
    if (sample_sizes[k] < 1) throw Error(ErrorCode::InvalidInput, "sample sizes must be positive");
    if (k > 0 && sample_sizes[k] <= sample_sizes[k - 1])
      throw Error(ErrorCode::InvalidInput, "sample sizes must be strictly increasing");
  }
  if (replicates < 1) throw Error(ErrorCode::InvalidInput, "replicates must be >= 1");
  if (methods.empty()) throw Error(ErrorCode::InvalidInput, "at least one method is required");
  if (jobs < 1) throw Error(ErrorCode::InvalidInput, "jobs must be >= 1");
  if (!(schedule.c1 > 0.0) || !(schedule.c2 > 0.0)) throw Error(ErrorCode::InvalidInput, "c1 and c2 must be > 0");
}

std::uint64_t cell_seed(std::uint64_t seed, int n, int replicate) {
  return seed ^ Rng::mix64(Rng::mix64(static_cast<std::uint64_t>(n)) ^ static_cast<std::uint64_t>(replicate));
}

std::vector<SweepRow> run_sweep(const GroundTruthModel& model, const SweepConfig& config) {
  config.validate();
  if (model.j_m.dim() < 2) throw Error(ErrorCode::InvalidInput, "sweep needs a model with p >= 2");
  const SymmetricMatrix true_precision = inverse_spd(model.sigma);

  struct Cell {
    Method method;
    int n;
    int replicate;
  };
  std::vector<Cell> cells;
  for (Method m : config.methods)
    for (int n : config.sample_sizes)
      for (int r = 0; r < config.replicates; ++r) cells.push_back({m, n, r});

  std::vector<SweepRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++)
      rows[k] = run_cell(model, config, cells[k].method, cells[k].n, cells[k].replicate, true_precision);
  };
  const auto jobs = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), cells.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
  }
  return rows;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << kHeader << '\n';
  for (const auto& r : rows) {
    out << to_string(r.method) << ',' << r.n << ',' << r.replicate << ',' << r.edit_markov << ',' << r.edit_residual
        << ',' << fmt(r.linf_jm) << ',' << fmt(r.linf_sigma_r) << ',' << fmt(r.linf_composite_precision) << ','
        << r.iterations << ',' << fmt(r.kkt_residual) << ',' << r.seed << ',' << r.status << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw Error(ErrorCode::InvalidInput, path.string() + ": bad header");
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 12) throw Error(ErrorCode::InvalidInput, path.string() + ": expected 12 columns");
    SweepRow r;
    try {
      r.method = parse_method(f[0]);
      r.n = std::stoi(f[1]);
      r.replicate = std::stoi(f[2]);
      r.edit_markov = std::stoi(f[3]);
      r.edit_residual = std::stoi(f[4]);
      r.linf_jm = std::stod(f[5]);
      r.linf_sigma_r = std::stod(f[6]);
      r.linf_composite_precision = std::stod(f[7]);
      r.iterations = std::stoi(f[8]);
      r.kkt_residual = std::stod(f[9]);
      r.seed = std::stoull(f[10]);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::InvalidInput, path.string() + ": bad row '" + line + "'");
    }
    r.status = f[11];
    rows.push_back(std::move(r));
  }
  return rows;
}

double median(std::vector<double> values) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace covdecomp
