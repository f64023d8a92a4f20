#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "covdecomp/model.hpp"
#include "covdecomp/solver.hpp"

namespace covdecomp {

enum class Method { L1Linf, L1Only };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct SweepConfig {
  std::vector<int> sample_sizes{1000, 2000, 4000, 8000};
  int replicates = 5;
  std::vector<Method> methods{Method::L1Linf, Method::L1Only};
  ScheduleConfig schedule;  // lambda_star is overwritten with the model's
  std::uint64_t seed = 0;
  int jobs = 1;
  double tol = 1e-8;
  int max_iterations = 50000;

  void validate() const;
};

/// One (method, n, replicate) cell. Numeric fields are NaN / -1 when the
/// cell failed before they could be computed; `status` says why.
struct SweepRow {
  Method method = Method::L1Linf;
  int n = 0;
  int replicate = 0;
  int edit_markov = -1;
  int edit_residual = -1;
  double linf_jm = 0.0;
  double linf_sigma_r = 0.0;
  double linf_composite_precision = 0.0;
  int iterations = 0;
  double kkt_residual = 0.0;
  std::uint64_t seed = 0;
  std::string status = "ok";
};

/// Sample seed for a cell. Both methods see the same draws for a given
/// (n, replicate).
std::uint64_t cell_seed(std::uint64_t seed, int n, int replicate);

/// Runs every cell (up to config.jobs at a time) and returns rows in
/// (method, n, replicate) order. Solver failures land in the status column.
std::vector<SweepRow> run_sweep(const GroundTruthModel& model, const SweepConfig& config);

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path);

/// Median of a metric over replicates, per (method, n).
double median(std::vector<double> values);

}  // namespace covdecomp
