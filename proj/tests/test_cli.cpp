#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "covdecomp/cli.hpp"
#include "covdecomp/error.hpp"
#include "covdecomp/model.hpp"
#include "covdecomp/sampling.hpp"
#include "covdecomp/sweep.hpp"
#include "covdecomp/synth.hpp"
#include "support.hpp"

using namespace covdecomp;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "covdecomp");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

GroundTruthModel small_model(std::uint64_t seed = 3) {
  SynthConfig cfg;
  cfg.rows = 3;
  cfg.cols = 3;
  cfg.residual_fraction = 0.5;
  cfg.seed = seed;
  return gen_model(cfg);
}

}  // namespace

TEST_CASE("cli: usage errors exit 1 and help exits 0") {
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"bogus"}).code == kExitUsage);
  CHECK(cli({"synth"}).code == kExitUsage);  // --out is required
  const auto help = cli({"--help"});
  CHECK(help.code == kExitOk);
  CHECK(help.out.find("decompose") != std::string::npos);
  const auto bad = cli({"synth", "--rows", "x", "--out", "m"});
  CHECK(bad.code == kExitUsage);
  CHECK_FALSE(bad.err.empty());
}

TEST_CASE("cli: synth then check") {
  testing::TempDir dir("cli-synth");
  const auto m = (dir / "m").string();
  REQUIRE(cli({"synth", "--rows", "8", "--cols", "8", "--seed", "7", "--out", m}).code == kExitOk);
  for (const char* f : {"j_m.csv", "sigma_r.csv", "sigma.csv", "metadata.txt"})
    CHECK(std::filesystem::exists(dir / "m" / f));
  const auto meta = read_key_values(dir / "m" / "metadata.txt");
  CHECK(meta.at("seed") == "7");
  CHECK(meta.at("p") == "64");

  SynthConfig cfg;
  cfg.seed = 7;
  CHECK(load_model(m).j_m == gen_model(cfg).j_m);

  const auto report = (dir / "report.txt").string();
  const auto chk = cli({"check", "--model", m, "--out", report});
  CHECK(chk.code == kExitOk);
  const auto text = slurp(report);
  for (const char* line : {"A.0 PASS", "A.1 PASS", "A.2 PASS", "A.3 PASS"}) CHECK(text.find(line) != std::string::npos);
  CHECK(text == chk.out);

  CHECK(cli({"synth", "--residual-fraction", "2", "--out", m}).code == kExitUsage);
  CHECK(cli({"check", "--model", (dir / "nope").string()}).code == kExitUsage);
}

TEST_CASE("cli: generation failure is a numerical error") {
  testing::TempDir dir("cli-genfail");
  CHECK(cli({"synth", "--rows", "3", "--cols", "3", "--residual-fraction", "1", "--residual-magnitude", "50", "--out",
             (dir / "m").string()})
            .code == kExitNumerical);
}

TEST_CASE("cli: sample writes re-parseable files") {
  testing::TempDir dir("cli-sample");
  save_model(dir / "m", small_model());
  const auto out = (dir / "s").string();
  REQUIRE(cli({"sample", "--model", (dir / "m").string(), "--n", "50", "--seed", "4", "--out", out}).code == kExitOk);
  const auto samples = read_samples_csv(dir / "s" / "samples.csv");
  CHECK(samples.n() == 50);
  CHECK(samples.dim() == 9);
  const auto cov = read_matrix_csv(dir / "s" / "sigma-hat.csv");
  CHECK((cov.dense() - sample_covariance(samples).dense()).cwiseAbs().maxCoeff() < 1e-12);

  // identical seed, identical bytes
  const auto again = (dir / "s2").string();
  REQUIRE(cli({"sample", "--model", (dir / "m").string(), "--n", "50", "--seed", "4", "--out", again}).code == kExitOk);
  CHECK(slurp(dir / "s" / "samples.csv") == slurp(dir / "s2" / "samples.csv"));

  CHECK(cli({"sample", "--n", "5", "--out", out}).code == kExitUsage);
  CHECK(cli({"sample", "--model", (dir / "m").string(), "--cov", "x.csv", "--out", out}).code == kExitUsage);
  CHECK(cli({"sample", "--model", (dir / "m").string(), "--n", "0", "--out", out}).code == kExitUsage);
}

TEST_CASE("cli: decompose endpoints and diagnostics") {
  testing::TempDir dir("cli-decompose");
  Rng rng(71);
  const auto s = testing::random_spd(5, rng);
  write_matrix_csv(dir / "s.csv", s);
  const auto out = (dir / "d").string();
  REQUIRE(cli({"decompose", "--cov", (dir / "s.csv").string(), "--gamma", "0", "--lambda", "inf", "--out", out}).code ==
          kExitOk);
  const auto j = read_matrix_csv(dir / "d" / "j_m_hat.csv");
  CHECK((j.dense() - inverse_spd(s).dense()).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(read_matrix_csv(dir / "d" / "sigma_r_hat.csv") == SymmetricMatrix::zero(5));
  const auto diag = read_key_values(dir / "d" / "diagnostics.txt");
  for (const char* k : {"iterations", "objective", "stationarity_residual", "dual_feasibility_residual",
                        "box_violation", "converged", "gamma", "lambda"})
    CHECK(diag.count(k) == 1);
  CHECK(diag.at("converged") == "true");
  CHECK(diag.at("lambda") == "inf");
  CHECK(std::stod(diag.at("stationarity_residual")) <= 1e-8);

  // exact statistics of a model with lambda = lambda*
  const auto model = small_model();
  save_model(dir / "m", model);
  REQUIRE(cli({"decompose", "--cov", (dir / "m" / "sigma.csv").string(), "--lambda", "0.5", "--out", out}).code ==
          kExitOk);
  CHECK((read_matrix_csv(dir / "d" / "j_m_hat.csv").dense() - model.j_m.dense()).cwiseAbs().maxCoeff() < 1e-5);
  CHECK((read_matrix_csv(dir / "d" / "sigma_r_hat.csv").dense() - model.sigma_r.dense()).cwiseAbs().maxCoeff() <
        1e-5);

  // schedule mode
  REQUIRE(cli({"decompose", "--cov", (dir / "m" / "sigma.csv").string(), "--gamma", "schedule", "--lambda",
               "schedule", "--lambda-star", "0.5", "--n", "4096", "--c1", "1", "--c2", "1", "--out", out})
              .code == kExitOk);
  const auto sched = read_key_values(dir / "d" / "diagnostics.txt");
  CHECK(std::stod(sched.at("gamma")) == doctest::Approx(std::sqrt(std::log(9.0) / 4096)));
  CHECK(std::stod(sched.at("lambda")) == doctest::Approx(0.5 + std::sqrt(std::log(9.0) / 4096)));

  const auto cov = (dir / "s.csv").string();
  CHECK(cli({"decompose", "--cov", cov, "--gamma", "schedule", "--out", out}).code == kExitUsage);  // no --n
  CHECK(cli({"decompose", "--cov", cov, "--lambda", "schedule", "--n", "10", "--out", out}).code == kExitUsage);
  CHECK(cli({"decompose", "--cov", cov, "--gamma", "abc", "--out", out}).code == kExitUsage);
  CHECK(cli({"decompose", "--cov", (dir / "none.csv").string(), "--out", out}).code == kExitUsage);

  write_matrix_csv(dir / "bad.csv", SymmetricMatrix{{1, 2}, {2, 1}});
  CHECK(cli({"decompose", "--cov", (dir / "bad.csv").string(), "--out", out}).code == kExitNumerical);
  CHECK(cli({"decompose", "--cov", cov, "--lambda", "0.01", "--max-iters", "1", "--out", out}).code ==
        kExitNumerical);
}

TEST_CASE("cli: lbp trace") {
  testing::TempDir dir("cli-lbp");
  SynthConfig cfg;
  save_model(dir / "m", gen_model(cfg));
  const auto trace = (dir / "t.csv").string();
  REQUIRE(cli({"lbp", "--model", (dir / "m").string(), "--out", trace}).code == kExitOk);
  std::ifstream in(trace);
  std::string line;
  std::getline(in, line);
  CHECK(line == "iteration,mean_error_markov,var_error_markov,mean_error_composite,var_error_composite");
  int rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
    CHECK(std::count(line.begin(), line.end(), ',') == 4);
  }
  CHECK(rows > 1);
  // the composite run stops early; its columns are padded with nan
  CHECK(last.find("nan") != std::string::npos);
  CHECK(cli({"lbp", "--model", (dir / "m").string(), "--damping", "1", "--out", trace}).code == kExitUsage);
}

TEST_CASE("sweep: rows, ordering, determinism and parallelism") {
  const auto model = small_model();
  SweepConfig cfg;
  cfg.sample_sizes = {200, 800};
  cfg.replicates = 2;
  cfg.seed = 5;
  const auto rows = run_sweep(model, cfg);
  REQUIRE(rows.size() == 8);
  const int residual_edges = static_cast<int>(support_off(model.sigma_r, 0.0).size());
  std::size_t k = 0;
  for (Method m : {Method::L1Linf, Method::L1Only})
    for (int n : {200, 800})
      for (int r = 0; r < 2; ++r, ++k) {
        CHECK(rows[k].method == m);
        CHECK(rows[k].n == n);
        CHECK(rows[k].replicate == r);
        CHECK(rows[k].seed == cell_seed(5, n, r));
        CHECK(rows[k].status == "ok");
        if (m == Method::L1Only) {
          CHECK(rows[k].edit_residual == residual_edges);
          CHECK(rows[k].linf_sigma_r == doctest::Approx(model.sigma_r.max_abs()));
        }
      }

  SweepConfig par = cfg;
  par.jobs = 3;
  const auto again = run_sweep(model, par);
  testing::TempDir dir("sweep");
  write_sweep_csv(dir / "a.csv", rows);
  write_sweep_csv(dir / "b.csv", again);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));

  const auto back = read_sweep_csv(dir / "a.csv");
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].method == rows[i].method);
    CHECK(back[i].edit_markov == rows[i].edit_markov);
    CHECK(back[i].linf_composite_precision == rows[i].linf_composite_precision);
    CHECK(back[i].kkt_residual == rows[i].kkt_residual);
    CHECK(back[i].seed == rows[i].seed);
    CHECK(back[i].status == rows[i].status);
  }
}

TEST_CASE("sweep: config validation and helpers") {
  SweepConfig cfg;
  cfg.sample_sizes = {100, 100};
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.replicates = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.methods.clear();
  CHECK_THROWS_AS(cfg.validate(), Error);
  CHECK(parse_method("l1_only") == Method::L1Only);
  CHECK(to_string(Method::L1Linf) == "l1_linf");
  CHECK_THROWS_AS(parse_method("lasso"), Error);
  CHECK(median({3, 1, 2}) == 2.0);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  CHECK(cell_seed(1, 1000, 0) != cell_seed(1, 1000, 1));
  CHECK(cell_seed(1, 1000, 0) != cell_seed(1, 2000, 0));
}

TEST_CASE("cli: sweep config file, flag override and environment") {
  testing::TempDir dir("cli-sweep");
  save_model(dir / "m", small_model());
  {
    std::ofstream f(dir / "sweep.conf");
    f << "# small run\nsizes = 200,400\nreplicates = 1\nmethods = l1_linf\nseed = 9\n";
  }
  const auto m = (dir / "m").string();
  const auto conf = (dir / "sweep.conf").string();
  const auto out = (dir / "r.csv").string();

  REQUIRE(cli({"sweep", "--config", conf, "--model", m, "--out", out}).code == kExitOk);
  auto rows = read_sweep_csv(out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].n == 200);
  CHECK(rows[1].n == 400);
  CHECK(rows[0].seed == cell_seed(9, 200, 0));
  const auto first = slurp(out);

  // flags win over the file
  REQUIRE(cli({"sweep", "--config", conf, "--model", m, "--replicates", "2", "--methods", "l1_linf,l1_only", "--out",
               out})
              .code == kExitOk);
  rows = read_sweep_csv(out);
  CHECK(rows.size() == 8);

  // determinism of the whole pipeline
  REQUIRE(cli({"sweep", "--config", conf, "--model", m, "--out", out}).code == kExitOk);
  CHECK(slurp(out) == first);

  {
    std::ofstream f(dir / "bad.conf");
    f << "colour=blue\n";
  }
  CHECK(cli({"sweep", "--config", (dir / "bad.conf").string(), "--model", m, "--out", out}).code == kExitUsage);
  CHECK(cli({"sweep", "--model", m}).code == kExitUsage);
  CHECK(cli({"sweep", "--config", conf, "--model", m, "--methods", "lasso", "--out", out}).code == kExitUsage);

  ::setenv("COVDECOMP_JOBS", "0", 1);
  CHECK(cli({"sweep", "--config", conf, "--model", m, "--out", out}).code == kExitUsage);
  CHECK(cli({"sweep", "--config", conf, "--model", m, "--jobs", "2", "--out", out}).code == kExitOk);
  ::unsetenv("COVDECOMP_JOBS");
}
