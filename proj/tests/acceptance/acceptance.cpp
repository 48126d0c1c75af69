// Acceptance suite: one PASS/FAIL line per criterion.
// usage: acceptance [criterion...]   (default: all of 1-9)

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "../support/toy_targets.hpp"
#include "marsmc/densities.hpp"
#include "marsmc/likelihood.hpp"
#include "marsmc/model.hpp"
#include "marsmc/pipeline/cli.hpp"
#include "marsmc/pipeline/mc_study.hpp"
#include "marsmc/priors.hpp"
#include "marsmc/rng.hpp"
#include "marsmc/select.hpp"
#include "marsmc/simulate.hpp"
#include "marsmc/smc.hpp"

using namespace marsmc;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Eigen::MatrixXd random_spd(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = z(gen);
  return a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
}

// 1. skew-t(alpha = 0) == t and Cauchy == t(nu = 1)
Outcome density_identities() {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> unif(0.5, 30.0);
  std::uniform_int_distribution<int> dim(1, 4);
  double skew_err = 0.0, cauchy_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int n = dim(gen);
    const Eigen::MatrixXd sigma = random_spd(n, gen);
    Eigen::VectorXd u(n);
    for (int j = 0; j < n; ++j) u(j) = 3.0 * z(gen);
    const double nu = unif(gen);
    skew_err = std::max(skew_err, std::abs(logpdf_mvskewt(u, sigma, nu, Eigen::VectorXd::Zero(n)) -
                                           logpdf_mvt(u, sigma, nu)));
    cauchy_err = std::max(cauchy_err, std::abs(logpdf_cauchy(u, sigma) - logpdf_mvt(u, sigma, 1.0)));
  }
  return {skew_err <= 1e-12 && cauchy_err <= 1e-14,
          fmt("max |skew_t(alpha=0) - t| = %.3g (tol 1e-12), max |cauchy - t(1)| = %.3g (tol 1e-14), 1000 points",
              skew_err, cauchy_err)};
}

struct ToyRuns {
  std::vector<double> ratio, mean, sd;
};

ToyRuns toy_runs() {
  const auto toy = testing::standard_toy();
  ToyRuns runs;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SmcConfig cfg;
    cfg.particles = 5000;
    cfg.stages = 50;
    cfg.lambda = 2.0;
    cfg.seed = seed;
    const auto res = run(toy, cfg);
    runs.ratio.push_back(std::exp(res.log_mdd - toy.log_evidence()));
    runs.mean.push_back(res.posterior_mean(0));
    runs.sd.push_back(res.posterior_sd(0));
  }
  return runs;
}

double average(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_error(const std::vector<double>& v) {
  const double m = average(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// 2. exp(log_mdd) vs analytic evidence
Outcome mdd_oracle(const ToyRuns& runs) {
  const double rel = std::abs(average(runs.ratio) - 1.0);
  return {rel <= 0.05, fmt("mean exp(log_mdd)/evidence over 10 seeds = %.5f, relative error %.4f (tol 0.05)",
                           average(runs.ratio), rel)};
}

// 3. posterior mean and sd vs analytic values, 3 Monte Carlo standard errors across seeds
Outcome posterior_oracle(const ToyRuns& runs) {
  const auto toy = testing::standard_toy();
  const double mean_z = (average(runs.mean) - toy.post_mean()) / std_error(runs.mean);
  const double sd_z = (average(runs.sd) - toy.post_sd()) / std_error(runs.sd);
  return {std::abs(mean_z) <= 3.0 && std::abs(sd_z) <= 3.0,
          fmt("mean %.6f vs %.6f (%.2f SE), sd %.6f vs %.6f (%.2f SE), tol 3 SE", average(runs.mean),
              toy.post_mean(), mean_z, average(runs.sd), toy.post_sd(), sd_z)};
}

// 4. Cauchy estimation study
Outcome estimation_study() {
  DgpSpec dgp = table2_dgp(ErrorDist::Cauchy);
  dgp.seed = 1;  // same seeds as the CLI defaults
  SmcConfig cfg;
  cfg.particles = 2000;
  cfg.stages = 50;
  cfg.mutation_steps = 1;
  cfg.seed = 1;
  const auto study = pipeline::mc_estimation(dgp, 20, cfg, PriorConfig{});
  double max_bias = 0.0, max_rmse = 0.0;
  std::string worst;
  for (std::size_t j = 0; j < 8; ++j) {
    const double b = std::abs(study.summary.bias(static_cast<Eigen::Index>(j)));
    const double r = study.summary.rmse(static_cast<Eigen::Index>(j));
    if (b > max_bias) max_bias = b, worst = study.names[j];
    max_rmse = std::max(max_rmse, r);
  }
  return {study.failures == 0 && max_bias <= 0.05 && max_rmse <= 0.10,
          fmt("B=20 P=2000 M=50 S=1: max |BIAS| = %.4f (%s, tol 0.05), max RMSE = %.4f (tol 0.10), failures %zu",
              max_bias, worst.c_str(), max_rmse, study.failures)};
}

// 5. identification study
Outcome identification_study() {
  DgpSpec dgp = table2_dgp(ErrorDist::Cauchy);
  dgp.seed = 1;  // same seeds as the CLI defaults
  SmcConfig cfg;
  cfg.particles = 1000;
  cfg.stages = 40;
  cfg.seed = 1;
  const auto study = pipeline::mc_identification(dgp, 20, CandidateGrid::standard(), cfg, PriorConfig{});
  return {study.bic_rate() >= 0.6, fmt("B=20 P=1000 M=40: BIC picks %s in %.0f%% (tol >= 60%%), MDD in %.0f%%, failures %zu",
                                       dgp.model.label().c_str(), 100 * study.bic_rate(), 100 * study.mdd_rate(),
                                       study.failures)};
}

// 6. residual filter inverts the simulator
Outcome filter_inverse() {
  double worst[2] = {0.0, 0.0};
  const ErrorDist dists[2] = {ErrorDist::StudentT, ErrorDist::Cauchy};
  for (int d = 0; d < 2; ++d) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      DgpSpec dgp = table2_dgp(dists[d]);
      dgp.seed = seed;
      const auto path = simulate_path_with_noise(dgp);
      const auto& spec = dgp.model;
      const Eigen::MatrixXd res = residuals(spec, std::span<const double>(dgp.params.theta.data(), static_cast<std::size_t>(dgp.params.theta.size())), path.data);
      for (Eigen::Index j = 0; j < res.rows(); ++j)
        for (Eigen::Index i = 0; i < res.cols(); ++i) {
          const double u = path.noise(j + spec.r, i);
          worst[d] = std::max(worst[d], std::abs(res(j, i) - u) / std::max(std::abs(u), 1.0));
        }
    }
  }
  return {worst[0] <= 1e-6 && worst[1] <= 1e-3,
          fmt("20 seeds: max relative error student_t %.3g (tol 1e-6), cauchy %.3g (tol 1e-3)", worst[0], worst[1])};
}

// 7. SMC mechanics
Outcome smc_mechanics() {
  std::vector<std::string> problems;
  if (tempering_schedule(1, 50, 2.0) != 0.0 || tempering_schedule(50, 50, 2.0) != 1.0)
    problems.push_back("schedule endpoints");

  const auto toy = testing::standard_toy();
  SmcConfig cfg;
  cfg.particles = 1000;
  cfg.stages = 30;
  cfg.seed = 3;
  double worst_mean = 0.0, min_ess = std::numeric_limits<double>::infinity(), max_ess = 0.0;
  RunHooks hooks;
  hooks.on_checkpoint = [&](const ParticleCloud& c) {
    worst_mean = std::max(worst_mean, std::abs(c.weights.mean() - 1.0));
  };
  hooks.on_stage = [&](const StageDiagnostics& d) {
    min_ess = std::min(min_ess, d.ess);
    max_ess = std::max(max_ess, d.ess);
  };
  const auto base = run(toy, cfg, hooks);
  if (worst_mean > 1e-12) problems.push_back("mean weight");
  if (!(min_ess > 0.0) || max_ess > static_cast<double>(cfg.particles) * (1 + 1e-12)) problems.push_back("ESS range");

  const double c = 137.25;
  const auto shifted = run(testing::standard_toy(c), cfg);
  const double shift_err = std::abs(shifted.log_mdd - base.log_mdd - c);
  if (shift_err > 1e-8) problems.push_back("constant shift");

  // bit-identical across worker counts on a real posterior
  const DgpSpec dgp = table2_dgp(ErrorDist::StudentT);
  const SeriesData data = simulate_path(dgp);
  const PosteriorKernel kernel(dgp.model, data, PriorConfig{});
  SmcConfig wcfg;
  wcfg.particles = 400;
  wcfg.stages = 12;
  wcfg.mutation_steps = 2;
  wcfg.seed = 5;
  std::vector<SmcRunResult> results;
  for (int w : {1, 4, 8}) {
    wcfg.workers = w;
    results.push_back(run(kernel, wcfg));
  }
  bool identical = true;
  for (std::size_t i = 1; i < results.size(); ++i) {
    identical &= results[i].log_mdd == results[0].log_mdd;
    identical &= results[i].final_cloud.params == results[0].final_cloud.params;
    identical &= results[i].final_cloud.weights == results[0].final_cloud.weights;
  }
  if (!identical) problems.push_back("worker determinism");

  std::string list;
  for (const auto& p : problems) list += " " + p;
  return {problems.empty(),
          fmt("endpoints ok=%d, max |mean weight - 1| = %.3g, ESS in [%.1f, %.1f] of P=%zu, shift error %.3g (tol 1e-8), "
              "workers 1/4/8 identical=%d%s",
              tempering_schedule(1, 50, 2.0) == 0.0 && tempering_schedule(50, 50, 2.0) == 1.0, worst_mean, min_ess,
              max_ess, cfg.particles, shift_err, identical, list.empty() ? "" : (";" + list).c_str())};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::vector<std::string>& args) {
  std::vector<std::string> full = {"marsmc"};
  full.insert(full.end(), args.begin(), args.end());
  std::ostringstream out, err;
  const int code = pipeline::cli_main(full, out, err);
  if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

struct Row {
  std::string model;
  bool ok;
  double log_mdd, bic;
};

std::vector<Row> read_selection(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> f(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char ch = line[i];
      if (ch == '"') {
        if (quoted && i + 1 < line.size() && line[i + 1] == '"') f.back() += line[++i];
        else quoted = !quoted;
      } else if (ch == ',' && !quoted) {
        f.emplace_back();
      } else {
        f.back() += ch;
      }
    }
    if (f.size() < 8) continue;
    rows.push_back({f[0], f[5] == "1", std::strtod(f[6].c_str(), nullptr), std::strtod(f[7].c_str(), nullptr)});
  }
  return rows;
}

const fs::path kData = MARSMC_TEST_DATA_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("marsmc_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

// 8. pipeline determinism
Outcome pipeline_determinism() {
  const fs::path a = scratch("est"), sel = scratch("sel_raw");
  const std::string input = (kData / "esg_brent_sim.csv").string();
  const std::vector<std::string> common = {"--set", "input=" + input, "--set", "preprocess_detrend_degree=3",
                                           "--set", "smc.particles=1000", "--set", "smc.stages=30",
                                           "--set", "smc.seed=17"};
  auto with_out = [&](std::vector<std::string> args, const fs::path& out) {
    args.insert(args.end(), common.begin(), common.end());
    args.push_back("--set");
    args.push_back("output_dir=" + out.string());
    return args;
  };
  // same output_dir for both runs so the resolved configs agree
  const int c1 = cli(with_out({"estimate"}, a));
  const std::string m1 = slurp(a / "manifest.json");
  const int c2 = cli(with_out({"estimate"}, a));
  const std::string m2 = slurp(a / "manifest.json");
  const bool identical = c1 == 0 && c2 == 0 && !m1.empty() && m1 == m2;

  const int c3 = cli({"select", "--set", "input=" + (kData / "table2_cauchy.csv").string(), "--set",
                      "output_dir=" + sel.string(), "--set", "smc.particles=1000", "--set", "smc.stages=30"});
  const auto rows = read_selection(sel / "selection.csv");
  fs::remove_all(a);
  fs::remove_all(sel);
  return {identical && c3 == 0 && rows.size() == 21,
          fmt("estimate twice: manifests byte-identical=%d (%zu bytes); select on table2_cauchy.csv: %zu rows (need 21)",
              identical, m1.size(), rows.size())};
}

// 9. selection on detrended bundled data
Outcome empirical_shape() {
  const fs::path out = scratch("sel_esg");
  const int code = cli({"select", "--set", "input=" + (kData / "esg_brent_sim.csv").string(), "--set",
                        "preprocess_detrend_degree=3", "--set", "output_dir=" + out.string()});
  if (code != 0) return {false, fmt("select exited with code %d", code)};
  const auto rows = read_selection(out / "selection.csv");
  const json m = json::parse(slurp(out / "manifest.json"));
  fs::remove_all(out);
  std::size_t ok = 0, arg_mdd = 0, arg_bic = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].ok) continue;
    ++ok;
    if (!rows[arg_mdd].ok || rows[i].log_mdd > rows[arg_mdd].log_mdd) arg_mdd = i;
    if (!rows[arg_bic].ok || rows[i].bic < rows[arg_bic].bic) arg_bic = i;
  }
  const std::string best_mdd = m["best_by_mdd"], best_bic = m["best_by_bic"];
  const bool consistent = ok > 0 && rows[arg_mdd].model == best_mdd && rows[arg_bic].model == best_bic;
  return {rows.size() == 21 && ok == 21 && consistent,
          fmt("%zu/%zu candidates completed; best_by_mdd %s (table argmax %s), best_by_bic %s (table argmin %s)", ok,
              rows.size(), best_mdd.c_str(), rows.empty() ? "-" : rows[arg_mdd].model.c_str(), best_bic.c_str(),
              rows.empty() ? "-" : rows[arg_bic].model.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
  if (wanted.empty()) wanted = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  ToyRuns toy;
  bool have_toy = false;
  auto toy_cached = [&]() -> const ToyRuns& {
    if (!have_toy) toy = toy_runs(), have_toy = true;
    return toy;
  };
  const std::map<int, std::function<Outcome()>> criteria = {
      {1, density_identities},
      {2, [&] { return mdd_oracle(toy_cached()); }},
      {3, [&] { return posterior_oracle(toy_cached()); }},
      {4, estimation_study},
      {5, identification_study},
      {6, filter_inverse},
      {7, smc_mechanics},
      {8, pipeline_determinism},
      {9, empirical_shape},
  };

  int failures = 0;
  for (int id : wanted) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::printf("FAIL criterion %d: unknown criterion\n", id);
      ++failures;
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
