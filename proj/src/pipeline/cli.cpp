#include "marsmc/pipeline/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "marsmc/errors.hpp"
#include "marsmc/kernels.hpp"
#include "marsmc/likelihood.hpp"
#include "marsmc/pipeline/cloud_io.hpp"
#include "marsmc/pipeline/config.hpp"
#include "marsmc/pipeline/csv.hpp"
#include "marsmc/pipeline/detrend.hpp"
#include "marsmc/pipeline/mc_study.hpp"
#include "marsmc/select.hpp"
#include "marsmc/simulate.hpp"
#include "marsmc/smc.hpp"

#ifndef MARSMC_VERSION
#define MARSMC_VERSION "0.0.0"
#endif

namespace marsmc::pipeline {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json json_num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out.exceptions(std::ios::badbit);
  return out;
}

void write_json(const fs::path& path, const Json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

int env_threads() {
  const char* v = std::getenv("MARSMC_THREADS");
  if (v == nullptr || *v == '\0') return 0;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 0) throw ConfigError(std::string("MARSMC_THREADS must be a non-negative integer, got '") + v + "'");
  return static_cast<int>(n);
}

struct Context {
  std::string command;
  RunConfig cfg;
  fs::path out_dir;
  bool progress = false;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
  Clock::time_point start = Clock::now();
};

Json base_manifest(const Context& ctx) {
  Json m;
  m["tool"] = "marsmc";
  m["version"] = MARSMC_VERSION;
  m["command"] = ctx.command;
  m["config"] = ctx.cfg.json();
  m["kernel_variant"] = kernels::active().name;
  m["timing_file"] = "timing.json";
  return m;
}

void finish(const Context& ctx, Json manifest) {
  write_json(ctx.out_dir / "manifest.json", manifest);
  const double secs = std::chrono::duration<double>(Clock::now() - ctx.start).count();
  write_json(ctx.out_dir / "timing.json", Json{{"command", ctx.command}, {"wall_time_seconds", secs}});
  *ctx.out << "wrote " << (ctx.out_dir / "manifest.json").string() << '\n';
}

std::vector<std::string> deviations(const ModelSpec& spec) {
  std::vector<std::string> d = {
      "log_mdd: per-stage weights normalized to mean one; log_mdd = sum_m log((1/P) sum_i w~_m^i W_{m-1}^i)",
      "prior: stationarity truncation of the Psi/Phi normal priors is not renormalized",
      "prior: nu ~ Exponential(mean 5) truncated to (2, 100] and renormalized",
      "bic: evaluated at the MAP particle (max log likelihood + log prior), penalty k * log(T - r - s)",
      "point estimate: weighted posterior mean; MAP particle also reported",
  };
  if (spec.n == 1) {
    d.emplace_back("prior: univariate scale uses log sigma ~ N(0, 10) instead of the improper p(sigma) ~ 1/sigma");
    if (spec.dist == ErrorDist::SkewedT)
      d.emplace_back("prior: univariate skewness alpha > 0 has a half-normal N(0, 3) prior");
  }
  if (spec.dist == ErrorDist::SkewedT && spec.n >= 2)
    d.emplace_back("likelihood: skew term uses alpha'u on the raw residual u");
  return d;
}

SeriesData load_input(const Context& ctx, Json& manifest) {
  const std::string input = ctx.cfg.input();
  if (input.empty()) throw ConfigError("'input' is required for " + ctx.command);
  SeriesData data = load_csv(input);
  Json info{{"path", input}, {"T", data.T()}, {"n", data.n()}, {"names", data.names}};
  const int degree = ctx.cfg.preprocess_detrend_degree();
  if (degree >= 0) {
    DetrendResult dr = detrend(data, degree);
    data = std::move(dr.detrended);
    info["detrend_degree"] = degree;
  }
  manifest["input"] = info;
  return data;
}

RunHooks make_hooks(const Context& ctx, const std::string& tag) {
  RunHooks hooks;
  if (ctx.progress) {
    hooks.on_stage = [&ctx, tag](const StageDiagnostics& d) {
      *ctx.err << tag << "stage " << d.stage << " rho=" << num(d.rho) << " ess=" << num(d.ess)
               << " acc=" << num(d.acceptance) << '\n';
    };
  }
  if (ctx.cfg.checkpoint()) {
    const fs::path dir = ctx.out_dir / "checkpoints";
    fs::create_directories(dir);
    hooks.on_checkpoint = [dir](const ParticleCloud& cloud) {
      char name[32];
      std::snprintf(name, sizeof name, "stage_%03zu.bin", cloud.stage);
      write_cloud(dir / name, cloud);
    };
  }
  return hooks;
}

Json stages_json(const std::vector<StageDiagnostics>& stages) {
  Json arr = Json::array();
  for (const auto& d : stages) {
    arr.push_back({{"stage", d.stage},
                   {"rho", d.rho},
                   {"ess", json_num(d.ess)},
                   {"resampled", d.resampled},
                   {"acceptance", json_num(d.acceptance)},
                   {"scale", json_num(d.scale)},
                   {"log_increment", json_num(d.log_increment)},
                   {"diagonal_fallback", d.diagonal_fallback}});
  }
  return arr;
}

void write_diagnostics(const fs::path& path, const std::vector<StageDiagnostics>& stages) {
  auto out = open_out(path);
  out << "stage,rho,ess,resampled,acceptance,scale,log_increment,diagonal_fallback\n";
  for (const auto& d : stages) {
    out << d.stage << ',' << num(d.rho) << ',' << num(d.ess) << ',' << (d.resampled ? 1 : 0) << ','
        << num(d.acceptance) << ',' << num(d.scale) << ',' << num(d.log_increment) << ','
        << (d.diagonal_fallback ? 1 : 0) << '\n';
  }
}

SmcConfig smc_for(const Context& ctx) {
  SmcConfig smc = ctx.cfg.smc();
  smc.workers = env_threads();
  return smc;
}

int cmd_simulate(const Context& ctx) {
  const DgpSpec dgp = ctx.cfg.dgp();
  const SimulatedPath path = simulate_path_with_noise(dgp);
  write_csv(ctx.out_dir / "simulated.csv", path.data);
  SeriesData noise;
  noise.values = path.noise;
  for (const auto& name : path.data.names) noise.names.push_back("u_" + name);
  write_csv(ctx.out_dir / "noise.csv", noise);

  Json m = base_manifest(ctx);
  m["seed"] = dgp.seed;
  m["model"] = dgp.model.label();
  m["burn"] = dgp.burn;
  m["T"] = dgp.T;
  Json truth = Json::object();
  const auto names = param_names(dgp.model);
  for (std::size_t j = 0; j < names.size(); ++j) truth[names[j]] = dgp.params.theta(static_cast<Eigen::Index>(j));
  m["true_params"] = truth;
  m["deviations"] = {
      "simulate: Psi(L) v = u solved forward, then Phi(L^-1) y = v backward, so the residual filter inverts the simulator for every n"};
  m["outputs"] = {"simulated.csv", "noise.csv"};
  finish(ctx, m);
  return kExitOk;
}

int cmd_estimate(const Context& ctx) {
  Json m = base_manifest(ctx);
  SeriesData data = load_input(ctx, m);
  const ModelSpec spec = ctx.cfg.model(data.n());
  const PriorConfig prior = ctx.cfg.prior();
  prior.validate(spec.n);
  const SmcConfig smc = smc_for(ctx);
  PosteriorKernel kernel(spec, std::move(data), prior);
  const SmcRunResult res = run(kernel, smc, make_hooks(ctx, ""));
  const double b = bic(kernel, res);

  const auto names = kernel.parameter_names();
  {
    auto out = open_out(ctx.out_dir / "posterior.csv");
    out << "parameter,mean,sd,map\n";
    for (std::size_t j = 0; j < names.size(); ++j) {
      const auto i = static_cast<Eigen::Index>(j);
      out << csv_field(names[j]) << ',' << num(res.posterior_mean(i)) << ',' << num(res.posterior_sd(i)) << ','
          << num(res.map_params(i)) << '\n';
    }
  }
  write_diagnostics(ctx.out_dir / "diagnostics.csv", res.stages);
  if (ctx.cfg.dump_cloud()) write_cloud(ctx.out_dir / "cloud.bin", res.final_cloud);

  m["seed"] = smc.seed;
  m["model"] = spec.label();
  m["k"] = spec.num_params();
  m["log_mdd"] = json_num(res.log_mdd);
  m["bic"] = json_num(b);
  m["map_loglik"] = json_num(res.map_loglik);
  m["map_log_kernel"] = json_num(res.map_log_kernel);
  Json post = Json::array();
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto i = static_cast<Eigen::Index>(j);
    post.push_back({{"parameter", names[j]},
                    {"mean", json_num(res.posterior_mean(i))},
                    {"sd", json_num(res.posterior_sd(i))},
                    {"map", json_num(res.map_params(i))}});
  }
  m["posterior"] = post;
  m["stages"] = stages_json(res.stages);
  m["deviations"] = deviations(spec);
  m["outputs"] = {"posterior.csv", "diagnostics.csv"};
  if (ctx.cfg.dump_cloud()) m["outputs"].push_back("cloud.bin");
  *ctx.out << spec.label() << " log_mdd=" << num(res.log_mdd) << " bic=" << num(b) << '\n';
  finish(ctx, m);
  return kExitOk;
}

int cmd_select(const Context& ctx) {
  Json m = base_manifest(ctx);
  const SeriesData data = load_input(ctx, m);
  const CandidateGrid grid = ctx.cfg.grid();
  const PriorConfig prior = ctx.cfg.prior();
  prior.validate(data.n());
  const SmcConfig smc = smc_for(ctx);
  const SelectionReport rep = select_model(data, grid, smc, prior);
  const auto mdd_rank = rep.mdd_ranks();
  const auto bic_rank = rep.bic_ranks();

  Json rows = Json::array();
  Json timing = Json::array();
  {
    auto out = open_out(ctx.out_dir / "selection.csv");
    out << "model,r,s,dist,k,ok,log_mdd,bic,map_loglik,mdd_rank,bic_rank,seed,failure\n";
    for (std::size_t i = 0; i < rep.candidates.size(); ++i) {
      const auto& c = rep.candidates[i];
      out << csv_field(c.spec.label()) << ',' << c.spec.r << ',' << c.spec.s << ',' << to_string(c.spec.dist) << ',' << c.k
          << ',' << (c.ok ? 1 : 0) << ',' << num(c.ok ? c.log_mdd : NAN) << ',' << num(c.ok ? c.bic : NAN) << ','
          << num(c.ok ? c.map_loglik : NAN) << ',' << mdd_rank[i] << ',' << bic_rank[i] << ',' << c.seed << ','
          << csv_field(c.failure) << '\n';
      rows.push_back({{"model", c.spec.label()},
                      {"ok", c.ok},
                      {"log_mdd", c.ok ? json_num(c.log_mdd) : Json(nullptr)},
                      {"bic", c.ok ? json_num(c.bic) : Json(nullptr)},
                      {"mdd_rank", mdd_rank[i]},
                      {"bic_rank", bic_rank[i]},
                      {"seed", c.seed},
                      {"failure", c.failure}});
    }
  }
  m["seed"] = smc.seed;
  m["candidates"] = rows;
  m["best_by_mdd"] = rep.candidates[rep.best_by_mdd].spec.label();
  m["best_by_bic"] = rep.candidates[rep.best_by_bic].spec.label();
  m["deviations"] = deviations(ModelSpec{data.n(), 1, 0, ErrorDist::StudentT});
  m["outputs"] = {"selection.csv"};
  *ctx.out << "best by MDD: " << m["best_by_mdd"].get<std::string>()
           << ", best by BIC: " << m["best_by_bic"].get<std::string>() << '\n';
  finish(ctx, m);
  return kExitOk;
}

void write_replications(const fs::path& path, const std::vector<ReplicationRecord>& reps) {
  auto out = open_out(path);
  out << "replication,data_seed,smc_seed,ok,log_mdd,best_by_mdd,best_by_bic,failure\n";
  for (const auto& r : reps) {
    out << r.index << ',' << r.data_seed << ',' << r.smc_seed << ',' << (r.ok ? 1 : 0) << ','
        << num(r.ok ? r.log_mdd : NAN) << ',' << csv_field(r.best_by_mdd) << ',' << csv_field(r.best_by_bic) << ','
        << csv_field(r.failure) << '\n';
  }
}

int cmd_mc(const Context& ctx) {
  const DgpSpec dgp = ctx.cfg.dgp();
  const std::size_t B = ctx.cfg.mc_replications();
  const SmcConfig smc = smc_for(ctx);
  const PriorConfig prior = ctx.cfg.prior();
  ProgressFn progress;
  if (ctx.progress) progress = [&ctx](std::size_t done, std::size_t total) {
    *ctx.err << "replication " << done << "/" << total << '\n';
  };

  Json m = base_manifest(ctx);
  m["seed"] = smc.seed;
  m["data_seed"] = dgp.seed;
  m["model"] = dgp.model.label();
  m["replications"] = B;
  m["deviations"] = deviations(dgp.model);

  if (ctx.cfg.mc_mode() == "estimate") {
    const EstimationStudy st = mc_estimation(dgp, B, smc, prior, progress);
    auto out = open_out(ctx.out_dir / "mc_estimate.csv");
    out << "parameter,true,mean,variance,mean_sd,bias,rmse\n";
    const auto& s = st.summary;
    Json rows = Json::array();
    for (std::size_t j = 0; j < st.names.size(); ++j) {
      const auto i = static_cast<Eigen::Index>(j);
      out << csv_field(st.names[j]) << ',' << num(s.truth(i)) << ',' << num(s.mean(i)) << ',' << num(s.variance(i))
          << ',' << num(s.mean_sd(i)) << ',' << num(s.bias(i)) << ',' << num(s.rmse(i)) << '\n';
      rows.push_back({{"parameter", st.names[j]},
                      {"true", s.truth(i)},
                      {"mean", json_num(s.mean(i))},
                      {"bias", json_num(s.bias(i))},
                      {"rmse", json_num(s.rmse(i))}});
    }
    write_replications(ctx.out_dir / "mc_replications.csv", st.replications);
    m["summary"] = rows;
    m["failures"] = st.failures;
    m["outputs"] = {"mc_estimate.csv", "mc_replications.csv"};
    *ctx.out << "estimation study: " << B - st.failures << "/" << B << " replications succeeded\n";
  } else {
    const CandidateGrid grid = ctx.cfg.grid();
    const IdentificationStudy st = mc_identification(dgp, B, grid, smc, prior, progress);
    auto out = open_out(ctx.out_dir / "mc_identify.csv");
    out << "model,by_mdd,by_bic,mdd_share,bic_share\n";
    const double ok = static_cast<double>(st.successes());
    for (const auto& c : st.counts) {
      out << csv_field(c.spec.label()) << ',' << c.by_mdd << ',' << c.by_bic << ','
          << num(ok > 0 ? c.by_mdd / ok : NAN) << ',' << num(ok > 0 ? c.by_bic / ok : NAN) << '\n';
    }
    write_replications(ctx.out_dir / "mc_replications.csv", st.replications);
    m["failures"] = st.failures;
    m["true_model_rate_mdd"] = json_num(st.mdd_rate());
    m["true_model_rate_bic"] = json_num(st.bic_rate());
    m["outputs"] = {"mc_identify.csv", "mc_replications.csv"};
    *ctx.out << "identification study: MDD " << num(st.mdd_rate()) << ", BIC " << num(st.bic_rate()) << '\n';
  }
  finish(ctx, m);
  return kExitOk;
}

int cmd_detrend(const Context& ctx) {
  Json m = base_manifest(ctx);
  const std::string input = ctx.cfg.input();
  if (input.empty()) throw ConfigError("'input' is required for detrend");
  const SeriesData data = load_csv(input);
  const int degree = ctx.cfg.detrend_degree();
  const DetrendResult dr = detrend(data, degree);
  write_csv(ctx.out_dir / "detrended.csv", dr.detrended);
  {
    auto out = open_out(ctx.out_dir / "trend_coefficients.csv");
    out << "series";
    for (int p = 0; p <= degree; ++p) out << ",c" << p;
    out << '\n';
    for (Eigen::Index a = 0; a < dr.coefficients.rows(); ++a) {
      out << csv_field(data.names[static_cast<std::size_t>(a)]);
      for (Eigen::Index p = 0; p < dr.coefficients.cols(); ++p) out << ',' << num(dr.coefficients(a, p));
      out << '\n';
    }
  }
  m["input"] = Json{{"path", input}, {"T", data.T()}, {"n", data.n()}, {"names", data.names}};
  m["deviations"] = {"detrend: time normalized to tau = t / (T - 1) in [0, 1]; residuals match a raw-time fit"};
  m["outputs"] = {"detrended.csv", "trend_coefficients.csv"};
  finish(ctx, m);
  return kExitOk;
}

void error_record(std::ostream& err, const char* kind, const std::string& message, int code) {
  err << Json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump() << '\n';
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian estimation of mixed causal-noncausal (V)MAR models by tempered SMC", "marsmc"};
  app.set_version_flag("--version", std::string(MARSMC_VERSION));
  app.require_subcommand(1);

  struct Options {
    std::string config;
    std::vector<std::string> sets;
    bool progress = false;
  } opt;
  const char* commands[][2] = {
      {"simulate", "Simulate a path from a DGP"},
      {"estimate", "Estimate one model by SMC"},
      {"select", "Run the candidate grid and rank by MDD and BIC"},
      {"mc", "Monte Carlo estimation or identification study"},
      {"detrend", "Remove a polynomial trend from each series"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("-c,--config", opt.config, "JSON config file (a manifest.json also works)")->check(CLI::ExistingFile);
    sub->add_option("-s,--set", opt.sets, "Override a config field: dotted.key=value");
    sub->add_flag("--progress", opt.progress, "Report per-stage progress on stderr");
  }

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  Context ctx;
  ctx.command = app.get_subcommands().front()->get_name();
  ctx.progress = opt.progress;
  ctx.out = &out;
  ctx.err = &err;
  try {
    ctx.cfg = opt.config.empty() ? RunConfig{} : RunConfig::from_file(opt.config);
    for (const auto& s : opt.sets) ctx.cfg.set(s);
    ctx.cfg.validate(ctx.command);
    env_threads();
    ctx.out_dir = ctx.cfg.output_dir();
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec) throw DataError("cannot create output directory '" + ctx.out_dir.string() + "': " + ec.message());

    if (ctx.command == "simulate") return cmd_simulate(ctx);
    if (ctx.command == "estimate") return cmd_estimate(ctx);
    if (ctx.command == "select") return cmd_select(ctx);
    if (ctx.command == "mc") return cmd_mc(ctx);
    return cmd_detrend(ctx);
  } catch (const ConfigError& e) {
    error_record(err, "config", e.what(), kExitConfig);
    return kExitConfig;
  } catch (const ModelError& e) {
    error_record(err, "config", e.what(), kExitConfig);
    return kExitConfig;
  } catch (const DataError& e) {
    error_record(err, "data", e.what(), kExitData);
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    error_record(err, "io", e.what(), kExitData);
    return kExitData;
  } catch (const std::ios_base::failure& e) {
    error_record(err, "io", e.what(), kExitData);
    return kExitData;
  } catch (const SamplerError& e) {
    error_record(err, "sampler", e.what(), kExitSampler);
    return kExitSampler;
  } catch (const std::exception& e) {
    error_record(err, "internal", e.what(), kExitSampler);
    return kExitSampler;
  }
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace marsmc::pipeline
