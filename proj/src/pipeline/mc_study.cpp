#include "marsmc/pipeline/mc_study.hpp"

#include <omp.h>

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>

#include "marsmc/errors.hpp"
#include "marsmc/likelihood.hpp"
#include "marsmc/rng.hpp"

namespace marsmc::pipeline {
namespace {

// Runs body(b) for b in [0, B); body must not throw.
template <typename Body>
void for_replications(std::size_t B, int workers, Body body) {
  const long long count = static_cast<long long>(B);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers > 0 ? workers : omp_get_max_threads())
  for (long long b = 0; b < count; ++b) body(static_cast<std::size_t>(b));
}

SmcConfig replica_config(const SmcConfig& smc, std::size_t b) {
  SmcConfig cfg = smc;
  cfg.seed = mix_seed(smc.seed, b);
  cfg.workers = 1;
  return cfg;
}

DgpSpec replica_dgp(const DgpSpec& dgp, std::size_t b) {
  DgpSpec d = dgp;
  d.seed = mix_seed(dgp.seed, b);
  return d;
}

}  // namespace

EstimateSummary summarize_estimates(const Eigen::MatrixXd& estimates, const Eigen::MatrixXd& sds,
                                    const Eigen::VectorXd& truth) {
  if (estimates.rows() != truth.size() || sds.rows() != truth.size() || sds.cols() != estimates.cols())
    throw ModelError("summarize_estimates: dimension mismatch");
  if (estimates.cols() == 0) throw ModelError("summarize_estimates: no replications");
  const double B = static_cast<double>(estimates.cols());
  EstimateSummary s;
  s.truth = truth;
  s.mean = estimates.rowwise().sum() / B;
  s.variance = (estimates.colwise() - s.mean).array().square().rowwise().sum() / B;
  s.mean_sd = sds.rowwise().sum() / B;
  const Eigen::MatrixXd err = estimates.colwise() - truth;
  s.bias = err.rowwise().sum() / B;
  s.rmse = (err.array().square().rowwise().sum() / B).sqrt();
  return s;
}

double IdentificationStudy::mdd_rate() const {
  if (successes() == 0) return 0.0;
  for (const auto& c : counts)
    if (c.spec == truth) return static_cast<double>(c.by_mdd) / static_cast<double>(successes());
  return 0.0;
}

double IdentificationStudy::bic_rate() const {
  if (successes() == 0) return 0.0;
  for (const auto& c : counts)
    if (c.spec == truth) return static_cast<double>(c.by_bic) / static_cast<double>(successes());
  return 0.0;
}

EstimationStudy mc_estimation(const DgpSpec& dgp, std::size_t replications, const SmcConfig& smc,
                              const PriorConfig& prior, const ProgressFn& progress) {
  if (replications < 1) throw ModelError("mc_estimation: replications must be >= 1");
  dgp.validate();
  smc.validate();
  prior.validate(dgp.model.n);

  const std::size_t k = dgp.model.num_params();
  EstimationStudy study;
  study.spec = dgp.model;
  study.names = param_names(dgp.model);
  study.replications.resize(replications);
  Eigen::MatrixXd est(k, replications), sd(k, replications);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mu;

  for_replications(replications, smc.workers, [&](std::size_t b) {
    ReplicationRecord& rec = study.replications[b];
    rec.index = b;
    const DgpSpec d = replica_dgp(dgp, b);
    const SmcConfig cfg = replica_config(smc, b);
    rec.data_seed = d.seed;
    rec.smc_seed = cfg.seed;
    try {
      PosteriorKernel kernel(dgp.model, simulate_path(d), prior);
      const SmcRunResult res = run(kernel, cfg);
      est.col(static_cast<Eigen::Index>(b)) = res.posterior_mean;
      sd.col(static_cast<Eigen::Index>(b)) = res.posterior_sd;
      rec.log_mdd = res.log_mdd;
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.failure = e.what();
    }
    const std::size_t n_done = ++done;
    if (progress) {
      std::lock_guard lock(progress_mu);
      progress(n_done, replications);
    }
  });

  std::vector<Eigen::Index> ok;
  for (const auto& rec : study.replications) {
    if (rec.ok) {
      ok.push_back(static_cast<Eigen::Index>(rec.index));
    } else {
      ++study.failures;
    }
  }
  if (ok.empty()) throw SamplerError("mc_estimation: every replication failed: " + study.replications[0].failure);
  Eigen::MatrixXd est_ok(k, ok.size()), sd_ok(k, ok.size());
  for (std::size_t j = 0; j < ok.size(); ++j) {
    est_ok.col(static_cast<Eigen::Index>(j)) = est.col(ok[j]);
    sd_ok.col(static_cast<Eigen::Index>(j)) = sd.col(ok[j]);
  }
  study.summary = summarize_estimates(est_ok, sd_ok, dgp.params.theta);
  return study;
}

IdentificationStudy mc_identification(const DgpSpec& dgp, std::size_t replications,
                                      const CandidateGrid& grid, const SmcConfig& smc,
                                      const PriorConfig& prior, const ProgressFn& progress) {
  if (replications < 1) throw ModelError("mc_identification: replications must be >= 1");
  dgp.validate();
  smc.validate();
  grid.validate();
  prior.validate(dgp.model.n);

  IdentificationStudy study;
  study.truth = dgp.model;
  for (const auto& spec : grid.specs(dgp.model.n)) study.counts.push_back({spec, 0, 0});
  study.replications.resize(replications);
  std::vector<std::size_t> pick_mdd(replications), pick_bic(replications);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mu;

  for_replications(replications, smc.workers, [&](std::size_t b) {
    ReplicationRecord& rec = study.replications[b];
    rec.index = b;
    const DgpSpec d = replica_dgp(dgp, b);
    const SmcConfig cfg = replica_config(smc, b);
    rec.data_seed = d.seed;
    rec.smc_seed = cfg.seed;
    try {
      const SelectionReport report = select_model(simulate_path(d), grid, cfg, prior);
      pick_mdd[b] = report.best_by_mdd;
      pick_bic[b] = report.best_by_bic;
      rec.best_by_mdd = report.candidates[report.best_by_mdd].spec.label();
      rec.best_by_bic = report.candidates[report.best_by_bic].spec.label();
      rec.log_mdd = report.candidates[report.best_by_mdd].log_mdd;
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.failure = e.what();
    }
    const std::size_t n_done = ++done;
    if (progress) {
      std::lock_guard lock(progress_mu);
      progress(n_done, replications);
    }
  });

  for (std::size_t b = 0; b < replications; ++b) {
    if (!study.replications[b].ok) {
      ++study.failures;
      continue;
    }
    ++study.counts[pick_mdd[b]].by_mdd;
    ++study.counts[pick_bic[b]].by_bic;
  }
  return study;
}

}  // namespace marsmc::pipeline
