#include "marsmc/smc.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <string>

#include "marsmc/errors.hpp"
#include "marsmc/likelihood.hpp"

namespace marsmc {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kVarianceFloor = 1e-12;

int worker_count(const SmcConfig& cfg) { return cfg.workers > 0 ? cfg.workers : omp_get_max_threads(); }

// Runs body(i) for i in [0, count) on `workers` threads; rethrows the first exception.
template <typename Body>
void parallel_for(std::size_t count, int workers, Body&& body) {
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto total = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(static) num_threads(workers)
  for (std::int64_t i = 0; i < total; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

void SmcConfig::validate() const {
  if (particles < 2) throw ConfigError("smc.particles must be >= 2");
  if (stages < 2) throw ConfigError("smc.stages must be >= 2");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("smc.lambda must be > 0");
  if (mutation_steps < 1) throw ConfigError("smc.mutation_steps must be >= 1");
  if (!(ess_fraction > 0.0 && ess_fraction <= 1.0)) throw ConfigError("smc.ess_fraction must lie in (0, 1]");
  if (!(target_accept > 0.0 && target_accept < 1.0)) throw ConfigError("smc.target_accept must lie in (0, 1)");
  if (!(initial_scale >= 0.0) || !std::isfinite(initial_scale)) throw ConfigError("smc.initial_scale must be >= 0");
  if (workers < 0) throw ConfigError("smc.workers must be >= 0");
}

double tempering_schedule(std::size_t m, std::size_t M, double lambda) {
  if (M < 2 || m < 1 || m > M) throw ConfigError("stage index out of range");
  if (m == M) return 1.0;
  return std::pow(static_cast<double>(m - 1) / static_cast<double>(M - 1), lambda);
}

ParticleCloud initialize(const Target& target, const SmcConfig& cfg) {
  const std::size_t P = cfg.particles;
  const std::size_t k = target.dimension();
  ParticleCloud cloud;
  cloud.params.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(P));
  cloud.weights = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(P));
  cloud.logliks.resize(static_cast<Eigen::Index>(P));
  cloud.logpriors.resize(static_cast<Eigen::Index>(P));
  cloud.stage = 1;
  cloud.rho = 0.0;
  parallel_for(P, worker_count(cfg), [&](std::size_t i) {
    auto rng = make_stream(cfg.seed, Stream::PriorInit, static_cast<std::uint32_t>(i));
    const auto idx = static_cast<Eigen::Index>(i);
    std::span<double> theta(cloud.params.col(idx).data(), k);
    target.sample_prior(rng, theta);
    cloud.logpriors(idx) = target.log_prior(theta);
    cloud.logliks(idx) = target.log_likelihood(theta);
  });
  return cloud;
}

double correction(ParticleCloud& cloud, double next_rho) {
  const double delta = next_rho - cloud.rho;
  if (delta < 0.0) throw SamplerError("tempering exponent must not decrease");
  const Eigen::Index P = cloud.weights.size();
  cloud.rho = next_rho;
  ++cloud.stage;
  if (delta == 0.0) return 0.0;

  // log(w~_i W_i): the tempered log-likelihood is centred before log W is added,
  // so large |loglik| does not swamp the weights
  Eigen::VectorXd logw(P);
  double centre = kNegInf;
  for (Eigen::Index i = 0; i < P; ++i) {
    const double ll = cloud.logliks(i);
    const bool live = cloud.weights(i) > 0.0 && ll != kNegInf && !std::isnan(ll);
    logw(i) = live ? delta * ll : kNegInf;
    centre = std::max(centre, logw(i));
  }
  if (centre == kNegInf || std::isnan(centre) || centre == std::numeric_limits<double>::infinity())
    throw SamplerError("total weight degeneracy at stage " + std::to_string(cloud.stage) +
                       ": all incremental weights are zero");
  double shift = kNegInf;
  for (Eigen::Index i = 0; i < P; ++i) {
    if (logw(i) != kNegInf) logw(i) = (logw(i) - centre) + std::log(cloud.weights(i));
    shift = std::max(shift, logw(i));
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < P; ++i) {
    logw(i) = std::exp(logw(i) - shift);
    sum += logw(i);
  }
  const double mean = sum / static_cast<double>(P);
  cloud.weights = logw / mean;
  return centre + shift + std::log(mean);
}

double ess(const Eigen::VectorXd& weights) {
  const double P = static_cast<double>(weights.size());
  return P / (weights.squaredNorm() / P);
}

bool selection(ParticleCloud& cloud, const SmcConfig& cfg, CounterRng& rng) {
  const std::size_t P = cloud.size();
  if (!(ess(cloud.weights) < cfg.ess_fraction * static_cast<double>(P))) return false;

  std::vector<double> cumulative(P);
  double acc = 0.0;
  for (std::size_t i = 0; i < P; ++i) {
    acc += cloud.weights(static_cast<Eigen::Index>(i));
    cumulative[i] = acc;
  }
  std::vector<double> u(P);
  for (double& v : u) v = rng.uniform() * acc;
  std::sort(u.begin(), u.end());

  std::vector<Eigen::Index> ancestors(P);
  std::size_t j = 0;
  for (std::size_t i = 0; i < P; ++i) {
    while (j + 1 < P && cumulative[j] <= u[i]) ++j;
    ancestors[i] = static_cast<Eigen::Index>(j);
  }
  ParticleCloud next = cloud;
  for (std::size_t i = 0; i < P; ++i) {
    const auto dst = static_cast<Eigen::Index>(i);
    next.params.col(dst) = cloud.params.col(ancestors[i]);
    next.logliks(dst) = cloud.logliks(ancestors[i]);
    next.logpriors(dst) = cloud.logpriors(ancestors[i]);
  }
  next.weights.setOnes();
  cloud = std::move(next);
  return true;
}

Eigen::VectorXd weighted_mean(const ParticleCloud& cloud) {
  return cloud.params * cloud.weights / static_cast<double>(cloud.size());
}

Eigen::VectorXd weighted_sd(const ParticleCloud& cloud) {
  const Eigen::VectorXd mean = weighted_mean(cloud);
  const Eigen::MatrixXd centered = cloud.params.colwise() - mean;
  return (centered.array().square().matrix() * cloud.weights / static_cast<double>(cloud.size()))
      .cwiseMax(0.0)
      .cwiseSqrt();
}

ProposalFactor proposal_factor(const ParticleCloud& cloud) {
  const Eigen::Index k = cloud.params.rows();
  const double P = static_cast<double>(cloud.size());
  const Eigen::VectorXd mean = weighted_mean(cloud);
  const Eigen::MatrixXd centered = cloud.params.colwise() - mean;
  const Eigen::MatrixXd cov = centered * cloud.weights.asDiagonal() * centered.transpose() / P;

  ProposalFactor out;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  bool ok = llt.info() == Eigen::Success && cov.allFinite();
  if (ok) {
    out.factor = llt.matrixL();
    for (Eigen::Index i = 0; i < k; ++i)
      if (!(out.factor(i, i) > std::sqrt(kVarianceFloor) * 1e-3)) ok = false;
  }
  if (!ok) {
    out.factor = cov.diagonal().cwiseMax(kVarianceFloor).cwiseSqrt().asDiagonal();
    out.diagonal_fallback = true;
  }
  return out;
}

double mutation(ParticleCloud& cloud, const Target& target, const SmcConfig& cfg,
                const ProposalFactor& proposal, double scale) {
  const std::size_t P = cloud.size();
  const std::size_t k = cloud.dim();
  const double rho = cloud.rho;
  std::vector<std::uint32_t> accepted(P, 0);
  parallel_for(P, worker_count(cfg), [&](std::size_t i) {
    const auto idx = static_cast<Eigen::Index>(i);
    Eigen::VectorXd current = cloud.params.col(idx);
    double lp = cloud.logpriors(idx);
    double ll = cloud.logliks(idx);
    Eigen::VectorXd z(static_cast<Eigen::Index>(k));
    Eigen::VectorXd candidate(static_cast<Eigen::Index>(k));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t step = 0; step < cfg.mutation_steps; ++step) {
      auto rng = make_stream(cfg.seed, Stream::Mutation, static_cast<std::uint32_t>(i),
                             static_cast<std::uint32_t>(cloud.stage), static_cast<std::uint32_t>(step));
      for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = normal(rng);
      const double log_u = std::log(rng.uniform());
      candidate.noalias() = current + scale * (proposal.factor * z);
      const std::span<const double> cand(candidate.data(), k);
      const double lp_new = target.log_prior(cand);
      if (lp_new == kNegInf) continue;
      const double ll_new = target.log_likelihood(cand);
      if (ll_new == kNegInf || std::isnan(ll_new)) continue;
      const double log_ratio = (rho == 0.0 ? 0.0 : rho * (ll_new - ll)) + (lp_new - lp);
      if (log_u < log_ratio) {
        current = candidate;
        lp = lp_new;
        ll = ll_new;
        ++accepted[i];
      }
    }
    cloud.params.col(idx) = current;
    cloud.logpriors(idx) = lp;
    cloud.logliks(idx) = ll;
  });
  const double total = std::accumulate(accepted.begin(), accepted.end(), 0.0);
  return total / static_cast<double>(P * cfg.mutation_steps);
}

double adapt_scale(double scale, double acceptance, double target) {
  const double e = std::exp(16.0 * (acceptance - target));
  const double logistic = std::isinf(e) ? 1.0 : e / (1.0 + e);
  return scale * (0.95 + 0.10 * logistic);
}

SmcRunResult run(const Target& target, const SmcConfig& cfg, const RunHooks& hooks) {
  cfg.validate();
  SmcRunResult result;
  result.stages.reserve(cfg.stages);

  ParticleCloud cloud = initialize(target, cfg);
  {
    StageDiagnostics d;
    d.stage = 1;
    d.rho = 0.0;
    d.ess = ess(cloud.weights);
    d.acceptance = std::numeric_limits<double>::quiet_NaN();
    d.scale = cfg.initial_scale;
    result.stages.push_back(d);
    if (hooks.on_stage) hooks.on_stage(d);
    if (hooks.on_checkpoint) hooks.on_checkpoint(cloud);
  }

  double scale = cfg.initial_scale;
  double log_mdd = 0.0;
  for (std::size_t m = 2; m <= cfg.stages; ++m) {
    StageDiagnostics d;
    d.stage = m;
    d.rho = tempering_schedule(m, cfg.stages, cfg.lambda);
    d.log_increment = correction(cloud, d.rho);
    log_mdd += d.log_increment;
    d.ess = ess(cloud.weights);

    const ProposalFactor proposal = proposal_factor(cloud);
    d.diagonal_fallback = proposal.diagonal_fallback;

    auto resample_rng = make_stream(cfg.seed, Stream::Resample, static_cast<std::uint32_t>(m));
    d.resampled = selection(cloud, cfg, resample_rng);

    d.scale = scale;
    d.acceptance = mutation(cloud, target, cfg, proposal, scale);
    scale = adapt_scale(scale, d.acceptance, cfg.target_accept);

    result.stages.push_back(d);
    if (hooks.on_stage) hooks.on_stage(d);
    if (hooks.on_checkpoint) hooks.on_checkpoint(cloud);
  }

  result.log_mdd = log_mdd;
  result.posterior_mean = weighted_mean(cloud);
  result.posterior_sd = weighted_sd(cloud);
  Eigen::Index best = 0;
  double best_kernel = kNegInf;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(cloud.size()); ++i) {
    const double value = cloud.logliks(i) + cloud.logpriors(i);
    if (value > best_kernel) {
      best_kernel = value;
      best = i;
    }
  }
  result.map_params = cloud.params.col(best);
  result.map_log_kernel = best_kernel;
  result.map_loglik = cloud.logliks(best);
  result.final_cloud = std::move(cloud);
  return result;
}

}  // namespace marsmc
