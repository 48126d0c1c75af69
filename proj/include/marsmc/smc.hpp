#pragma once

// Likelihood-tempered sequential Monte Carlo.
//
// Bridge densities pi_m(theta) ∝ p(y|theta)^rho_m p(theta), rho_m = ((m-1)/(M-1))^lambda.
// Stage 1 draws P particles from the prior with unit weights; stages 2..M run
// correction (reweight by the likelihood increment), selection (multinomial
// resampling when ESS < ess_fraction * P) and mutation (S random-walk
// Metropolis-Hastings steps targeting pi_m).
//
// Weights are kept normalized to mean one. The log marginal data density is the
// sum over stages of log((1/P) sum_i w~_m^i W_{m-1}^i).

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "marsmc/rng.hpp"
#include "marsmc/target.hpp"

namespace marsmc {

struct SmcConfig {
  std::size_t particles = 2000;
  std::size_t stages = 50;
  double lambda = 2.0;
  std::size_t mutation_steps = 1;
  double ess_fraction = 0.5;
  double target_accept = 0.25;
  double initial_scale = 0.3;
  std::uint64_t seed = 0;
  int workers = 0;  // 0: OpenMP default

  void validate() const;
};

double tempering_schedule(std::size_t m, std::size_t M, double lambda);

struct ParticleCloud {
  Eigen::MatrixXd params;  // k x P, one particle per column
  Eigen::VectorXd weights;
  Eigen::VectorXd logliks;
  Eigen::VectorXd logpriors;
  std::size_t stage = 1;
  double rho = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(params.cols()); }
  std::size_t dim() const { return static_cast<std::size_t>(params.rows()); }
};

struct StageDiagnostics {
  std::size_t stage = 1;
  double rho = 0.0;
  double ess = 0.0;
  bool resampled = false;
  double acceptance = 0.0;  // NaN at stage 1 (no mutation)
  double scale = 0.0;       // proposal scale used by this stage's mutation
  double log_increment = 0.0;
  bool diagonal_fallback = false;
};

struct SmcRunResult {
  ParticleCloud final_cloud;
  double log_mdd = 0.0;
  std::vector<StageDiagnostics> stages;
  Eigen::VectorXd posterior_mean;
  Eigen::VectorXd posterior_sd;
  Eigen::VectorXd map_params;
  double map_log_kernel = 0.0;
  double map_loglik = 0.0;
};

struct RunHooks {
  std::function<void(const StageDiagnostics&)> on_stage;
  std::function<void(const ParticleCloud&)> on_checkpoint;
};

/// Prior draws with unit weights; caches log prior and log likelihood.
ParticleCloud initialize(const Target& target, const SmcConfig& cfg);

/// Reweights to `next_rho` using the cached log-likelihoods and returns the
/// stage log increment. Throws SamplerError if every incremental weight vanishes.
double correction(ParticleCloud& cloud, double next_rho);

/// P / mean(W^2), for weights with mean one.
double ess(const Eigen::VectorXd& weights);

/// Multinomial resampling when ESS < ess_fraction * P; returns whether it fired.
bool selection(ParticleCloud& cloud, const SmcConfig& cfg, CounterRng& rng);

struct ProposalFactor {
  Eigen::MatrixXd factor;  // lower Cholesky factor of the weighted covariance
  bool diagonal_fallback = false;
};

/// Weighted particle covariance factor; falls back to per-coordinate weighted
/// variances (floored at 1e-12) when the covariance is singular.
ProposalFactor proposal_factor(const ParticleCloud& cloud);

/// S random-walk MH steps per particle targeting the cloud's current rho.
/// Proposal theta* = theta + scale * factor * z. Returns the acceptance rate.
/// Randomness: one stream per (particle, stage, step) derived from cfg.seed.
double mutation(ParticleCloud& cloud, const Target& target, const SmcConfig& cfg,
                const ProposalFactor& proposal, double scale);

/// Smooth multiplicative adaptation toward target acceptance:
/// scale * (0.95 + 0.10 * logistic(16 (acc - target))).
double adapt_scale(double scale, double acceptance, double target);

Eigen::VectorXd weighted_mean(const ParticleCloud& cloud);
Eigen::VectorXd weighted_sd(const ParticleCloud& cloud);

SmcRunResult run(const Target& target, const SmcConfig& cfg, const RunHooks& hooks = {});

}  // namespace marsmc
