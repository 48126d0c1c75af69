#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "marsmc/model.hpp"
#include "marsmc/rng.hpp"

namespace marsmc {

/// Hyperparameters. Causal lag i has prior variance causal_var_scale / i, noncausal
/// lead q has noncausal_var_scale / q (Minnesota-type shrinkage).
struct PriorConfig {
  double causal_var_scale = 2.0;
  double noncausal_var_scale = 2.0;
  double wishart_scale = 5.0;  // Psi_0 = c I_n
  double wishart_df = 3.0;
  double nu_mean = 5.0;        // exponential prior on nu, mean parameterization
  double nu_max = 100.0;
  double skew_var = 3.0;
  double log_scale_var = 10.0;  // n = 1: log sigma ~ N(0, log_scale_var)

  void validate(int n) const;
};

/// Additive pieces of the log prior, exposed for diagnostics and tests.
struct PriorTerms {
  double causal = 0.0;
  double noncausal = 0.0;
  double scale = 0.0;
  double dof = 0.0;
  double skew = 0.0;
  bool in_support = true;

  double total() const;
};

PriorTerms log_prior_terms(const ModelSpec& spec, std::span<const double> theta, const PriorConfig& cfg);

/// Log prior density; -infinity outside the support (nonstationary, non-SPD Sigma,
/// nu outside (2, nu_max], univariate alpha <= 0). The stationarity truncation is
/// not renormalized.
double log_prior(const ModelSpec& spec, std::span<const double> theta, const PriorConfig& cfg);

/// Rejection budget per draw for the stationarity truncation.
inline constexpr std::size_t kPriorRejectionBudget = 1'000'000;

/// One draw from the truncated prior into `out`. Throws SamplerError when the
/// rejection budget is exhausted. Returns the number of stationarity attempts.
std::size_t sample_prior_into(const ModelSpec& spec, const PriorConfig& cfg, CounterRng& rng,
                              std::span<double> out);

std::vector<ParamVector> sample_prior(const ModelSpec& spec, const PriorConfig& cfg, std::size_t count,
                                      CounterRng& rng);

/// Mean of nu under the truncated exponential prior on (2, nu_max].
double prior_nu_mean(const PriorConfig& cfg);

}  // namespace marsmc
