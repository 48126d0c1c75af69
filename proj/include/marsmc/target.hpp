#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "marsmc/rng.hpp"

namespace marsmc {

/// Posterior target for the tempered sampler: a prior we can draw from and
/// evaluate, and a log-likelihood. Implementations must be safe to call
/// concurrently from several threads.
class Target {
 public:
  virtual ~Target() = default;

  virtual std::size_t dimension() const = 0;
  /// -infinity outside the prior support.
  virtual double log_prior(std::span<const double> theta) const = 0;
  virtual double log_likelihood(std::span<const double> theta) const = 0;
  virtual void sample_prior(CounterRng& rng, std::span<double> out) const = 0;
  virtual std::vector<std::string> parameter_names() const;
};

}  // namespace marsmc
