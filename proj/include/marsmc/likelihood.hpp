#pragma once

#include <span>

#include "marsmc/model.hpp"
#include "marsmc/priors.hpp"
#include "marsmc/target.hpp"

namespace marsmc {

/// p(y | theta) p(theta) for a VMAR(r, s) model on a fixed sample. Read-only
/// after construction.
class PosteriorKernel final : public Target {
 public:
  PosteriorKernel(ModelSpec spec, SeriesData data, PriorConfig prior = {});

  const ModelSpec& spec() const { return spec_; }
  const SeriesData& data() const { return data_; }
  const PriorConfig& prior() const { return prior_; }
  /// Number of likelihood terms, T - r - s.
  std::size_t num_terms() const { return data_.T() - static_cast<std::size_t>(spec_.r + spec_.s); }

  std::size_t dimension() const override { return layout_.size; }
  double log_prior(std::span<const double> theta) const override;
  /// Sum over t = r+1 .. T-s of log p(u_t | theta); -infinity for non-SPD Sigma
  /// or invalid nu/alpha.
  double log_likelihood(std::span<const double> theta) const override;
  void sample_prior(CounterRng& rng, std::span<double> out) const override;
  std::vector<std::string> parameter_names() const override;

 private:
  ModelSpec spec_;
  SeriesData data_;
  PriorConfig prior_;
  ParamLayout layout_;
};

/// rho * log_likelihood + log_prior, with -infinity propagated; rho = 0 gives the
/// log prior exactly.
double log_tempered_kernel(const Target& kernel, std::span<const double> theta, double rho);

}  // namespace marsmc
