#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "marsmc/likelihood.hpp"
#include "marsmc/model.hpp"
#include "marsmc/priors.hpp"
#include "marsmc/smc.hpp"

namespace marsmc {

struct CandidateGrid {
  std::vector<std::pair<int, int>> orders;
  std::vector<ErrorDist> dists;

  /// (1,0) (0,1) (2,0) (1,1) (0,2) (2,1) (1,2) x {Cauchy, StudentT, SkewedT}: 21 models.
  static CandidateGrid standard();
  void validate() const;
  /// Candidates in report order: distributions outer, orders inner.
  std::vector<ModelSpec> specs(int n) const;
};

struct CandidateResult {
  ModelSpec spec;
  bool ok = false;
  std::string failure;
  double log_mdd = 0.0;
  double bic = 0.0;
  double map_loglik = 0.0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
};

struct SelectionReport {
  std::vector<CandidateResult> candidates;
  std::size_t best_by_mdd = 0;
  std::size_t best_by_bic = 0;

  /// 1-based ranks among successful candidates; 0 for failed ones.
  std::vector<std::size_t> mdd_ranks() const;
  std::vector<std::size_t> bic_ranks() const;
};

/// -2 loglik + k log(num_terms).
double bic(double loglik, std::size_t k, std::size_t num_terms);
/// BIC at the MAP particle of the final cloud, penalty with T - r - s terms.
double bic(const PosteriorKernel& kernel, const SmcRunResult& result);

/// Runs the sampler for every candidate; candidate i uses seed mix_seed(cfg.seed, i).
/// Failed candidates are kept with a failure marker and excluded from ranking.
/// Throws SamplerError if every candidate fails.
SelectionReport select_model(const SeriesData& data, const CandidateGrid& grid, const SmcConfig& smc,
                             const PriorConfig& prior);

}  // namespace marsmc
