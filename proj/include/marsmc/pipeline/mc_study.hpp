#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "marsmc/priors.hpp"
#include "marsmc/select.hpp"
#include "marsmc/simulate.hpp"
#include "marsmc/smc.hpp"

namespace marsmc::pipeline {

/// Per-parameter summary of point estimates across replications.
struct EstimateSummary {
  Eigen::VectorXd truth;
  Eigen::VectorXd mean;      // average point estimate
  Eigen::VectorXd variance;  // (1/B) sum (est - mean)^2
  Eigen::VectorXd mean_sd;   // average posterior sd
  Eigen::VectorXd bias;      // (1/B) sum (est - truth)
  Eigen::VectorXd rmse;      // sqrt((1/B) sum (est - truth)^2)
};

/// `estimates` and `sds` are k x B (one replication per column).
EstimateSummary summarize_estimates(const Eigen::MatrixXd& estimates, const Eigen::MatrixXd& sds,
                                    const Eigen::VectorXd& truth);

struct ReplicationRecord {
  std::size_t index = 0;
  std::uint64_t data_seed = 0;
  std::uint64_t smc_seed = 0;
  bool ok = false;
  std::string failure;
  double log_mdd = 0.0;
  std::string best_by_mdd;
  std::string best_by_bic;
};

struct EstimationStudy {
  ModelSpec spec;
  std::vector<std::string> names;
  std::vector<ReplicationRecord> replications;
  EstimateSummary summary;  // over successful replications
  std::size_t failures = 0;
};

struct SelectionCount {
  ModelSpec spec;
  std::size_t by_mdd = 0;
  std::size_t by_bic = 0;
};

struct IdentificationStudy {
  ModelSpec truth;
  std::vector<SelectionCount> counts;  // candidate order
  std::vector<ReplicationRecord> replications;
  std::size_t failures = 0;
  std::size_t successes() const { return replications.size() - failures; }
  /// Share of successful replications that picked the true model.
  double mdd_rate() const;
  double bic_rate() const;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Replication b simulates with seed mix_seed(dgp.seed, b) and samples with
/// mix_seed(smc.seed, b). Replications run in parallel; each sampler is single-threaded.
EstimationStudy mc_estimation(const DgpSpec& dgp, std::size_t replications, const SmcConfig& smc,
                              const PriorConfig& prior, const ProgressFn& progress = {});

IdentificationStudy mc_identification(const DgpSpec& dgp, std::size_t replications,
                                      const CandidateGrid& grid, const SmcConfig& smc,
                                      const PriorConfig& prior, const ProgressFn& progress = {});

}  // namespace marsmc::pipeline
