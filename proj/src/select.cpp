#include "marsmc/select.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "marsmc/errors.hpp"

namespace marsmc {

CandidateGrid CandidateGrid::standard() {
  return {{{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}, {2, 1}, {1, 2}},
          {ErrorDist::Cauchy, ErrorDist::StudentT, ErrorDist::SkewedT}};
}

void CandidateGrid::validate() const {
  if (orders.empty() || dists.empty()) throw ConfigError("candidate grid must not be empty");
  for (const auto& [r, s] : orders)
    if (r < 0 || s < 0 || r + s < 1) throw ConfigError("candidate orders need r, s >= 0 and r + s >= 1");
}

std::vector<ModelSpec> CandidateGrid::specs(int n) const {
  std::vector<ModelSpec> out;
  for (ErrorDist d : dists)
    for (const auto& [r, s] : orders) out.push_back(ModelSpec{n, r, s, d});
  return out;
}

namespace {

std::vector<std::size_t> ranks_by(const std::vector<CandidateResult>& c, bool higher_is_better) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i].ok) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return higher_is_better ? c[a].log_mdd > c[b].log_mdd : c[a].bic < c[b].bic;
  });
  std::vector<std::size_t> ranks(c.size(), 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos) ranks[order[pos]] = pos + 1;
  return ranks;
}

}  // namespace

std::vector<std::size_t> SelectionReport::mdd_ranks() const { return ranks_by(candidates, true); }
std::vector<std::size_t> SelectionReport::bic_ranks() const { return ranks_by(candidates, false); }

double bic(double loglik, std::size_t k, std::size_t num_terms) {
  return -2.0 * loglik + static_cast<double>(k) * std::log(static_cast<double>(num_terms));
}

double bic(const PosteriorKernel& kernel, const SmcRunResult& result) {
  const double ll = kernel.log_likelihood(
      std::span<const double>(result.map_params.data(), static_cast<std::size_t>(result.map_params.size())));
  return bic(ll, kernel.dimension(), kernel.num_terms());
}

SelectionReport select_model(const SeriesData& data, const CandidateGrid& grid, const SmcConfig& smc,
                             const PriorConfig& prior) {
  grid.validate();
  smc.validate();
  SelectionReport report;
  const auto specs = grid.specs(data.n());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    CandidateResult c;
    c.spec = specs[i];
    c.k = specs[i].num_params();
    c.seed = mix_seed(smc.seed, i);
    const auto start = std::chrono::steady_clock::now();
    try {
      PosteriorKernel kernel(specs[i], data, prior);
      SmcConfig cfg = smc;
      cfg.seed = c.seed;
      const SmcRunResult res = run(kernel, cfg);
      c.log_mdd = res.log_mdd;
      c.map_loglik = res.map_loglik;
      c.bic = bic(kernel, res);
      c.ok = std::isfinite(c.log_mdd) && std::isfinite(c.bic);
      if (!c.ok) c.failure = "non-finite log MDD or BIC";
    } catch (const std::exception& e) {
      c.ok = false;
      c.failure = e.what();
    }
    c.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.candidates.push_back(std::move(c));
  }
  const auto mdd = report.mdd_ranks();
  const auto bics = report.bic_ranks();
  bool any = false;
  for (std::size_t i = 0; i < mdd.size(); ++i) {
    if (mdd[i] == 1) report.best_by_mdd = i;
    if (bics[i] == 1) report.best_by_bic = i;
    any = any || mdd[i] > 0;
  }
  if (!any) throw SamplerError("model selection failed: every candidate run failed");
  return report;
}

}  // namespace marsmc
