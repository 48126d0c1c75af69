#include "marsmc/priors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "marsmc/errors.hpp"

namespace marsmc {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kNuMin = 2.0;

double log_normal_iid(std::span<const double> x, double var) {
  double ss = 0.0;
  for (double v : x) ss += v * v;
  return -0.5 * static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi * var) - 0.5 * ss / var;
}

double log_multigamma(int p, double a) {
  double out = 0.25 * p * (p - 1) * std::log(std::numbers::pi);
  for (int j = 1; j <= p; ++j) out += std::lgamma(a + 0.5 * (1 - j));
  return out;
}

// exponential with mean nu_mean truncated to (2, nu_max]
double log_trunc_exp(double nu, const PriorConfig& cfg) {
  const double rate = 1.0 / cfg.nu_mean;
  const double mass = std::exp(-rate * kNuMin) - std::exp(-rate * cfg.nu_max);
  return std::log(rate) - rate * nu - std::log(mass);
}

double log_inverse_wishart(const Eigen::MatrixXd& sigma, const Eigen::LLT<Eigen::MatrixXd>& llt,
                           const PriorConfig& cfg) {
  const int n = static_cast<int>(sigma.rows());
  const double df = cfg.wishart_df;
  const double c = cfg.wishart_scale;
  double log_det = 0.0;
  const Eigen::MatrixXd L = llt.matrixL();
  for (int i = 0; i < n; ++i) log_det += 2.0 * std::log(L(i, i));
  // tr(Psi0 Sigma^-1) = c tr(Sigma^-1)
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  const double trace = c * inv.trace();
  return 0.5 * df * n * std::log(c) - 0.5 * df * n * std::numbers::ln2 - log_multigamma(n, 0.5 * df) -
         0.5 * (df + n + 1) * log_det - 0.5 * trace;
}

void draw_normal_block(std::span<double> out, double var, CounterRng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(var));
  for (double& v : out) v = normal(rng);
}

}  // namespace

void PriorConfig::validate(int n) const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("prior.") + what + " must be > 0");
  };
  positive(causal_var_scale, "causal_var_scale");
  positive(noncausal_var_scale, "noncausal_var_scale");
  positive(wishart_scale, "wishart_scale");
  positive(nu_mean, "nu_mean");
  positive(skew_var, "skew_var");
  positive(log_scale_var, "log_scale_var");
  if (!(wishart_df > n - 1)) throw ConfigError("prior.wishart_df must exceed n - 1");
  if (!(nu_max > kNuMin)) throw ConfigError("prior.nu_max must exceed 2");
}

double PriorTerms::total() const {
  if (!in_support) return kNegInf;
  return causal + noncausal + scale + dof + skew;
}

PriorTerms log_prior_terms(const ModelSpec& spec, std::span<const double> theta, const PriorConfig& cfg) {
  const ParamLayout layout = ParamLayout::for_spec(spec);
  PriorTerms terms;
  if (theta.size() != layout.size || !is_stationary(spec, theta)) {
    terms.in_support = false;
    return terms;
  }
  const int n = spec.n;
  const std::size_t nn = static_cast<std::size_t>(n * n);
  for (int i = 1; i <= spec.r; ++i)
    terms.causal += log_normal_iid(theta.subspan(layout.psi + (i - 1) * nn, nn), cfg.causal_var_scale / i);
  for (int q = 1; q <= spec.s; ++q)
    terms.noncausal += log_normal_iid(theta.subspan(layout.phi + (q - 1) * nn, nn), cfg.noncausal_var_scale / q);

  if (n == 1) {
    const double sigma2 = theta[layout.scale];
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
      terms.in_support = false;
      return terms;
    }
    // log sigma ~ N(0, v); density of sigma^2 carries the Jacobian 1 / (2 sigma^2)
    const double log_sigma = 0.5 * std::log(sigma2);
    terms.scale = -0.5 * std::log(2.0 * std::numbers::pi * cfg.log_scale_var) -
                  0.5 * log_sigma * log_sigma / cfg.log_scale_var - std::log(2.0 * sigma2);
  } else {
    const ModelParams p = decode_params(spec, theta);
    const Eigen::LLT<Eigen::MatrixXd> llt(p.sigma);
    if (llt.info() != Eigen::Success || !p.sigma.allFinite()) {
      terms.in_support = false;
      return terms;
    }
    const Eigen::MatrixXd L = llt.matrixL();
    for (int i = 0; i < n; ++i)
      if (!(L(i, i) > 0.0)) {
        terms.in_support = false;
        return terms;
      }
    terms.scale = log_inverse_wishart(p.sigma, llt, cfg);
  }

  if (layout.nu) {
    const double nu = theta[*layout.nu];
    if (!(nu > kNuMin && nu <= cfg.nu_max)) {
      terms.in_support = false;
      return terms;
    }
    terms.dof = log_trunc_exp(nu, cfg);
  }
  if (layout.alpha) {
    const auto alpha = theta.subspan(*layout.alpha, static_cast<std::size_t>(n));
    if (n == 1) {
      // alpha > 0: half-normal
      if (!(alpha[0] > 0.0)) {
        terms.in_support = false;
        return terms;
      }
      terms.skew = std::numbers::ln2 + log_normal_iid(alpha, cfg.skew_var);
    } else {
      terms.skew = log_normal_iid(alpha, cfg.skew_var);
    }
  }
  return terms;
}

double log_prior(const ModelSpec& spec, std::span<const double> theta, const PriorConfig& cfg) {
  return log_prior_terms(spec, theta, cfg).total();
}

double prior_nu_mean(const PriorConfig& cfg) {
  // E[nu | 2 < nu <= b] for rate l = 1/mean
  const double l = 1.0 / cfg.nu_mean;
  const double a = kNuMin;
  const double b = cfg.nu_max;
  const double ea = std::exp(-l * a);
  const double eb = std::exp(-l * b);
  return ((a + 1.0 / l) * ea - (b + 1.0 / l) * eb) / (ea - eb);
}

std::size_t sample_prior_into(const ModelSpec& spec, const PriorConfig& cfg, CounterRng& rng,
                              std::span<double> out) {
  const ParamLayout layout = ParamLayout::for_spec(spec);
  if (out.size() != layout.size) throw ModelError("output span has the wrong size");
  const int n = spec.n;
  const std::size_t nn = static_cast<std::size_t>(n * n);

  std::size_t attempts = 0;
  auto draw_polynomial = [&](std::size_t offset, int order, double var_scale, const char* what) {
    if (order == 0) return;
    const auto blocks = out.subspan(offset, nn * static_cast<std::size_t>(order));
    for (std::size_t tries = 0;; ++tries) {
      if (tries >= kPriorRejectionBudget)
        throw SamplerError(std::string("prior rejection budget exceeded for the ") + what + " polynomial");
      for (int i = 1; i <= order; ++i)
        draw_normal_block(blocks.subspan((i - 1) * nn, nn), var_scale / i, rng);
      ++attempts;
      if (companion_spectral_radius(blocks, n, order) < 1.0 - kStationarityMargin) return;
    }
  };
  draw_polynomial(layout.psi, spec.r, cfg.causal_var_scale, "causal");
  draw_polynomial(layout.phi, spec.s, cfg.noncausal_var_scale, "noncausal");

  if (n == 1) {
    std::normal_distribution<double> normal(0.0, std::sqrt(cfg.log_scale_var));
    out[layout.scale] = std::exp(2.0 * normal(rng));
  } else {
    // Bartlett: Sigma^-1 ~ W(Psi0^-1, df), Psi0^-1 = I / c
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
      std::chi_squared_distribution<double> chi2(cfg.wishart_df - i);
      A(i, i) = std::sqrt(chi2(rng));
      for (int j = 0; j < i; ++j) A(i, j) = normal(rng);
    }
    const Eigen::MatrixXd precision = (A * A.transpose()) / cfg.wishart_scale;
    Eigen::MatrixXd sigma = precision.llt().solve(Eigen::MatrixXd::Identity(n, n));
    sigma = 0.5 * (sigma + sigma.transpose());
    std::size_t pos = layout.scale;
    for (int col = 0; col < n; ++col)
      for (int row = col; row < n; ++row) out[pos++] = sigma(row, col);
  }

  if (layout.nu) {
    // inverse CDF of the exponential truncated to (2, nu_max]
    const double l = 1.0 / cfg.nu_mean;
    const double span = 1.0 - std::exp(-l * (cfg.nu_max - kNuMin));
    double u = rng.uniform();
    double nu = kNuMin - std::log1p(-u * span) / l;
    if (!(nu > kNuMin)) nu = std::nextafter(kNuMin, cfg.nu_max);
    out[*layout.nu] = std::min(nu, cfg.nu_max);
  }
  if (layout.alpha) {
    std::normal_distribution<double> normal(0.0, std::sqrt(cfg.skew_var));
    for (int i = 0; i < n; ++i) {
      double a = normal(rng);
      if (n == 1) {
        a = std::abs(a);
        if (a == 0.0) a = std::numeric_limits<double>::min();
      }
      out[*layout.alpha + static_cast<std::size_t>(i)] = a;
    }
  }
  return attempts;
}

std::vector<ParamVector> sample_prior(const ModelSpec& spec, const PriorConfig& cfg, std::size_t count,
                                      CounterRng& rng) {
  cfg.validate(spec.n);
  const std::size_t k = spec.num_params();
  std::vector<ParamVector> draws;
  draws.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    ParamVector p{spec, Eigen::VectorXd(static_cast<Eigen::Index>(k))};
    sample_prior_into(spec, cfg, rng, std::span<double>(p.theta.data(), k));
    draws.push_back(std::move(p));
  }
  return draws;
}

}  // namespace marsmc
