#include "marsmc/likelihood.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "marsmc/densities.hpp"
#include "marsmc/errors.hpp"
#include "marsmc/kernels.hpp"

namespace marsmc {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Workspace {
  std::vector<double> scratch;
  std::vector<double> u;
  std::vector<double> q;
  std::vector<double> skew;
  std::vector<double> chol;
};

Workspace& workspace() {
  thread_local Workspace ws;
  return ws;
}

}  // namespace

std::vector<std::string> Target::parameter_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < dimension(); ++i) names.push_back("theta[" + std::to_string(i + 1) + "]");
  return names;
}

PosteriorKernel::PosteriorKernel(ModelSpec spec, SeriesData data, PriorConfig prior)
    : spec_(spec), data_(std::move(data)), prior_(prior), layout_(ParamLayout::for_spec(spec)) {
  if (data_.n() != spec_.n)
    throw ModelError("data has " + std::to_string(data_.n()) + " series, model expects " + std::to_string(spec_.n));
  if (data_.T() <= static_cast<std::size_t>(spec_.r + spec_.s + 1))
    throw ModelError("sample too short for " + spec_.label());
  if (!data_.values.allFinite()) throw ModelError("data contains non-finite values");
  prior_.validate(spec_.n);
}

double PosteriorKernel::log_prior(std::span<const double> theta) const {
  return marsmc::log_prior(spec_, theta, prior_);
}

std::vector<std::string> PosteriorKernel::parameter_names() const { return param_names(spec_); }

void PosteriorKernel::sample_prior(CounterRng& rng, std::span<double> out) const {
  sample_prior_into(spec_, prior_, rng, out);
}

double PosteriorKernel::log_likelihood(std::span<const double> theta) const {
  if (theta.size() != layout_.size) throw ModelError("parameter vector size does not match the model");
  const int n = spec_.n;
  const std::size_t T = data_.T();
  const std::size_t N = num_terms();
  const auto& k = kernels::active();
  Workspace& ws = workspace();
  ws.scratch.resize(static_cast<std::size_t>(n) * (T - static_cast<std::size_t>(spec_.s)));
  ws.u.resize(static_cast<std::size_t>(n) * N);
  ws.q.assign(N, 0.0);
  ws.chol.resize(static_cast<std::size_t>(n * n));

  const std::span<const double> vech = theta.subspan(layout_.scale, static_cast<std::size_t>(n * (n + 1) / 2));
  if (!cholesky_from_vech(vech, n, ws.chol.data())) return kNegInf;
  double log_det = 0.0;
  for (int i = 0; i < n; ++i) log_det += 2.0 * std::log(ws.chol[static_cast<std::size_t>(i * n + i)]);

  double nu = 1.0;
  if (layout_.nu) {
    nu = theta[*layout_.nu];
    if (!(nu > 0.0) || !std::isfinite(nu)) return kNegInf;
  }

  filter_residuals(spec_, theta, data_.values.data(), T, ws.u.data(), N, ws.scratch.data());

  const bool skewed = spec_.dist == ErrorDist::SkewedT;
  if (skewed && n > 1) {
    // alpha'u_t on the raw residuals, before whitening
    ws.skew.assign(N, 0.0);
    for (int a = 0; a < n; ++a)
      k.dot_accumulate(ws.skew.data(), ws.u.data() + static_cast<std::size_t>(a) * N,
                       theta[*layout_.alpha + static_cast<std::size_t>(a)], N);
  }

  // whiten: w = L^-1 u column by column, then q_t = |w_t|^2
  for (int a = 0; a < n; ++a) {
    double* ua = ws.u.data() + static_cast<std::size_t>(a) * N;
    for (int b = 0; b < a; ++b)
      k.sub_scaled(ua, ws.u.data() + static_cast<std::size_t>(b) * N, ws.chol[static_cast<std::size_t>(b * n + a)], N);
    k.scale(ua, 1.0 / ws.chol[static_cast<std::size_t>(a * n + a)], N);
    k.add_squares(ws.q.data(), ua, N);
  }

  const double dN = static_cast<double>(N);
  if (skewed && n == 1) {
    // two-piece form: q_t / alpha^2 on the right, q_t alpha^2 on the left
    const double alpha = theta[*layout_.alpha];
    if (!(alpha > 0.0) || !std::isfinite(alpha)) return kNegInf;
    const double up = 1.0 / (alpha * alpha);
    const double down = alpha * alpha;
    const double* w = ws.u.data();
    for (std::size_t t = 0; t < N; ++t) ws.q[t] *= w[t] >= 0.0 ? up : down;
    const double per_term = std::log(2.0 / (alpha + 1.0 / alpha)) + mvt_log_normalizer(1, nu, log_det);
    const double ll = dN * per_term - 0.5 * (nu + 1.0) * k.sum_log1p_scaled(ws.q.data(), 1.0 / nu, N);
    return std::isfinite(ll) ? ll : kNegInf;
  }

  double ll = dN * mvt_log_normalizer(n, nu, log_det) -
              0.5 * (nu + n) * k.sum_log1p_scaled(ws.q.data(), 1.0 / nu, N);
  if (skewed) {
    const double df = nu + n;
    double tail = 0.0;
    for (std::size_t t = 0; t < N; ++t)
      tail += log_student_t_cdf(ws.skew[t] * std::sqrt(df / (ws.q[t] + nu)), df);
    ll += dN * std::numbers::ln2 + tail;
  }
  return std::isfinite(ll) ? ll : kNegInf;
}

double log_tempered_kernel(const Target& kernel, std::span<const double> theta, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ModelError("tempering exponent must lie in [0, 1]");
  const double lp = kernel.log_prior(theta);
  if (lp == kNegInf || rho == 0.0) return lp;
  const double ll = kernel.log_likelihood(theta);
  if (ll == kNegInf) return kNegInf;
  return rho * ll + lp;
}

}  // namespace marsmc
