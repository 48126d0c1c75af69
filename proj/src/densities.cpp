#include "marsmc/densities.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "marsmc/errors.hpp"

namespace marsmc {
namespace {

struct Factorized {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double log_det = 0.0;
};

Factorized factorize(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) throw ModelError("Sigma must be square");
  Factorized f{Eigen::LLT<Eigen::MatrixXd>(sigma)};
  if (f.llt.info() != Eigen::Success || !sigma.allFinite())
    throw ModelError("Sigma is not symmetric positive definite");
  const Eigen::MatrixXd L = f.llt.matrixL();
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    if (!(L(i, i) > 0.0)) throw ModelError("Sigma is not symmetric positive definite");
    f.log_det += 2.0 * std::log(L(i, i));
  }
  return f;
}

double quad_form(const Factorized& f, const Eigen::VectorXd& u) {
  const Eigen::VectorXd w = f.llt.matrixL().solve(u);
  return w.squaredNorm();
}

double univariate_t_logpdf(double z, double nu) {
  return mvt_log_normalizer(1, nu, 0.0) - 0.5 * (nu + 1.0) * std::log1p(z * z / nu);
}

}  // namespace

double mvt_log_normalizer(int n, double nu, double log_det_sigma) {
  const double dn = static_cast<double>(n);
  return std::lgamma(0.5 * (nu + dn)) - std::lgamma(0.5 * nu) -
         0.5 * dn * std::log(std::numbers::pi * nu) - 0.5 * log_det_sigma;
}

double logpdf_mvt(const Eigen::VectorXd& u, const Eigen::MatrixXd& sigma, double nu) {
  const Factorized f = factorize(sigma);
  if (u.size() != sigma.rows()) throw ModelError("u and Sigma dimensions differ");
  const double q = quad_form(f, u);
  const int n = static_cast<int>(u.size());
  return mvt_log_normalizer(n, nu, f.log_det) - 0.5 * (nu + n) * std::log1p(q / nu);
}

double logpdf_cauchy(const Eigen::VectorXd& u, const Eigen::MatrixXd& sigma) {
  return logpdf_mvt(u, sigma, 1.0);
}

double log_student_t_cdf(double x, double df) {
  if (x == 0.0) return -std::numbers::ln2;
  // tail = P(T > |x|) = 0.5 * I_{df/(df+x^2)}(df/2, 1/2)
  const double x2 = x * x;
  const double z = df / (df + x2);
  double tail;
  double log_tail;
  if (z > 0.0) {
    tail = 0.5 * boost::math::ibeta(0.5 * df, 0.5, z);
    log_tail = tail > 0.0 ? std::log(tail) : -std::numeric_limits<double>::infinity();
  } else {
    tail = 0.0;
    log_tail = -std::numeric_limits<double>::infinity();
  }
  if (!std::isfinite(log_tail)) {
    // far tail: I_z(a, b) ~ z^a (1-z)^b / (a B(a, b))
    const double a = 0.5 * df;
    const double log_z = std::log(df) - std::log(df + x2);
    log_tail = std::log(0.5) + a * log_z - std::log(a) - std::log(boost::math::beta(a, 0.5));
    tail = std::exp(log_tail);
  }
  if (x < 0.0) return log_tail;
  return std::log1p(-tail);
}

double logpdf_mvskewt(const Eigen::VectorXd& u, const Eigen::MatrixXd& sigma, double nu,
                      const Eigen::VectorXd& alpha) {
  const Factorized f = factorize(sigma);
  if (u.size() != sigma.rows() || alpha.size() != u.size())
    throw ModelError("u, alpha and Sigma dimensions differ");
  const double q = quad_form(f, u);
  const int n = static_cast<int>(u.size());
  const double base = mvt_log_normalizer(n, nu, f.log_det) - 0.5 * (nu + n) * std::log1p(q / nu);
  const double arg = alpha.dot(u) * std::sqrt((nu + n) / (q + nu));
  return std::numbers::ln2 + base + log_student_t_cdf(arg, nu + n);
}

double logpdf_uni_skewt(double u, double sigma, double nu, double alpha) {
  if (!(sigma > 0.0)) throw ModelError("sigma must be > 0");
  if (!(alpha > 0.0)) throw ModelError("alpha must be > 0");
  const double x = u / sigma;
  const double z = x >= 0.0 ? x / alpha : x * alpha;
  return std::log(2.0 / (alpha + 1.0 / alpha)) + univariate_t_logpdf(z, nu) - std::log(sigma);
}

ErrorDistParams ErrorDistParams::from_model(const ModelSpec& spec, const ModelParams& params) {
  ErrorDistParams out;
  out.dist = spec.dist;
  out.sigma = params.sigma;
  out.nu = params.nu.value_or(1.0);
  if (params.alpha) out.alpha = *params.alpha;
  return out;
}

double logpdf(const ErrorDistParams& p, const Eigen::VectorXd& u) {
  switch (p.dist) {
    case ErrorDist::Cauchy:
      return logpdf_cauchy(u, p.sigma);
    case ErrorDist::StudentT:
      return logpdf_mvt(u, p.sigma, p.nu);
    case ErrorDist::SkewedT:
      if (p.n() == 1) return logpdf_uni_skewt(u(0), std::sqrt(p.sigma(0, 0)), p.nu, p.alpha(0));
      return logpdf_mvskewt(u, p.sigma, p.nu, p.alpha);
  }
  throw ModelError("unknown error distribution");
}

void draw(const ErrorDistParams& p, CounterRng& rng, double* out) {
  const int n = p.n();
  const double nu = p.dist == ErrorDist::Cauchy ? 1.0 : p.nu;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::chi_squared_distribution<double> chi2(nu);
  const Eigen::LLT<Eigen::MatrixXd> llt(p.sigma);
  if (llt.info() != Eigen::Success) throw ModelError("Sigma is not symmetric positive definite");
  const Eigen::MatrixXd L = llt.matrixL();

  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z(i) = normal(rng);
  Eigen::VectorXd x = L * z;

  if (p.dist == ErrorDist::SkewedT && n == 1) {
    // two-piece: positive side with probability alpha^2 / (1 + alpha^2)
    const double alpha = p.alpha(0);
    const double w = chi2(rng);
    const double t = std::abs(z(0)) / std::sqrt(w / nu);
    const double side = rng.uniform();
    const double sd = std::sqrt(p.sigma(0, 0));
    out[0] = side < alpha * alpha / (1.0 + alpha * alpha) ? sd * alpha * t : -sd * t / alpha;
    return;
  }
  if (p.dist == ErrorDist::SkewedT) {
    // hidden truncation: X = delta X0 + (Sigma - delta delta')^{1/2} N, keep X if X0 > 0
    // else -X; delta = Sigma alpha / sqrt(1 + alpha' Sigma alpha)
    const Eigen::VectorXd sa = p.sigma * p.alpha;
    const Eigen::VectorXd delta = sa / std::sqrt(1.0 + p.alpha.dot(sa));
    const Eigen::MatrixXd cond = p.sigma - delta * delta.transpose();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(cond);
    const Eigen::VectorXd d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
    Eigen::VectorXd e = d.cwiseProduct(z);
    const Eigen::MatrixXd Lc = ldlt.matrixL();
    x = ldlt.transpositionsP().transpose() * (Lc * e);
    const double x0 = normal(rng);
    x += delta * x0;
    if (x0 <= 0.0) x = -x;
  }
  const double w = chi2(rng);
  const double scale = 1.0 / std::sqrt(w / nu);
  for (int i = 0; i < n; ++i) out[i] = x(i) * scale;
}

Eigen::MatrixXd sample(const ErrorDistParams& p, std::size_t count, CounterRng& rng) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(count), p.n());
  Eigen::VectorXd row(p.n());
  for (std::size_t i = 0; i < count; ++i) {
    draw(p, rng, row.data());
    out.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return out;
}

}  // namespace marsmc
