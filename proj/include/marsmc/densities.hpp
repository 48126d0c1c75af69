#pragma once

#include <Eigen/Dense>
#include <cstddef>

#include "marsmc/model.hpp"
#include "marsmc/rng.hpp"

namespace marsmc {

/// log t_n(u; Sigma, nu): multivariate Student-t with scale matrix Sigma.
/// Throws ModelError if Sigma is not SPD.
double logpdf_mvt(const Eigen::VectorXd& u, const Eigen::MatrixXd& sigma, double nu);

/// Multivariate Cauchy; same code path as logpdf_mvt with nu = 1.
double logpdf_cauchy(const Eigen::VectorXd& u, const Eigen::MatrixXd& sigma);

/// log{ 2 t_n(u; Sigma, nu) T_1(alpha'u sqrt((nu+n)/(u'Sigma^-1 u + nu)); nu+n) }.
/// The skewness form alpha'u is applied to the raw residual.
double logpdf_mvskewt(const Eigen::VectorXd& u, const Eigen::MatrixXd& sigma, double nu,
                      const Eigen::VectorXd& alpha);

/// Two-piece univariate skewed Student-t with scale sigma and skewness alpha > 0:
/// (2/(alpha + 1/alpha)) [t(x/alpha) 1(x >= 0) + t(alpha x) 1(x < 0)] / sigma, x = u/sigma.
double logpdf_uni_skewt(double u, double sigma, double nu, double alpha);

/// log of the scalar Student-t CDF with `df` degrees of freedom.
double log_student_t_cdf(double x, double df);

/// Normalizing constant of the n-variate t density: lgamma((nu+n)/2) - lgamma(nu/2)
/// - (n/2) log(pi nu) - (1/2) log|Sigma|.
double mvt_log_normalizer(int n, double nu, double log_det_sigma);

struct ErrorDistParams {
  ErrorDist dist = ErrorDist::StudentT;
  Eigen::MatrixXd sigma;
  double nu = 1.0;        // ignored for Cauchy (fixed at 1)
  Eigen::VectorXd alpha;  // SkewedT only; univariate form needs a single positive entry

  int n() const { return static_cast<int>(sigma.rows()); }
  /// Builds from a decoded parameter vector.
  static ErrorDistParams from_model(const ModelSpec& spec, const ModelParams& params);
};

/// Log density of a single innovation vector under the model's error law.
double logpdf(const ErrorDistParams& params, const Eigen::VectorXd& u);

/// One draw written into out (n entries).
void draw(const ErrorDistParams& params, CounterRng& rng, double* out);

/// count x n matrix of i.i.d. draws.
Eigen::MatrixXd sample(const ErrorDistParams& params, std::size_t count, CounterRng& rng);

}  // namespace marsmc
