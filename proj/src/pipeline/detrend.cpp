#include "marsmc/pipeline/detrend.hpp"

#include <string>

#include "marsmc/errors.hpp"

namespace marsmc::pipeline {

DetrendResult detrend(const SeriesData& data, int degree) {
  if (degree < 0) throw DataError("detrend degree must be >= 0");
  const auto T = static_cast<Eigen::Index>(data.T());
  if (T <= degree + 1)
    throw DataError("degenerate trend design: T = " + std::to_string(T) + " <= degree + 1");
  Eigen::MatrixXd X(T, degree + 1);
  for (Eigen::Index t = 0; t < T; ++t) {
    const double tau = static_cast<double>(t) / static_cast<double>(T - 1);
    double p = 1.0;
    for (int j = 0; j <= degree; ++j) {
      X(t, j) = p;
      p *= tau;
    }
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  DetrendResult out;
  out.detrended = data;
  out.coefficients.resize(data.n(), degree + 1);
  for (int a = 0; a < data.n(); ++a) {
    const Eigen::VectorXd beta = qr.solve(data.values.col(a));
    out.coefficients.row(a) = beta.transpose();
    out.detrended.values.col(a) = data.values.col(a) - X * beta;
  }
  return out;
}

}  // namespace marsmc::pipeline
