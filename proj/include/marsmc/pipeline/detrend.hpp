#pragma once

#include <Eigen/Dense>

#include "marsmc/model.hpp"

namespace marsmc::pipeline {

struct DetrendResult {
  SeriesData detrended;
  /// n x (degree + 1); row a holds the coefficients of 1, tau, ..., tau^degree
  /// for series a, with tau = t / (T - 1) in [0, 1].
  Eigen::MatrixXd coefficients;
};

/// Per-series least-squares polynomial trend removal. Throws DataError if
/// T <= degree + 1.
DetrendResult detrend(const SeriesData& data, int degree = 3);

}  // namespace marsmc::pipeline
