#pragma once

#include <cstddef>
#include <cstdint>

#include "marsmc/model.hpp"

namespace marsmc {

struct DgpSpec {
  ModelSpec model;
  ParamVector params;
  std::size_t T = 150;
  std::size_t burn = 200;  // discarded at each end
  std::uint64_t seed = 0;

  void validate() const;
};

struct SimulatedPath {
  SeriesData data;
  /// Innovations for the returned rows (T x n); row j drove observation j.
  Eigen::MatrixXd noise;
};

/// Draws u_t for the full padded window, solves Psi(L) v_t = u_t forward from
/// zero initial conditions and Phi(L^-1) y_t = v_t backward from a zero
/// terminal condition, and returns the central T rows. Innovation t is drawn
/// from its own stream keyed by its offset from the first returned row, so the
/// central innovations do not depend on `burn`.
SimulatedPath simulate_path_with_noise(const DgpSpec& dgp);
SeriesData simulate_path(const DgpSpec& dgp);

/// VMAR(1,1), n = 2, T = 150 design used for the Monte Carlo studies:
/// Psi_1 = [[0.8, 0.1], [-0.2, 0.3]], Phi_1 = [[0.6, -0.4], [-0.4, 0.1]],
/// Sigma = [[2, 0.5], [0.5, 2]], nu = 3, alpha = (2, 2).
/// Burn-in defaults to 500 for Cauchy, 200 otherwise.
DgpSpec table2_dgp(ErrorDist dist);

}  // namespace marsmc
