#include "marsmc/simulate.hpp"

#include <string>

#include "marsmc/densities.hpp"
#include "marsmc/errors.hpp"
#include "marsmc/rng.hpp"

namespace marsmc {

void DgpSpec::validate() const {
  model.validate();
  if (!(params.spec == model)) throw ModelError("DGP parameters were encoded for a different model");
  if (static_cast<std::size_t>(params.theta.size()) != model.num_params())
    throw ModelError("DGP parameter vector has the wrong size");
  if (!is_stationary(params)) throw ModelError("DGP parameters are not stationary");
  if (burn < 50) throw ModelError("burn-in must be >= 50");
  if (T <= static_cast<std::size_t>(model.r + model.s + 1)) throw ModelError("T too short for the DGP orders");
}

SimulatedPath simulate_path_with_noise(const DgpSpec& dgp) {
  dgp.validate();
  const int n = dgp.model.n;
  const std::size_t r = static_cast<std::size_t>(dgp.model.r);
  const std::size_t s = static_cast<std::size_t>(dgp.model.s);
  const std::size_t total = dgp.T + 2 * dgp.burn;
  const ModelParams p = decode_params(dgp.params);
  const ErrorDistParams dist = ErrorDistParams::from_model(dgp.model, p);

  // rows are time
  Eigen::MatrixXd u(static_cast<Eigen::Index>(total), n);
  Eigen::VectorXd row(n);
  for (std::size_t t = 0; t < total; ++t) {
    const auto offset = static_cast<std::int64_t>(t) - static_cast<std::int64_t>(dgp.burn);
    auto rng = make_stream(dgp.seed, Stream::Noise, static_cast<std::uint32_t>(offset & 0xFFFFFFFF),
                           static_cast<std::uint32_t>(static_cast<std::uint64_t>(offset) >> 32));
    draw(dist, rng, row.data());
    u.row(static_cast<Eigen::Index>(t)) = row.transpose();
  }

  // Psi(L) v = u, forward
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(total), n);
  for (std::size_t t = 0; t < total; ++t) {
    Eigen::VectorXd acc = u.row(static_cast<Eigen::Index>(t)).transpose();
    for (std::size_t i = 1; i <= r && i <= t; ++i)
      acc += p.psi[i - 1] * v.row(static_cast<Eigen::Index>(t - i)).transpose();
    v.row(static_cast<Eigen::Index>(t)) = acc.transpose();
  }
  // Phi(L^-1) y = v, backward
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(total), n);
  for (std::size_t tt = total; tt-- > 0;) {
    Eigen::VectorXd acc = v.row(static_cast<Eigen::Index>(tt)).transpose();
    for (std::size_t j = 1; j <= s && tt + j < total; ++j)
      acc += p.phi[j - 1] * y.row(static_cast<Eigen::Index>(tt + j)).transpose();
    y.row(static_cast<Eigen::Index>(tt)) = acc.transpose();
  }

  SimulatedPath out;
  const auto first = static_cast<Eigen::Index>(dgp.burn);
  const auto len = static_cast<Eigen::Index>(dgp.T);
  out.data.values = y.middleRows(first, len);
  out.noise = u.middleRows(first, len);
  for (int a = 0; a < n; ++a) out.data.names.push_back("y" + std::to_string(a + 1));
  return out;
}

SeriesData simulate_path(const DgpSpec& dgp) { return simulate_path_with_noise(dgp).data; }

DgpSpec table2_dgp(ErrorDist dist) {
  ModelSpec spec{2, 1, 1, dist};
  ModelParams p;
  Eigen::MatrixXd psi(2, 2), phi(2, 2), sigma(2, 2);
  psi << 0.8, 0.1, -0.2, 0.3;
  phi << 0.6, -0.4, -0.4, 0.1;
  sigma << 2.0, 0.5, 0.5, 2.0;
  p.psi = {psi};
  p.phi = {phi};
  p.sigma = sigma;
  if (dist != ErrorDist::Cauchy) p.nu = 3.0;
  if (dist == ErrorDist::SkewedT) p.alpha = Eigen::Vector2d(2.0, 2.0);
  DgpSpec dgp{spec, encode_params(p, spec)};
  dgp.T = 150;
  dgp.burn = dist == ErrorDist::Cauchy ? 500 : 200;
  return dgp;
}

}  // namespace marsmc
