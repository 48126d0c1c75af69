#include <doctest.h>

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstring>

#include "marsmc/errors.hpp"
#include "marsmc/likelihood.hpp"
#include "marsmc/simulate.hpp"
#include "marsmc/smc.hpp"
#include "support/stats.hpp"
#include "support/toy_targets.hpp"

using namespace marsmc;
using marsmc::testing::ConjugateNormal;
using marsmc::testing::standard_toy;

namespace {

ParticleCloud make_cloud(const Eigen::MatrixXd& params, const Eigen::VectorXd& logliks) {
  ParticleCloud c;
  c.params = params;
  c.logliks = logliks;
  c.logpriors = Eigen::VectorXd::Zero(logliks.size());
  c.weights = Eigen::VectorXd::Ones(logliks.size());
  return c;
}

bool same_bits(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST_CASE("tempering schedule") {
  CHECK(tempering_schedule(1, 50, 2.0) == 0.0);
  CHECK(tempering_schedule(50, 50, 2.0) == 1.0);
  CHECK(tempering_schedule(50, 100, 2.0) == doctest::Approx(0.244975).epsilon(1e-6));
  for (double lambda : {0.3, 1.0, 2.0, 5.0}) {
    double prev = -1.0;
    for (std::size_t m = 1; m <= 40; ++m) {
      const double rho = tempering_schedule(m, 40, lambda);
      CHECK(rho > prev);
      prev = rho;
    }
    CHECK(prev == 1.0);
  }
  CHECK_THROWS_AS(tempering_schedule(0, 10, 2.0), ConfigError);
  CHECK_THROWS_AS(tempering_schedule(11, 10, 2.0), ConfigError);
}

TEST_CASE("correction on the two-particle example") {
  Eigen::VectorXd ll(2);
  ll << 0.0, std::log(4.0);
  auto c = make_cloud(Eigen::MatrixXd::Zero(1, 2), ll);
  const double inc = correction(c, 1.0);
  CHECK(c.weights(0) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(c.weights(1) == doctest::Approx(1.6).epsilon(1e-15));
  CHECK(inc == doctest::Approx(std::log(2.5)).epsilon(1e-15));
  CHECK(c.stage == 2);
}

TEST_CASE("correction edge cases") {
  Eigen::VectorXd ll = Eigen::VectorXd::LinSpaced(5, -3, 7);
  auto c = make_cloud(Eigen::MatrixXd::Zero(1, 5), ll);
  c.rho = 0.3;
  c.weights << 0.5, 1.5, 1.0, 1.2, 0.8;
  const Eigen::VectorXd before = c.weights;
  CHECK(correction(c, 0.3) == 0.0);
  CHECK(c.weights == before);

  auto flat = make_cloud(Eigen::MatrixXd::Zero(1, 4), Eigen::VectorXd::Constant(4, -1234.5));
  flat.weights << 0.5, 1.5, 1.25, 0.75;
  const Eigen::VectorXd w0 = flat.weights;
  const double inc = correction(flat, 0.7);
  CHECK((flat.weights - w0).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(inc == doctest::Approx(0.7 * -1234.5).epsilon(1e-14));

  // huge log-likelihoods stay finite thanks to the max shift
  Eigen::VectorXd big(3);
  big << -1e6, -1e6 + 1, -1e6 + 2;
  auto b = make_cloud(Eigen::MatrixXd::Zero(1, 3), big);
  const double binc = correction(b, 1.0);
  CHECK(std::isfinite(binc));
  CHECK(b.weights.mean() == doctest::Approx(1.0).epsilon(1e-14));

  auto dead = make_cloud(Eigen::MatrixXd::Zero(1, 3), Eigen::VectorXd::Constant(3, -INFINITY));
  CHECK_THROWS_AS(correction(dead, 0.5), SamplerError);
}

TEST_CASE("effective sample size") {
  CHECK(ess(Eigen::VectorXd::Ones(10)) == 10.0);
  Eigen::VectorXd one = Eigen::VectorXd::Zero(8);
  one(3) = 8.0;
  CHECK(ess(one) == doctest::Approx(1.0));
  Eigen::VectorXd w(4);
  w << 2, 2, 0, 0;
  CHECK(ess(w) == doctest::Approx(2.0));
}

TEST_CASE("selection") {
  SmcConfig cfg;
  CounterRng rng(1, 2);
  Eigen::MatrixXd p = Eigen::RowVectorXd::LinSpaced(6, 0, 5);
  auto uniform = make_cloud(p, Eigen::VectorXd::Zero(6));
  CHECK_FALSE(selection(uniform, cfg, rng));
  CHECK(uniform.params == p);

  auto degen = make_cloud(p, Eigen::VectorXd::LinSpaced(6, 0, 5));
  degen.weights.setZero();
  degen.weights(4) = 6.0;
  REQUIRE(selection(degen, cfg, rng));
  CHECK((degen.params.array() == 4.0).all());
  CHECK((degen.logliks.array() == 4.0).all());
  CHECK((degen.weights.array() == 1.0).all());
}

TEST_CASE("resampling preserves the weighted mean") {
  const int P = 50;
  Eigen::MatrixXd p(1, P);
  Eigen::VectorXd w(P);
  for (int i = 0; i < P; ++i) {
    p(0, i) = std::sin(i * 0.7) * 3 + i * 0.1;
    w(i) = i < 10 ? 6.0 : 0.5;
  }
  w *= P / w.sum();
  const double target = (p.row(0) * w)(0) / P;
  SmcConfig cfg;
  cfg.ess_fraction = 1.0;
  const int R = 1000;
  double sum = 0.0;
  for (int r = 0; r < R; ++r) {
    auto c = make_cloud(p, Eigen::VectorXd::Zero(P));
    c.weights = w;
    CounterRng rng(77, 2, static_cast<std::uint32_t>(r));
    REQUIRE(selection(c, cfg, rng));
    sum += c.params.mean();
  }
  // variance of a multinomial resample mean: (1/P) * weighted variance
  double var = 0.0;
  for (int i = 0; i < P; ++i) var += w(i) / P * (p(0, i) - target) * (p(0, i) - target);
  const double se = std::sqrt(var / P / R);
  CHECK(std::abs(sum / R - target) < 3 * se);
}

TEST_CASE("mutation with zero scale leaves the cloud untouched") {
  auto toy = standard_toy();
  SmcConfig cfg;
  cfg.particles = 64;
  cfg.mutation_steps = 3;
  auto c = initialize(toy, cfg);
  c.rho = 0.5;
  const auto before = c.params;
  const double acc = mutation(c, toy, cfg, proposal_factor(c), 0.0);
  CHECK(acc == 1.0);
  CHECK(same_bits(before, c.params));
}

TEST_CASE("mutation at rho = 1 leaves the posterior invariant (chi-square)") {
  auto toy = standard_toy();
  SmcConfig cfg;
  cfg.particles = 4000;
  cfg.mutation_steps = 5;
  cfg.seed = 3;
  // Start far from the posterior; the chain must forget it.
  ParticleCloud c = make_cloud(Eigen::MatrixXd::Constant(1, 4000, -2.0), Eigen::VectorXd::Zero(4000));
  for (Eigen::Index i = 0; i < 4000; ++i) {
    c.logliks(i) = toy.log_likelihood({c.params.col(i).data(), 1});
    c.logpriors(i) = toy.log_prior({c.params.col(i).data(), 1});
  }
  c.rho = 1.0;
  ProposalFactor prop;
  prop.factor = Eigen::MatrixXd::Constant(1, 1, toy.post_sd());
  for (std::size_t round = 0; round < 40; ++round) {
    c.stage = 2 + round;
    mutation(c, toy, cfg, prop, 1.5);
  }
  boost::math::normal post(toy.post_mean(), toy.post_sd());
  const int bins = 20;
  std::vector<double> counts(bins, 0.0);
  for (Eigen::Index i = 0; i < 4000; ++i) {
    const double u = boost::math::cdf(post, c.params(0, i));
    counts[std::min(bins - 1, static_cast<int>(u * bins))] += 1;
  }
  double chi2 = 0.0;
  for (double o : counts) chi2 += (o - 200.0) * (o - 200.0) / 200.0;
  CHECK(marsmc::testing::chi2_sf(chi2, bins - 1) > 0.01);
}

TEST_CASE("mutation at rho = 0 reproduces the truncated prior") {
  DgpSpec dgp = table2_dgp(ErrorDist::StudentT);
  PosteriorKernel kernel(dgp.model, simulate_path(dgp));
  SmcConfig cfg;
  cfg.particles = 3000;
  cfg.mutation_steps = 4;
  cfg.seed = 12;
  auto c = initialize(kernel, cfg);
  const auto prop = proposal_factor(c);
  for (std::size_t round = 0; round < 25; ++round) {
    c.stage = 2 + round;
    mutation(c, kernel, cfg, prop, 0.4);
  }
  // independent prior draws as the reference sample
  SmcConfig ref_cfg = cfg;
  ref_cfg.seed = 99;
  const auto ref = initialize(kernel, ref_cfg);
  for (Eigen::Index j = 0; j < 8; ++j) {
    const double m1 = c.params.row(j).mean(), m2 = ref.params.row(j).mean();
    const double v1 = (c.params.row(j).array() - m1).square().mean();
    const double v2 = (ref.params.row(j).array() - m2).square().mean();
    // chain draws are autocorrelated; allow for an effective size a few times smaller
    const double se = std::sqrt(v1 / 3000.0 * 4 + v2 / 3000.0);
    CAPTURE(j);
    CHECK(std::abs(m1 - m2) < 3 * se);
    CHECK(std::abs(std::sqrt(v1) / std::sqrt(v2) - 1) < 0.1);
  }
}

TEST_CASE("proposal factor falls back to a floored diagonal") {
  Eigen::MatrixXd p(2, 4);
  p << 1, 1, 1, 1, 0, 1, 2, 3;
  auto c = make_cloud(p, Eigen::VectorXd::Zero(4));
  const auto f = proposal_factor(c);
  CHECK(f.diagonal_fallback);
  CHECK(f.factor(0, 0) == doctest::Approx(1e-6));
  CHECK(f.factor(1, 1) == doctest::Approx(std::sqrt(1.25)));
  CHECK(f.factor(1, 0) == 0.0);

  Eigen::MatrixXd q(2, 4);
  q << 1, 2, 3, 5, 0, 1, 0, 3;
  const auto g = proposal_factor(make_cloud(q, Eigen::VectorXd::Zero(4)));
  CHECK_FALSE(g.diagonal_fallback);
  Eigen::MatrixXd centered = q.colwise() - q.rowwise().mean();
  const Eigen::MatrixXd cov = centered * centered.transpose() / 4;
  CHECK((g.factor * g.factor.transpose() - cov).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("scale adaptation") {
  CHECK(adapt_scale(0.3, 0.25, 0.25) == doctest::Approx(0.3));
  CHECK(adapt_scale(1.0, 1.0, 0.25) == doctest::Approx(0.95 + 0.10 / (1 + std::exp(-12.0))));
  CHECK(adapt_scale(1.0, 0.0, 0.25) == doctest::Approx(0.95 + 0.10 / (1 + std::exp(4.0))));
  CHECK(adapt_scale(2.0, 0.9, 0.25) > 2.0);
  CHECK(adapt_scale(2.0, 0.05, 0.25) < 2.0);
}

TEST_CASE("run on the conjugate toy") {
  auto toy = standard_toy();
  SmcConfig cfg;
  cfg.particles = 2000;
  cfg.stages = 30;
  cfg.mutation_steps = 2;
  cfg.seed = 4;
  std::size_t stages_seen = 0;
  RunHooks hooks;
  hooks.on_stage = [&](const StageDiagnostics& d) {
    ++stages_seen;
    CHECK(d.ess > 0.0);
    CHECK(d.ess <= 2000.0 * (1 + 1e-12));
  };
  hooks.on_checkpoint = [&](const ParticleCloud& c) { CHECK(std::abs(c.weights.mean() - 1.0) < 1e-10); };
  const auto res = run(toy, cfg, hooks);
  CHECK(stages_seen == 30);
  CHECK(res.stages.size() == 30);
  CHECK(std::isnan(res.stages[0].acceptance));
  CHECK(res.stages.front().rho == 0.0);
  CHECK(res.stages.back().rho == 1.0);
  CHECK(std::abs(res.log_mdd - toy.log_evidence()) < 0.1);
  CHECK(std::abs(res.posterior_mean(0) - toy.post_mean()) < 0.1 * toy.post_sd() + 0.05);
  CHECK(res.map_log_kernel == doctest::Approx(res.map_loglik + toy.log_prior({res.map_params.data(), 1})));
  for (const auto& d : res.stages) CHECK(d.resampled == (d.stage > 1 && d.ess < 0.5 * 2000));
}

TEST_CASE("two-stage run is importance sampling from the prior") {
  auto toy = standard_toy();
  SmcConfig cfg;
  cfg.particles = 500;
  cfg.stages = 2;
  cfg.seed = 8;
  const auto init = initialize(toy, cfg);
  const double shift = init.logliks.maxCoeff();
  const double want = shift + std::log((init.logliks.array() - shift).exp().mean());
  const auto res = run(toy, cfg);
  CHECK(res.log_mdd == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("constant log-likelihood offsets shift log_mdd exactly") {
  SmcConfig cfg;
  cfg.particles = 400;
  cfg.stages = 15;
  cfg.seed = 21;
  const double c = 123.456;
  const auto a = run(standard_toy(), cfg);
  const auto b = run(standard_toy(c), cfg);
  CHECK(std::abs(b.log_mdd - a.log_mdd - c) < 1e-8);
}

TEST_CASE("results do not depend on the worker count") {
  DgpSpec dgp = table2_dgp(ErrorDist::StudentT);
  PosteriorKernel kernel(dgp.model, simulate_path(dgp));
  SmcConfig cfg;
  cfg.particles = 300;
  cfg.stages = 8;
  cfg.seed = 5;
  cfg.workers = 1;
  const auto a = run(kernel, cfg);
  for (int w : {2, 4, 8}) {
    cfg.workers = w;
    const auto b = run(kernel, cfg);
    CHECK(std::memcmp(&a.log_mdd, &b.log_mdd, sizeof(double)) == 0);
    CHECK(same_bits(a.final_cloud.params, b.final_cloud.params));
    CHECK(same_bits(a.final_cloud.weights, b.final_cloud.weights));
  }
}

TEST_CASE("config validation") {
  SmcConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.particles = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.stages = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.lambda = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.mutation_steps = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.ess_fraction = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.ess_fraction = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
