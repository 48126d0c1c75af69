#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "marsmc/rng.hpp"
#include "marsmc/target.hpp"

namespace marsmc::testing {

// theta ~ N(0, tau2), y_i | theta ~ N(theta, s2). Everything is available in closed form.
class ConjugateNormal final : public Target {
 public:
  ConjugateNormal(std::vector<double> y, double s2, double tau2, double shift = 0.0)
      : y_(std::move(y)), s2_(s2), tau2_(tau2), shift_(shift) {}

  std::size_t dimension() const override { return 1; }
  double log_prior(std::span<const double> th) const override {
    return -0.5 * std::log(2 * std::numbers::pi * tau2_) - 0.5 * th[0] * th[0] / tau2_;
  }
  double log_likelihood(std::span<const double> th) const override {
    double acc = 0.0;
    for (double v : y_) acc += -0.5 * std::log(2 * std::numbers::pi * s2_) - 0.5 * (v - th[0]) * (v - th[0]) / s2_;
    return acc + shift_;
  }
  void sample_prior(CounterRng& rng, std::span<double> out) const override {
    std::normal_distribution<double> z;
    out[0] = std::sqrt(tau2_) * z(rng);
  }

  double post_precision() const { return 1.0 / tau2_ + static_cast<double>(y_.size()) / s2_; }
  double post_mean() const {
    double sum = 0.0;
    for (double v : y_) sum += v;
    return sum / s2_ / post_precision();
  }
  double post_sd() const { return 1.0 / std::sqrt(post_precision()); }
  // y ~ N(0, s2 I + tau2 11').
  double log_evidence() const {
    const double N = static_cast<double>(y_.size());
    double sum = 0.0, sq = 0.0;
    for (double v : y_) {
      sum += v;
      sq += v * v;
    }
    const double logdet = (N - 1) * std::log(s2_) + std::log(s2_ + N * tau2_);
    const double quad = (sq - tau2_ * sum * sum / (s2_ + N * tau2_)) / s2_;
    return -0.5 * N * std::log(2 * std::numbers::pi) - 0.5 * logdet - 0.5 * quad + shift_;
  }

 private:
  std::vector<double> y_;
  double s2_;
  double tau2_;
  double shift_;
};

inline ConjugateNormal standard_toy(double shift = 0.0) {
  CounterRng rng(20240601, 99);
  std::normal_distribution<double> z;
  std::vector<double> y(20);
  for (auto& v : y) v = 0.7 + z(rng);
  return ConjugateNormal(y, 1.0, 4.0, shift);
}

}  // namespace marsmc::testing
