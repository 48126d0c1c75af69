#include "marsmc/kernels.hpp"

#include <cmath>

namespace marsmc::kernels {
namespace {

void sub_scaled_scalar(double* out, const double* in, double c, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) out[i] -= c * in[i];
}

void scale_scalar(double* x, double c, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) x[i] *= c;
}

void add_squares_scalar(double* acc, const double* x, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) acc[i] += x[i] * x[i];
}

void dot_accumulate_scalar(double* acc, const double* x, double c, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) acc[i] += c * x[i];
}

double sum_log1p_scaled_scalar(const double* x, double c, std::size_t len) {
  double sum = 0.0;
  for (std::size_t i = 0; i < len; ++i) sum += std::log1p(c * x[i]);
  return sum;
}

constexpr KernelTable kScalar{
    "scalar",         sub_scaled_scalar,       scale_scalar, add_squares_scalar,
    dot_accumulate_scalar, sum_log1p_scaled_scalar,
};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace marsmc::kernels
