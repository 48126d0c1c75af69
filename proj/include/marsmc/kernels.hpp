#pragma once

// Data-parallel inner loops of the likelihood sweep.
//
// Every kernel has a scalar reference implementation; an AVX2 variant is
// compiled into a separate translation unit and picked at runtime when the
// CPU supports it. Both variants of sub_scaled/scale/add_squares/dot_accumulate
// are bit-identical (no fused multiply-add); sum_log1p_scaled differs only by
// summation order and the polynomial logarithm (relative error < 1e-14).

#include <cstddef>
#include <span>
#include <string_view>

namespace marsmc::kernels {

struct KernelTable {
  const char* name;
  // out[i] -= c * in[i]
  void (*sub_scaled)(double* out, const double* in, double c, std::size_t len);
  // x[i] *= c
  void (*scale)(double* x, double c, std::size_t len);
  // acc[i] += x[i] * x[i]
  void (*add_squares)(double* acc, const double* x, std::size_t len);
  // acc[i] += c * x[i]
  void (*dot_accumulate)(double* acc, const double* x, double c, std::size_t len);
  // sum_i log(1 + c * x[i]); requires x[i] >= 0, c > 0, finite
  double (*sum_log1p_scaled)(const double* x, double c, std::size_t len);
};

const KernelTable& scalar_table();

/// AVX2 table, or nullptr when not compiled in or not supported by this CPU.
const KernelTable* avx2_table();

/// Table used by the library. Chosen once from MARSMC_SIMD (scalar|avx2|auto,
/// default auto) and CPU support.
const KernelTable& active();

/// Force a variant ("scalar", "avx2", "auto"). Returns false if unavailable.
bool select_variant(std::string_view name);

inline void sub_scaled(std::span<double> out, std::span<const double> in, double c) {
  active().sub_scaled(out.data(), in.data(), c, out.size());
}
inline void scale(std::span<double> x, double c) { active().scale(x.data(), c, x.size()); }
inline void add_squares(std::span<double> acc, std::span<const double> x) {
  active().add_squares(acc.data(), x.data(), acc.size());
}
inline void dot_accumulate(std::span<double> acc, std::span<const double> x, double c) {
  active().dot_accumulate(acc.data(), x.data(), c, acc.size());
}
inline double sum_log1p_scaled(std::span<const double> x, double c) {
  return active().sum_log1p_scaled(x.data(), c, x.size());
}

namespace detail {
const KernelTable* avx2_table_if_compiled();
}

}  // namespace marsmc::kernels
