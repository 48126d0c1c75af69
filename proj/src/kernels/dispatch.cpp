#include <atomic>
#include <cstdlib>
#include <string>

#include "marsmc/kernels.hpp"

namespace marsmc::kernels {

namespace detail {
#ifndef MARSMC_HAVE_AVX2
const KernelTable* avx2_table_if_compiled() { return nullptr; }
#endif
}  // namespace detail

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* pick(std::string_view name) {
  if (name == "scalar") return &scalar_table();
  if (name == "avx2") return avx2_table();
  if (name == "auto" || name.empty()) {
    const KernelTable* fast = avx2_table();
    return fast != nullptr ? fast : &scalar_table();
  }
  return nullptr;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table = [] {
    const char* env = std::getenv("MARSMC_SIMD");
    const KernelTable* t = pick(env != nullptr ? env : "auto");
    return t != nullptr ? t : pick("auto");
  }();
  return table;
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable* table = cpu_has_avx2() ? detail::avx2_table_if_compiled() : nullptr;
  return table;
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

bool select_variant(std::string_view name) {
  const KernelTable* t = pick(name);
  if (t == nullptr) return false;
  current().store(t, std::memory_order_relaxed);
  return true;
}

}  // namespace marsmc::kernels
