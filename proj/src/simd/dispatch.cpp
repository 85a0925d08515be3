#include "vstretch/simd/kernels.hpp"

#include <atomic>
#include <stdexcept>
#include <string>

namespace vstretch::simd {

#if !defined(VSTRETCH_HAVE_AVX2)
const KernelTable* avx2_kernels() { return nullptr; }
#endif

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable* best_table() {
  if (const KernelTable* t = avx2_kernels(); t != nullptr && cpu_supports_avx2()) return t;
  // TODO: add NEON variants for aarch64 hosts.
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> table{best_table()};
  return table;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

void select(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      slot().store(&scalar_kernels(), std::memory_order_release);
      return;
    case Backend::Avx2: {
      const KernelTable* t = avx2_kernels();
      if (t == nullptr) throw std::runtime_error("AVX2 kernels not compiled into this build");
      if (!cpu_supports_avx2()) throw std::runtime_error("CPU does not support AVX2/FMA");
      slot().store(t, std::memory_order_release);
      return;
    }
  }
}

void select_best() { slot().store(best_table(), std::memory_order_release); }

Backend parse_backend(std::string_view name) {
  if (name == "scalar") return Backend::Scalar;
  if (name == "avx2") return Backend::Avx2;
  throw std::invalid_argument("unknown SIMD backend '" + std::string(name) + "'");
}

}  // namespace vstretch::simd
