#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "fairknn/simd/kernels.hpp"

namespace fairknn::simd {
namespace {

bool cpu_has_avx2() {
#if defined(FAIRKNN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa initial_isa() {
  if (const char* env = std::getenv("FAIRKNN_ISA")) {
    const std::string want(env);
    if (want == "scalar") return Isa::kScalar;
    if (want == "avx2" && supported(Isa::kAvx2)) return Isa::kAvx2;
  }
  return detected_isa();
}

std::atomic<const Kernels*>& current() {
  static std::atomic<const Kernels*> kernels{&kernels_for(initial_isa())};
  return kernels;
}

}  // namespace

const char* to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2: {
      static const bool has = cpu_has_avx2();
      return has;
    }
  }
  return false;
}

Isa detected_isa() { return supported(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar; }

const Kernels& kernels_for(Isa isa) {
  if (!supported(isa)) {
    throw std::invalid_argument(std::string("instruction set not available: ") + to_string(isa));
  }
#if defined(FAIRKNN_HAVE_AVX2)
  if (isa == Isa::kAvx2) return avx2::kKernels;
#endif
  return scalar::kKernels;
}

const Kernels& active() { return *current().load(std::memory_order_acquire); }

Isa active_isa() { return &active() == &scalar::kKernels ? Isa::kScalar : Isa::kAvx2; }

void select(Isa isa) { current().store(&kernels_for(isa), std::memory_order_release); }

}  // namespace fairknn::simd
