#include <atomic>
#include <cstdlib>
#include <string_view>

#include "decm/kernels.hpp"

namespace decm::kernels {

#ifdef DECM_HAVE_AVX2
const KernelTable& avx2_table_unchecked() noexcept;
#endif

namespace {

bool cpu_has_avx2() noexcept {
#if defined(DECM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* resolve() noexcept {
  const KernelTable* best = avx2_table();
  if (const char* env = std::getenv("DECM_SIMD")) {
    const std::string_view want(env);
    if (want == "scalar") return &scalar_table();
    if (want == "avx2" && best) return best;
  }
  return best ? best : &scalar_table();
}

std::atomic<const KernelTable*>& slot() noexcept {
  static std::atomic<const KernelTable*> current{resolve()};
  return current;
}

}  // namespace

const KernelTable* avx2_table() noexcept {
#ifdef DECM_HAVE_AVX2
  static const bool ok = cpu_has_avx2();
  return ok ? &avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() noexcept { return *slot().load(std::memory_order_acquire); }

bool force_isa(Isa isa) noexcept {
  const KernelTable* t = isa == Isa::scalar ? &scalar_table() : avx2_table();
  if (!t) return false;
  slot().store(t, std::memory_order_release);
  return true;
}

std::string_view isa_name(Isa isa) noexcept { return isa == Isa::avx2 ? "avx2" : "scalar"; }

}  // namespace decm::kernels
