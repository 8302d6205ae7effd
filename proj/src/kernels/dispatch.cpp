#include <atomic>
#include <cstdlib>
#include <string_view>

#include "decaygraph/kernels.hpp"

namespace decaygraph::kernels {

namespace {

constexpr KernelTable kScalar{
    Isa::scalar,          "scalar",
    detail::dot_scalar,   detail::weighted_dot_scalar,
    detail::axpy_scalar,  detail::sum_scalar,
    detail::centered_dot_scalar,
};

#if defined(DECAYGRAPH_HAVE_AVX2)
constexpr KernelTable kAvx2{
    Isa::avx2,          "avx2",
    detail::dot_avx2,   detail::weighted_dot_avx2,
    detail::axpy_avx2,  detail::sum_avx2,
    detail::centered_dot_avx2,
};
#endif

bool cpu_has_avx2() {
#if defined(DECAYGRAPH_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& detect() {
  const char* env = std::getenv("DECAYGRAPH_SIMD");
  if (env != nullptr && std::string_view(env) == "scalar") return kScalar;
  if (const KernelTable* t = avx2_table()) return *t;
  return kScalar;
}

std::atomic<const KernelTable*> g_forced{nullptr};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* avx2_table() {
#if defined(DECAYGRAPH_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  if (const KernelTable* forced = g_forced.load(std::memory_order_acquire)) return *forced;
  static const KernelTable& chosen = detect();
  return chosen;
}

bool force_isa(std::optional<Isa> isa) {
  if (!isa) {
    g_forced.store(nullptr, std::memory_order_release);
    return true;
  }
  const KernelTable* table = *isa == Isa::scalar ? &kScalar : avx2_table();
  if (table == nullptr) return false;
  g_forced.store(table, std::memory_order_release);
  return true;
}

}  // namespace decaygraph::kernels
