#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

// Data-parallel inner loops shared by the logistic fit and the correlation
// code. Every kernel has a scalar reference version; wider variants are picked
// at runtime from what the CPU reports and must agree with the reference up to
// summation-order rounding.
namespace decaygraph::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  std::string_view name;
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // sum_i w[i] * x[i] * y[i]
  double (*weighted_dot)(const double* w, const double* x, const double* y, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // sum_i x[i]
  double (*sum)(const double* x, std::size_t n);
  // sum_i (x[i] - mx) * (y[i] - my)
  double (*centered_dot)(const double* x, double mx, const double* y, double my, std::size_t n);
};

const KernelTable& scalar_table();

// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_table();

// Kernel table used by the library. Chosen once: the widest supported ISA,
// unless DECAYGRAPH_SIMD=scalar is set in the environment.
const KernelTable& active();

// Overrides the active table (tests and benchmarks). std::nullopt restores
// automatic selection. Returns false if the requested ISA is unavailable.
bool force_isa(std::optional<Isa> isa);

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}

inline double weighted_dot(std::span<const double> w, std::span<const double> x,
                           std::span<const double> y) {
  return active().weighted_dot(w.data(), x.data(), y.data(), x.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}

inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

inline double centered_dot(std::span<const double> x, double mx, std::span<const double> y,
                           double my) {
  return active().centered_dot(x.data(), mx, y.data(), my, x.size());
}

namespace detail {
double dot_scalar(const double* x, const double* y, std::size_t n);
double weighted_dot_scalar(const double* w, const double* x, const double* y, std::size_t n);
void axpy_scalar(double a, const double* x, double* y, std::size_t n);
double sum_scalar(const double* x, std::size_t n);
double centered_dot_scalar(const double* x, double mx, const double* y, double my, std::size_t n);

#if defined(DECAYGRAPH_HAVE_AVX2)
double dot_avx2(const double* x, const double* y, std::size_t n);
double weighted_dot_avx2(const double* w, const double* x, const double* y, std::size_t n);
void axpy_avx2(double a, const double* x, double* y, std::size_t n);
double sum_avx2(const double* x, std::size_t n);
double centered_dot_avx2(const double* x, double mx, const double* y, double my, std::size_t n);
#endif
}  // namespace detail

}  // namespace decaygraph::kernels
