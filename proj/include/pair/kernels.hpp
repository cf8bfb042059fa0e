#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference and, on x86-64,
// an AVX2 variant; the dispatching entry points pick one at runtime.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace pair::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// True when the CPU and the build both support the AVX2 variants.
bool avx2_available() noexcept;

/// ISA used by the dispatching entry points. Defaults to the best available,
/// unless PAIR_FORCE_SCALAR is set in the environment.
Isa active_isa() noexcept;

/// Overrides dispatch (tests and benchmarks). Requesting avx2 on a machine
/// without it falls back to scalar.
void set_isa(Isa isa) noexcept;

/// Sum of |a[i] - b[i]|. Spans must have equal length.
double abs_diff_sum(std::span<const double> a, std::span<const double> b);

/// Number of ones in a label vector whose entries are all 0 or 1.
std::size_t count_positive(std::span<const std::uint8_t> labels);

/// Sparse-dense dot product: sum of weights[index[i]] * value[i].
double gather_dot(std::span<const double> weights,
                  std::span<const std::int32_t> index,
                  std::span<const double> value);

/// weights[index[i]] += alpha * value[i]. Scalar only; AVX2 has no scatter.
void scatter_axpy(std::span<double> weights, std::span<const std::int32_t> index,
                  std::span<const double> value, double alpha);

namespace scalar {
double abs_diff_sum(std::span<const double> a, std::span<const double> b);
std::size_t count_positive(std::span<const std::uint8_t> labels);
double gather_dot(std::span<const double> weights,
                  std::span<const std::int32_t> index,
                  std::span<const double> value);
}  // namespace scalar

#if defined(PAIR_HAVE_AVX2)
namespace avx2 {
double abs_diff_sum(std::span<const double> a, std::span<const double> b);
std::size_t count_positive(std::span<const std::uint8_t> labels);
double gather_dot(std::span<const double> weights,
                  std::span<const std::int32_t> index,
                  std::span<const double> value);
}  // namespace avx2
#endif

}  // namespace pair::kernels
