#include <atomic>
#include <cstdlib>

#include "pair/kernels.hpp"

namespace pair::kernels {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(PAIR_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa default_isa() noexcept {
  if (std::getenv("PAIR_FORCE_SCALAR") != nullptr) return Isa::scalar;
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{default_isa()};
  return isa;
}

bool use_avx2() noexcept {
  return current().load(std::memory_order_relaxed) == Isa::avx2;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

bool avx2_available() noexcept { return cpu_has_avx2(); }

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) noexcept {
  if (isa == Isa::avx2 && !cpu_has_avx2()) isa = Isa::scalar;
  current().store(isa, std::memory_order_relaxed);
}

double abs_diff_sum(std::span<const double> a, std::span<const double> b) {
#if defined(PAIR_HAVE_AVX2)
  if (use_avx2()) return avx2::abs_diff_sum(a, b);
#endif
  return scalar::abs_diff_sum(a, b);
}

std::size_t count_positive(std::span<const std::uint8_t> labels) {
#if defined(PAIR_HAVE_AVX2)
  if (use_avx2()) return avx2::count_positive(labels);
#endif
  return scalar::count_positive(labels);
}

double gather_dot(std::span<const double> weights,
                  std::span<const std::int32_t> index,
                  std::span<const double> value) {
#if defined(PAIR_HAVE_AVX2)
  if (use_avx2()) return avx2::gather_dot(weights, index, value);
#endif
  return scalar::gather_dot(weights, index, value);
}

void scatter_axpy(std::span<double> weights, std::span<const std::int32_t> index,
                  std::span<const double> value, double alpha) {
  for (std::size_t i = 0; i < index.size(); ++i) {
    weights[static_cast<std::size_t>(index[i])] += alpha * value[i];
  }
}

}  // namespace pair::kernels
