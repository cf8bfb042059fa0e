#include "pair/kernels.hpp"

#include <cmath>

namespace pair::kernels::scalar {

double abs_diff_sum(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::fabs(a[i] - b[i]);
  return sum;
}

std::size_t count_positive(std::span<const std::uint8_t> labels) {
  std::size_t n = 0;
  for (auto l : labels) n += l;
  return n;
}

double gather_dot(std::span<const double> weights,
                  std::span<const std::int32_t> index,
                  std::span<const double> value) {
  double sum = 0.0;
  for (std::size_t i = 0; i < index.size(); ++i) {
    sum += weights[static_cast<std::size_t>(index[i])] * value[i];
  }
  return sum;
}

}  // namespace pair::kernels::scalar
