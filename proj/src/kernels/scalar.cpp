#include "kernels_internal.hpp"

namespace themetrek::kernels::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double squared_norm_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double gather_sum_scalar(const double* row, const std::uint32_t* idx, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += row[idx[i]];
  return acc;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{dot_scalar, squared_norm_scalar,
                                 squared_distance_scalar, gather_sum_scalar};
  return table;
}

}  // namespace themetrek::kernels::detail
