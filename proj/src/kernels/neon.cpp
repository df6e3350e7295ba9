#include <arm_neon.h>

#include "kernels_internal.hpp"

namespace themetrek::kernels::detail {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double squared_norm_neon(const double* a, std::size_t n) { return dot_neon(a, a, n); }

double squared_distance_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double out = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    out += d * d;
  }
  return out;
}

// NEON has no gather; two independent accumulators still help the scheduler.
double gather_sum_neon(const double* row, const std::uint32_t* idx, std::size_t n) {
  double acc0 = 0.0, acc1 = 0.0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc0 += row[idx[i]];
    acc1 += row[idx[i + 1]];
  }
  if (i < n) acc0 += row[idx[i]];
  return acc0 + acc1;
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{dot_neon, squared_norm_neon, squared_distance_neon,
                                 gather_sum_neon};
  return table;
}

}  // namespace themetrek::kernels::detail
