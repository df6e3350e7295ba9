#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>

#include "kernels_internal.hpp"
#include "themetrek/error.hpp"

namespace themetrek::kernels {
namespace {

Isa detect_best() {
  if (isa_available(Isa::avx2)) return Isa::avx2;
  if (isa_available(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

Isa initial_isa() {
  if (const char* env = std::getenv("THEMETREK_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && isa_available(Isa::avx2)) return Isa::avx2;
    if (v == "neon" && isa_available(Isa::neon)) return Isa::neon;
  }
  return detect_best();
}

std::atomic<const KernelTable*>& active_table() {
  static std::atomic<const KernelTable*> table{&table_for(initial_isa())};
  return table;
}

std::atomic<Isa>& active_tag() {
  static std::atomic<Isa> tag{initial_isa()};
  return tag;
}

}  // namespace

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(THEMETREK_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(THEMETREK_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table_for(Isa isa) {
  if (!isa_available(isa)) {
    throw ArgumentError("kernel variant not available: " + std::string(isa_name(isa)));
  }
  switch (isa) {
#if defined(THEMETREK_HAVE_AVX2)
    case Isa::avx2:
      return detail::avx2_table();
#endif
#if defined(THEMETREK_HAVE_NEON)
    case Isa::neon:
      return detail::neon_table();
#endif
    default:
      return detail::scalar_table();
  }
}

Isa active_isa() { return active_tag().load(); }

void set_active_isa(Isa isa) {
  active_table().store(&table_for(isa));
  active_tag().store(isa);
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("dot: length mismatch");
  return active_table().load()->dot(a.data(), b.data(), a.size());
}

double squared_norm(std::span<const double> a) {
  return active_table().load()->squared_norm(a.data(), a.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("squared_distance: length mismatch");
  return active_table().load()->squared_distance(a.data(), b.data(), a.size());
}

double gather_sum(std::span<const double> row, std::span<const std::uint32_t> idx) {
  return active_table().load()->gather_sum(row.data(), idx.data(), idx.size());
}

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = squared_norm(a);
  const double nb = squared_norm(b);
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  return dot(a, b) / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace themetrek::kernels
