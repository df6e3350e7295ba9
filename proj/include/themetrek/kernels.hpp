#pragma once
// Data-parallel inner loops shared by the similarity backends and the
// evaluation harness. Every kernel has a scalar reference implementation;
// SIMD variants (AVX2 on x86-64, NEON on aarch64) are selected at runtime and
// must agree with the scalar reference up to summation-order rounding.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace themetrek::kernels {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_norm)(const double* a, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // sum of row[idx[k]] for k in [0, n)
  double (*gather_sum)(const double* row, const std::uint32_t* idx, std::size_t n);
};

/// True when the variant is compiled in and the CPU supports it.
bool isa_available(Isa isa);

/// Table for a specific variant; throws ArgumentError if unavailable.
const KernelTable& table_for(Isa isa);

/// Variant used by the free functions below. Chosen on first use: the best
/// available, unless THEMETREK_SIMD=scalar|avx2|neon overrides it.
Isa active_isa();

/// Overrides the active variant (tests, benchmarks). Not thread-safe with
/// concurrent kernel calls.
void set_active_isa(Isa isa);

std::string_view isa_name(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
double squared_distance(std::span<const double> a, std::span<const double> b);
double gather_sum(std::span<const double> row, std::span<const std::uint32_t> idx);

/// Cosine of two vectors; 0 when either has zero norm.
double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace themetrek::kernels
