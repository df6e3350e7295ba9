#pragma once

#include "themetrek/kernels.hpp"

namespace themetrek::kernels::detail {

const KernelTable& scalar_table();
#if defined(THEMETREK_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(THEMETREK_HAVE_NEON)
const KernelTable& neon_table();
#endif

}  // namespace themetrek::kernels::detail
