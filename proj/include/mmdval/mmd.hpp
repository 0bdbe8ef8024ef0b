#pragma once

#include "mmdval/kernel.hpp"
#include "mmdval/matrix.hpp"

#include <string_view>

namespace mmdval {

enum class MmdVariant { biased, unbiased };

struct MmdEstimate {
    double value = 0.0;  // MMD^2, may be negative for the unbiased variant
    MmdVariant variant = MmdVariant::biased;
};

/// Squared MMD between the empirical measures on the rows of p and q.
/// biased: V-statistic over all pairs. unbiased: within-set means exclude the
/// diagonal and divide by m(m-1). Symmetric in (p, q) bit for bit.
MmdEstimate mmd2(const KernelSpec& spec, const Matrix& p, const Matrix& q, MmdVariant variant);

} // namespace mmdval
