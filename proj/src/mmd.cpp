#include "mmdval/mmd.hpp"

#include "mmdval/error.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace mmdval {

namespace {

double total(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Orders the operands canonically so that mmd2(p, q) and mmd2(q, p) run the
// exact same floating-point sequence.
bool canonical_before(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) return a.rows() < b.rows();
    return std::lexicographical_compare(a.data().begin(), a.data().end(), b.data().begin(), b.data().end());
}

} // namespace

MmdEstimate mmd2(const KernelSpec& spec, const Matrix& p, const Matrix& q, MmdVariant variant) {
    if (p.empty() || q.empty()) throw InputError("mmd2 needs non-empty samples");
    if (p.cols() != q.cols()) {
        throw InputError("mmd2 samples have dimensions " + std::to_string(p.cols()) + " and " +
                         std::to_string(q.cols()));
    }
    if (variant == MmdVariant::unbiased && (p.rows() < 2 || q.rows() < 2)) {
        throw InputError("unbiased mmd2 needs at least 2 points per sample");
    }
    const bool swap = canonical_before(q, p);
    const Matrix& first = swap ? q : p;
    const Matrix& second = swap ? p : q;

    const double m = static_cast<double>(first.rows());
    const double n = static_cast<double>(second.rows());
    const double cross = total(kernel_row_sums(spec, first, second)) / (m * n);
    double within_first = 0.0;
    double within_second = 0.0;
    if (variant == MmdVariant::biased) {
        within_first = total(kernel_row_sums(spec, first, first)) / (m * m);
        within_second = total(kernel_row_sums(spec, second, second)) / (n * n);
    } else {
        within_first = total(kernel_row_sums_excluding_self(spec, first)) / (m * (m - 1.0));
        within_second = total(kernel_row_sums_excluding_self(spec, second)) / (n * (n - 1.0));
    }
    return {within_first + within_second - 2.0 * cross, variant};
}

} // namespace mmdval
