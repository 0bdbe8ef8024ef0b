#pragma once

#include "mmdval/matrix.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace mmdval {

/// Counts kernel evaluations performed by the blocked routines. Attach one to a
/// KernelSpec to instrument a computation.
struct KernelCounter {
    std::atomic<std::uint64_t> evaluations{0};
    void add(std::uint64_t n) noexcept { evaluations.fetch_add(n, std::memory_order_relaxed); }
    std::uint64_t value() const noexcept { return evaluations.load(); }
};

/// Unit-diagonal Gaussian RBF, k(x, x') = exp(-|x - x'|^2 / (2 sigma^2)).
class KernelSpec {
public:
    explicit KernelSpec(double sigma);

    double sigma() const noexcept { return sigma_; }

    double from_squared_distance(double sq) const noexcept { return std::exp(-sq / two_sigma_sq_); }

    KernelCounter* counter() const noexcept { return counter_; }
    KernelSpec with_counter(KernelCounter* counter) const {
        KernelSpec copy = *this;
        copy.counter_ = counter;
        return copy;
    }
    void count(std::uint64_t evaluations) const noexcept {
        if (counter_ != nullptr) counter_->add(evaluations);
    }

private:
    double sigma_;
    double two_sigma_sq_;
    KernelCounter* counter_ = nullptr;
};

inline constexpr std::size_t kDefaultBlockSize = 1024;

double squared_distance(std::span<const double> x, std::span<const double> y) noexcept;

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

/// Dense a x b Gram block. Only for callers that need the entries themselves;
/// reductions should use the row-sum routines below.
Matrix kernel_block(const KernelSpec& spec, const Matrix& x, const Matrix& y);

/// out[i] = sum_j k(x_i, y_j), accumulated in ascending j. Evaluated in
/// block x block tiles; peak extra memory is O(block^2).
std::vector<double> kernel_row_sums(const KernelSpec& spec, const Matrix& x, const Matrix& y,
                                    std::size_t block_size = kDefaultBlockSize);

/// out[i] = sum_{j != i} k(x_i, x_j), accumulated in ascending j.
std::vector<double> kernel_row_sums_excluding_self(const KernelSpec& spec, const Matrix& x,
                                                   std::size_t block_size = kDefaultBlockSize);

/// Lower median of Euclidean distances over min(sample_pairs, n(n-1)/2)
/// distinct pairs. All pairs are used when they fit in the budget.
double median_heuristic(const Matrix& x, std::size_t sample_pairs = 10000, std::uint64_t seed = 0);

} // namespace mmdval
