#include "mmdval/kernel.hpp"

#include "mmdval/error.hpp"
#include "mmdval/parallel.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <string>
#include <unordered_set>

namespace mmdval {

KernelSpec::KernelSpec(double sigma) : sigma_(sigma), two_sigma_sq_(2.0 * sigma * sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(two_sigma_sq_) || two_sigma_sq_ == 0.0) {
        throw InputError("kernel bandwidth must be positive and finite, got " + std::to_string(sigma));
    }
}

double squared_distance(std::span<const double> x, std::span<const double> y) noexcept {
    double sq = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) {
        const double diff = x[c] - y[c];
        sq += diff * diff;
    }
    return sq;
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw InputError("kernel arguments have dimensions " + std::to_string(x.size()) + " and " +
                         std::to_string(y.size()));
    }
    spec.count(1);
    return spec.from_squared_distance(squared_distance(x, y));
}

namespace {

void require_same_dim(const Matrix& x, const Matrix& y) {
    if (x.cols() != y.cols()) {
        throw InputError("kernel block operands have dimensions " + std::to_string(x.cols()) + " and " +
                         std::to_string(y.cols()));
    }
}

std::size_t block_count(std::size_t n, std::size_t block) { return (n + block - 1) / block; }

} // namespace

Matrix kernel_block(const KernelSpec& spec, const Matrix& x, const Matrix& y) {
    require_same_dim(x, y);
    Matrix out(x.rows(), y.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto xi = x.row(i);
        for (std::size_t j = 0; j < y.rows(); ++j) {
            out(i, j) = spec.from_squared_distance(squared_distance(xi, y.row(j)));
        }
    }
    spec.count(static_cast<std::uint64_t>(x.rows()) * y.rows());
    return out;
}

namespace {

std::vector<double> blocked_row_sums(const KernelSpec& spec, const Matrix& x, const Matrix& y,
                                     std::size_t block_size, bool skip_diagonal) {
    require_same_dim(x, y);
    if (block_size == 0) throw InputError("block size must be positive");
    std::vector<double> sums(x.rows(), 0.0);
    const std::size_t row_blocks = block_count(x.rows(), block_size);
    parallel_for(row_blocks, [&](std::size_t rb) {
        const std::size_t r0 = rb * block_size;
        const std::size_t r1 = std::min(x.rows(), r0 + block_size);
        std::vector<double> tile(block_size * block_size);
        std::uint64_t evaluations = 0;
        for (std::size_t c0 = 0; c0 < y.rows(); c0 += block_size) {
            const std::size_t c1 = std::min(y.rows(), c0 + block_size);
            const std::size_t width = c1 - c0;
            for (std::size_t i = r0; i < r1; ++i) {
                const auto xi = x.row(i);
                double* out = tile.data() + (i - r0) * width;
                for (std::size_t j = c0; j < c1; ++j) {
                    out[j - c0] = (skip_diagonal && i == j) ? 0.0
                                                            : spec.from_squared_distance(squared_distance(xi, y.row(j)));
                }
            }
            for (std::size_t i = r0; i < r1; ++i) {
                const double* row = tile.data() + (i - r0) * width;
                double acc = sums[i];
                for (std::size_t j = c0; j < c1; ++j) {
                    if (skip_diagonal && i == j) continue;
                    acc += row[j - c0];
                }
                sums[i] = acc;
            }
            evaluations += (r1 - r0) * width;
            if (skip_diagonal && c0 < r1 && r0 < c1) {
                evaluations -= std::min(r1, c1) - std::max(r0, c0);
            }
        }
        spec.count(evaluations);
    });
    return sums;
}

} // namespace

std::vector<double> kernel_row_sums(const KernelSpec& spec, const Matrix& x, const Matrix& y,
                                    std::size_t block_size) {
    return blocked_row_sums(spec, x, y, block_size, false);
}

std::vector<double> kernel_row_sums_excluding_self(const KernelSpec& spec, const Matrix& x,
                                                   std::size_t block_size) {
    return blocked_row_sums(spec, x, x, block_size, true);
}

double median_heuristic(const Matrix& x, std::size_t sample_pairs, std::uint64_t seed) {
    const std::size_t n = x.rows();
    if (n < 2) throw InputError("median heuristic needs at least 2 points, got " + std::to_string(n));
    if (sample_pairs == 0) throw InputError("median heuristic needs at least one sampled pair");

    const std::uint64_t total_pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    std::vector<double> distances;
    if (total_pairs <= sample_pairs) {
        distances.reserve(total_pairs);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                distances.push_back(std::sqrt(squared_distance(x.row(i), x.row(j))));
            }
        }
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::unordered_set<std::uint64_t> seen;
        seen.reserve(sample_pairs * 2);
        distances.reserve(sample_pairs);
        while (distances.size() < sample_pairs) {
            std::size_t i = pick(rng);
            std::size_t j = pick(rng);
            if (i == j) continue;
            if (i > j) std::swap(i, j);
            if (!seen.insert(static_cast<std::uint64_t>(i) * n + j).second) continue;
            distances.push_back(std::sqrt(squared_distance(x.row(i), x.row(j))));
        }
    }
    const auto mid = distances.begin() + static_cast<std::ptrdiff_t>((distances.size() - 1) / 2);
    std::nth_element(distances.begin(), mid, distances.end());
    const double sigma = *mid;
    if (!(sigma > 0.0)) {
        const bool all_zero = std::all_of(distances.begin(), distances.end(), [](double d) { return d == 0.0; });
        throw InputError(all_zero ? "all sampled pairwise distances are zero; pass an explicit sigma"
                                  : "median pairwise distance is zero (mostly duplicate data); pass an explicit sigma");
    }
    return sigma;
}

} // namespace mmdval
