#include "mmdval/error.hpp"
#include "mmdval/kernel.hpp"
#include "mmdval/parallel.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

using namespace mmdval;
using namespace mmdval::testing;

TEST_CASE("kernel_eval analytic values") {
    const KernelSpec spec(1.3);
    const std::vector<double> x{0.4, -1.0};
    CHECK(kernel_eval(spec, x, x) == 1.0);
    // |x - y| = sigma * sqrt(2) gives exp(-1).
    const std::vector<double> y{0.4 + 1.3 * std::sqrt(2.0), -1.0};
    CHECK(kernel_eval(spec, x, y) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(kernel_eval(spec, x, y) == doctest::Approx(0.367879).epsilon(1e-6));
    CHECK(kernel_eval(KernelSpec(1e8), x, std::vector<double>{50.0, 20.0}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(kernel_eval(spec, x, std::vector<double>{1.0}), InputError);
}

TEST_CASE("kernel spec rejects bad bandwidths") {
    CHECK_THROWS_AS(KernelSpec(0.0), InputError);
    CHECK_THROWS_AS(KernelSpec(-1.0), InputError);
    CHECK_THROWS_AS(KernelSpec(std::nan("")), InputError);
    CHECK_THROWS_AS(KernelSpec(std::numeric_limits<double>::infinity()), InputError);
}

TEST_CASE("kernel properties: symmetric, bounded, monotone") {
    std::mt19937_64 rng(7);
    const KernelSpec spec(0.8);
    for (int t = 0; t < 200; ++t) {
        const Matrix m = random_matrix(2, 3, rng);
        const double k = kernel_eval(spec, m.row(0), m.row(1));
        CHECK(k == kernel_eval(spec, m.row(1), m.row(0)));
        CHECK(k > 0.0);
        CHECK(k < 1.0);
    }
    double previous = 1.0;
    for (int step = 1; step <= 50; ++step) {
        const std::vector<double> a{0.0}, b{0.05 * step};
        const double k = kernel_eval(spec, a, b);
        CHECK(k < previous);
        previous = k;
    }
}

TEST_CASE("kernel_block matches entry-wise evaluation") {
    const KernelSpec spec(0.9);
    const Matrix one(1, 2, {0.3, 0.3});
    const Matrix single = kernel_block(spec, one, one);
    CHECK(single.rows() == 1);
    CHECK(single(0, 0) == 1.0);

    std::mt19937_64 rng(5);
    const Matrix x = random_matrix(5, 4, rng);
    const Matrix y = random_matrix(3, 4, rng);
    const Matrix block = kernel_block(spec, x, y);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 3; ++j) CHECK(block(i, j) == kernel_eval(spec, x.row(i), y.row(j)));
    }
    CHECK_THROWS_AS(kernel_block(spec, x, random_matrix(2, 3, rng)), InputError);
}

TEST_CASE("blocked row sums equal the dense computation for any block size") {
    const KernelSpec spec(1.1);
    std::mt19937_64 rng(9);
    const Matrix x = random_matrix(100, 3, rng);
    const Matrix y = random_matrix(100, 3, rng);
    const Matrix dense = kernel_block(spec, x, y);
    const Matrix dense_self = kernel_block(spec, x, x);
    for (const std::size_t block : {1u, 7u, 32u, 100u, 1024u}) {
        const auto sums = kernel_row_sums(spec, x, y, block);
        const auto self = kernel_row_sums_excluding_self(spec, x, block);
        for (std::size_t i = 0; i < 100; ++i) {
            double expect = 0.0, expect_self = 0.0;
            for (std::size_t j = 0; j < 100; ++j) {
                expect += dense(i, j);
                if (j != i) expect_self += dense_self(i, j);
            }
            CHECK(std::abs(sums[i] - expect) <= 1e-12);
            CHECK(std::abs(self[i] - expect_self) <= 1e-12);
        }
    }
}

TEST_CASE("row sums are independent of the worker count") {
    const KernelSpec spec(0.7);
    std::mt19937_64 rng(10);
    const Matrix x = random_matrix(300, 2, rng);
    set_num_threads(1);
    const auto serial = kernel_row_sums_excluding_self(spec, x, 32);
    set_num_threads(4);
    const auto threaded = kernel_row_sums_excluding_self(spec, x, 32);
    set_num_threads(0);
    CHECK(serial == threaded);
}

TEST_CASE("kernel counter sees every evaluation") {
    KernelCounter counter;
    const KernelSpec spec = KernelSpec(1.0).with_counter(&counter);
    std::mt19937_64 rng(12);
    const Matrix x = random_matrix(37, 2, rng);
    const Matrix y = random_matrix(11, 2, rng);
    kernel_row_sums(spec, x, y, 8);
    CHECK(counter.value() == 37 * 11);
    kernel_row_sums_excluding_self(spec, x, 8);
    CHECK(counter.value() == 37 * 11 + 37 * 36);
}

TEST_CASE("median heuristic examples") {
    CHECK(median_heuristic(Matrix(2, 1, {0.0, 2.0}), 10000, 0) == 2.0);
    CHECK(median_heuristic(Matrix(3, 1, {0.0, 1.0, 3.0}), 10000, 0) == 2.0);
    // Lower median of {1, 2, 3, 4, 5, 6}: pairs of {0, 1, 3, 6} are 1,3,6,2,5,3 -> sorted 1,2,3,3,5,6.
    CHECK(median_heuristic(Matrix(4, 1, {0.0, 1.0, 3.0, 6.0}), 10000, 0) == 3.0);
    CHECK(median_heuristic(Matrix(4, 1, {0.0, 1.0, 2.0, 4.0}), 10000, 0) == 2.0);
    CHECK_THROWS_AS(median_heuristic(Matrix(1, 1, {0.0}), 10, 0), InputError);
    CHECK_THROWS_AS(median_heuristic(Matrix(3, 2, 1.0), 10, 0), InputError);
    CHECK_THROWS_AS(median_heuristic(Matrix(3, 1, {0.0, 1.0, 2.0}), 0, 0), InputError);
}

TEST_CASE("median heuristic: exact on all pairs, permutation invariant, sampled estimate close") {
    std::mt19937_64 rng(21);
    const Matrix x = random_matrix(2000, 3, rng);

    // Exact all-pairs lower median by brute force.
    std::vector<double> all;
    all.reserve(2000 * 1999 / 2);
    for (std::size_t i = 0; i < 2000; ++i) {
        for (std::size_t j = i + 1; j < 2000; ++j) all.push_back(std::sqrt(squared_distance(x.row(i), x.row(j))));
    }
    std::sort(all.begin(), all.end());
    const double exact = all[(all.size() - 1) / 2];
    CHECK(median_heuristic(x, all.size(), 0) == exact);

    const double sampled = median_heuristic(x, 10000, 3);
    CHECK(std::abs(sampled - exact) / exact <= 0.05);
    CHECK(median_heuristic(x, 10000, 3) == sampled);

    const Matrix small = x.slice_rows(0, 60);
    std::vector<std::size_t> perm(60);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    CHECK(median_heuristic(small, 10000, 0) == median_heuristic(small.select_rows(perm), 10000, 0));
}
