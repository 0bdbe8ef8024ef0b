#include "mmdval/cond_prob.hpp"
#include "mmdval/error.hpp"
#include "mmdval/mmd.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace mmdval;
using namespace mmdval::testing;

namespace {

// Direct double loop, no shared code with the library estimator.
double loop_mmd2(const KernelSpec& spec, const Matrix& p, const Matrix& q, bool unbiased) {
    auto k = [&](std::span<const double> a, std::span<const double> b) {
        double s = 0.0;
        for (std::size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
        return std::exp(-s / (2.0 * spec.sigma() * spec.sigma()));
    };
    auto within = [&](const Matrix& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            for (std::size_t j = 0; j < x.rows(); ++j) {
                if (unbiased && i == j) continue;
                s += k(x.row(i), x.row(j));
            }
        }
        const double m = static_cast<double>(x.rows());
        return s / (unbiased ? m * (m - 1.0) : m * m);
    };
    double cross = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i) {
        for (std::size_t j = 0; j < q.rows(); ++j) cross += k(p.row(i), q.row(j));
    }
    return within(p) + within(q) - 2.0 * cross / static_cast<double>(p.rows() * q.rows());
}

Dataset labelled(const Matrix& x, std::vector<int> labels, int classes) {
    Dataset d;
    d.features = x;
    d.labels = std::move(labels);
    d.num_classes = classes;
    return d;
}

} // namespace

TEST_CASE("mmd2 two-point closed form") {
    const KernelSpec spec(1.0);
    for (const double t : {0.0, 0.3, 1.0, 2.5}) {
        const double value = mmd2(spec, Matrix(1, 1, {0.0}), Matrix(1, 1, {t}), MmdVariant::biased).value;
        CHECK(std::abs(value - (2.0 - 2.0 * std::exp(-t * t / 2.0))) < 1e-15);
    }
    CHECK(mmd2(spec, Matrix(1, 1, {0.0}), Matrix(1, 1, {0.0}), MmdVariant::biased).value == 0.0);
}

TEST_CASE("mmd2 matches the loop oracle on randomized 50-point instances") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const KernelSpec spec(0.5 + 0.02 * trial);
        const Matrix p = random_matrix(50, 3, rng);
        const Matrix q = random_matrix(50, 3, rng, 1.5);
        for (const bool unbiased : {false, true}) {
            const auto variant = unbiased ? MmdVariant::unbiased : MmdVariant::biased;
            const auto est = mmd2(spec, p, q, variant);
            CHECK(est.variant == variant);
            CHECK(std::abs(est.value - loop_mmd2(spec, p, q, unbiased)) <= 1e-12);
            CHECK(est.value == mmd2(spec, q, p, variant).value);
            CHECK(std::abs(est.value) <= 4.0);
            if (!unbiased) CHECK(est.value >= 0.0);
        }
        CHECK(std::abs(mmd2(spec, p, p, MmdVariant::biased).value) <= 1e-12);
    }
}

TEST_CASE("mmd2 unequal sizes and size checks") {
    std::mt19937_64 rng(32);
    const KernelSpec spec(1.2);
    const Matrix p = random_matrix(7, 2, rng);
    const Matrix q = random_matrix(19, 2, rng);
    CHECK(std::abs(mmd2(spec, p, q, MmdVariant::unbiased).value - loop_mmd2(spec, p, q, true)) <= 1e-12);
    CHECK(mmd2(spec, p, q, MmdVariant::unbiased).value == mmd2(spec, q, p, MmdVariant::unbiased).value);
    CHECK_THROWS_AS(mmd2(spec, Matrix(1, 2, 0.0), q, MmdVariant::unbiased), InputError);
    CHECK_THROWS_AS(mmd2(spec, Matrix(0, 2), q, MmdVariant::biased), InputError);
    CHECK_THROWS_AS(mmd2(spec, p, random_matrix(3, 3, rng), MmdVariant::biased), InputError);
}

TEST_CASE("Nadaraya-Watson examples") {
    const KernelSpec spec(1.0);
    SUBCASE("single support point with no smoothing is one-hot") {
        const CondProbModel model(labelled(Matrix(1, 2, {0.5, 0.5}), {1}, 3), spec, 0.0);
        const auto p = model.predict(std::vector<double>{0.5, 0.5});
        CHECK(p == std::vector<double>{0.0, 1.0, 0.0});
    }
    SUBCASE("lone class-2 support point gives e_2") {
        const CondProbModel model(labelled(Matrix(3, 1, {0.0, 40.0, 80.0}), {0, 1, 2}, 3), KernelSpec(0.5), 0.0);
        const auto p = model.predict(std::vector<double>{80.0});
        CHECK(p[2] == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(p[0] < 1e-300);
    }
    SUBCASE("huge smoothing tends to uniform") {
        const CondProbModel model(labelled(Matrix(3, 1, {0.0, 1.0, 2.0}), {0, 0, 1}, 4), spec, 1e12);
        for (const double v : model.predict(std::vector<double>{0.0})) CHECK(std::abs(v - 0.25) < 1e-11);
    }
    SUBCASE("query far from the support is uniform with smoothing") {
        const CondProbModel model(labelled(Matrix(2, 1, {0.0, 1.0}), {0, 1}, 2), spec, 1e-8);
        const auto pred = model.predict_with_mass(std::vector<double>{1e3});
        CHECK(pred.kernel_mass == 0.0);
        CHECK(pred.probabilities[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(pred.probabilities[1] == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(CondProbModel(labelled(Matrix(0, 2), {}, 2), spec), InputError);
        CHECK_THROWS_AS(CondProbModel(labelled(Matrix(1, 1, {0.0}), {0}, 2), spec, -1.0), InputError);
        const CondProbModel model(labelled(Matrix(1, 2, {0.0, 0.0}), {0}, 2), spec);
        CHECK_THROWS_AS(model.predict(std::vector<double>{1.0}), InputError);
    }
}

TEST_CASE("Nadaraya-Watson agrees with a weighted-count loop on blobs") {
    const Dataset support = blobs(90, 4);
    const Dataset queries = blobs(60, 5);
    for (int trial = 0; trial < 100; ++trial) {
        const KernelSpec spec(0.3 + 0.05 * trial);
        const double eps = trial % 2 == 0 ? 1e-8 : 0.1;
        const CondProbModel model(support, spec, eps);
        const Matrix batch = model.predict_batch(queries.features);
        for (std::size_t q = 0; q < queries.size(); ++q) {
            std::vector<double> count(3, 0.0);
            double total = 0.0;
            for (std::size_t j = 0; j < support.size(); ++j) {
                double s = 0.0;
                for (std::size_t c = 0; c < 2; ++c) {
                    const double diff = queries.features(q, c) - support.features(j, c);
                    s += diff * diff;
                }
                const double k = std::exp(-s / (2.0 * spec.sigma() * spec.sigma()));
                count[static_cast<std::size_t>(support.labels[j])] += k;
                total += k;
            }
            const auto p = model.predict(queries.features.row(q));
            double sum = 0.0;
            for (std::size_t c = 0; c < 3; ++c) {
                CHECK(std::abs(p[c] - (eps + count[c]) / (3.0 * eps + total)) <= 1e-12);
                CHECK(batch(q, c) == p[c]);
                CHECK(p[c] >= 0.0);
                CHECK(p[c] <= 1.0);
                sum += p[c];
            }
            CHECK(std::abs(sum - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("Nadaraya-Watson is invariant to support row order") {
    std::mt19937_64 rng(40);
    const Dataset support = random_dataset(80, 3, 4, rng);
    const Matrix queries = random_matrix(30, 3, rng);
    std::vector<std::size_t> perm(80);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const KernelSpec spec(1.0);
    const Matrix a = CondProbModel(support, spec).predict_batch(queries);
    const Matrix b = CondProbModel(support.subset(perm), spec).predict_batch(queries);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t c = 0; c < a.cols(); ++c) CHECK(std::abs(a(i, c) - b(i, c)) <= 1e-12);
    }
}
