#include "mmdval/corrupt.hpp"
#include "mmdval/error.hpp"
#include "mmdval/influence.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

using namespace mmdval;
using namespace mmdval::testing;

namespace {

OfflineResult score(const Dataset& train, const Dataset& val, double sigma, double lambda = kDefaultLambda,
                    std::size_t block = kDefaultBlockSize) {
    const KernelSpec spec(sigma);
    return score_offline(train, val, spec, lambda, CondProbModel(val, spec), block);
}

Dataset with_duplicate(Dataset data, std::size_t from, std::size_t to) {
    for (std::size_t c = 0; c < data.dim(); ++c) data.features(to, c) = data.features(from, c);
    data.labels[to] = data.labels[from];
    return data;
}

} // namespace

TEST_CASE("conditional influence examples") {
    CHECK(conditional_influence(std::vector<double>{0.0, 1.0, 0.0}, 1) == 0.0);
    CHECK(conditional_influence(std::vector<double>{0.0, 1.0}, 0) == -std::sqrt(2.0));
    const double v = conditional_influence(std::vector<double>{0.5, 0.3, 0.2}, 0);
    CHECK(std::abs(v + std::sqrt(0.38)) < 1e-15);
    CHECK(v == doctest::Approx(-0.61644).epsilon(1e-5));
    CHECK_THROWS_AS(conditional_influence(std::vector<double>{0.5, 0.6}, 0), InputError);
    CHECK_THROWS_AS(conditional_influence(std::vector<double>{1.1, -0.1}, 0), InputError);
    CHECK_THROWS_AS(conditional_influence(std::vector<double>{0.5, 0.5}, 2), InputError);
    CHECK_NOTHROW(conditional_influence(std::vector<double>{0.5, 0.5 + 5e-10}, 1));
}

TEST_CASE("marginal influence kernel limits") {
    SUBCASE("all identical") {
        Dataset train;
        train.features = Matrix(2, 1, {0.7, 0.7});
        train.labels = {0, 0};
        Dataset val;
        val.features = Matrix(1, 1, {0.7});
        val.labels = {0};
        const auto result = score(train, val, 1.0);
        CHECK(result.state.A == std::vector<double>{1.0, 1.0});
        CHECK(result.state.B == std::vector<double>{1.0, 1.0});
        CHECK(result.report.marginal == std::vector<double>{0.0, 0.0});
    }
    SUBCASE("isolated points and the point sitting on the validation point") {
        Dataset train;
        train.features = Matrix(3, 1, {0.0, 100.0, 200.0});
        train.labels = {0, 0, 0};
        Dataset val;
        val.features = Matrix(1, 1, {0.0});
        val.labels = {0};
        const auto result = score(train, val, 0.1);
        CHECK(std::abs(result.report.marginal[0] - 1.0) < 1e-12);
        CHECK(std::abs(result.report.marginal[1]) < 1e-12);
        CHECK(std::abs(result.report.marginal[2]) < 1e-12);
    }
    SUBCASE("fewer than two training points") {
        Dataset one;
        one.features = Matrix(1, 1, {0.0});
        one.labels = {0};
        CHECK_THROWS_AS(score(one, one, 1.0), InputError);
    }
}

TEST_CASE("offline state matches direct kernel arithmetic") {
    std::mt19937_64 rng(50);
    const Dataset train = random_dataset(25, 2, 3, rng);
    const Dataset val = random_dataset(12, 2, 3, rng);
    const KernelSpec spec(0.9);
    const auto result = score(train, val, 0.9, 0.2, 4);
    const CondProbModel model(val, spec);
    for (std::size_t i = 0; i < 25; ++i) {
        double a = 0.0, b = 0.0;
        for (std::size_t j = 0; j < 25; ++j) {
            if (j != i) a += kernel_eval(spec, train.features.row(i), train.features.row(j));
        }
        for (std::size_t j = 0; j < 12; ++j) b += kernel_eval(spec, train.features.row(i), val.features.row(j));
        const auto p = model.predict(train.features.row(i));
        double r = 0.0;
        for (int c = 0; c < 3; ++c) {
            const double d = p[static_cast<std::size_t>(c)] - (c == train.labels[i] ? 1.0 : 0.0);
            r += d * d;
        }
        r = std::sqrt(r);
        CHECK(std::abs(result.state.A[i] - a / 24.0) < 1e-14);
        CHECK(std::abs(result.state.B[i] - b / 12.0) < 1e-14);
        CHECK(std::abs(result.state.R[i] - r) < 1e-14);
        CHECK(result.state.A[i] > 0.0);
        CHECK(result.state.A[i] <= 1.0);
        CHECK(result.state.R[i] <= std::sqrt(2.0));
        CHECK(std::abs(result.train_kernel_sums[i] - a) < 1e-12);
        CHECK(std::abs(result.report.net[i] - (0.8 * (b / 12.0 - a / 24.0) - 0.2 * r)) < 1e-12);
        CHECK(std::abs(result.report.net[i] - (0.8 * result.report.marginal[i] + 0.2 * result.report.conditional[i])) <
              1e-12);
    }
}

TEST_CASE("report invariants: ranking sorts net, ties by index") {
    std::mt19937_64 rng(51);
    const auto result = score(random_dataset(200, 3, 2, rng), random_dataset(50, 3, 2, rng), 1.0);
    const auto& r = result.report;
    std::vector<std::size_t> sorted = r.ranking;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
    for (std::size_t p = 1; p < r.ranking.size(); ++p) CHECK(r.net[r.ranking[p - 1]] <= r.net[r.ranking[p]]);
    const auto pos = r.rank_of();
    for (std::size_t p = 0; p < r.ranking.size(); ++p) CHECK(pos[r.ranking[p]] == p);

    CHECK(rank_ascending(std::vector<double>{1.0, 0.0, 1.0, 0.0}) == std::vector<std::size_t>{1, 3, 0, 2});

    // Positive affine rescaling keeps the ranking.
    std::vector<double> scaled(r.net.size());
    std::transform(r.net.begin(), r.net.end(), scaled.begin(), [](double v) { return 3.5 * v + 0.25; });
    CHECK(rank_ascending(scaled) == r.ranking);
}

TEST_CASE("lambda limits") {
    std::mt19937_64 rng(52);
    const Dataset train = random_dataset(60, 2, 3, rng);
    const Dataset val = random_dataset(30, 2, 3, rng);
    const auto zero = score(train, val, 0.8, 0.0);
    const auto one = score(train, val, 0.8, 1.0);
    CHECK(zero.report.net == zero.report.marginal);
    CHECK(one.report.net == one.report.conditional);
    CHECK_THROWS_AS(score(train, val, 0.8, -0.1), InputError);
    CHECK_THROWS_AS(score(train, val, 0.8, 1.1), InputError);
}

TEST_CASE("duplicates receive identical scores") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        const Dataset train = with_duplicate(random_dataset(40, 3, 3, rng), 5, 31);
        const auto result = score(train, random_dataset(20, 3, 3, rng), 1.0, 0.3, 7);
        CHECK(std::abs(result.report.marginal[5] - result.report.marginal[31]) <= 1e-12);
        CHECK(std::abs(result.report.conditional[5] - result.report.conditional[31]) <= 1e-12);
        CHECK(std::abs(result.report.net[5] - result.report.net[31]) <= 1e-12);
    }
}

TEST_CASE("rigid motions leave scores unchanged") {
    std::mt19937_64 rng(54);
    const Dataset train = random_dataset(120, 2, 3, rng);
    const Dataset val = random_dataset(40, 2, 3, rng);
    const double angle = 0.7;
    auto move = [&](Dataset d) {
        for (std::size_t i = 0; i < d.size(); ++i) {
            const double x = d.features(i, 0), y = d.features(i, 1);
            d.features(i, 0) = std::cos(angle) * x - std::sin(angle) * y + 12.5;
            d.features(i, 1) = std::sin(angle) * x + std::cos(angle) * y - 3.0;
        }
        return d;
    };
    const auto a = score(train, val, 0.9, 0.1);
    const auto b = score(move(train), move(val), 0.9, 0.1);
    for (std::size_t i = 0; i < 120; ++i) {
        CHECK(std::abs(a.report.marginal[i] - b.report.marginal[i]) <= 1e-9);
        CHECK(std::abs(a.report.conditional[i] - b.report.conditional[i]) <= 1e-9);
        CHECK(std::abs(a.report.net[i] - b.report.net[i]) <= 1e-9);
    }
}

TEST_CASE("block size does not change the result; reruns are bit identical") {
    std::mt19937_64 rng(55);
    const Dataset train = random_dataset(301, 3, 2, rng);
    const Dataset val = random_dataset(77, 3, 2, rng);
    const auto reference = score(train, val, 1.1, 0.03, 1024);
    for (const std::size_t block : {1u, 16u, 64u, 300u}) {
        const auto other = score(train, val, 1.1, 0.03, block);
        for (std::size_t i = 0; i < 301; ++i) CHECK(std::abs(other.report.net[i] - reference.report.net[i]) <= 1e-10);
    }
    const auto again = score(train, val, 1.1, 0.03, 1024);
    CHECK(again.report.net == reference.report.net);
    CHECK(again.report.ranking == reference.report.ranking);
    std::ostringstream first, second;
    write_scores_csv(reference.report, first);
    write_scores_csv(again.report, second);
    CHECK(first.str() == second.str());
    CHECK(first.str().rfind("index,marginal,conditional,net,rank\n", 0) == 0);
}

TEST_CASE("label-flipped blobs sink to the bottom at lambda 0.5") {
    const Dataset clean = blobs(500, 61);
    const Dataset val = blobs(300, 62);
    const auto [train, plan] = corrupt(clean, {Mechanism::label_flip, 0.2, 63});
    ScoringOptions options;
    options.lambda = 0.5;
    const auto result = score_datasets(train, val, options);
    const auto pos = result.report.rank_of();
    for (const auto i : plan.corrupted_indices) CHECK(pos[i] < 125);
}

TEST_CASE("score_datasets resolves the bandwidth by the median heuristic") {
    std::mt19937_64 rng(56);
    const Dataset train = random_dataset(50, 2, 2, rng);
    const Dataset val = random_dataset(20, 2, 2, rng);
    const double sigma = bandwidth_for(train, val);
    CHECK(sigma == median_heuristic(concat(train, val).features, kDefaultSamplePairs, 0));
    const auto result = score_datasets(train, val, ScoringOptions{});
    CHECK(result.state.spec.sigma() == sigma);
    ScoringOptions fixed;
    fixed.sigma = 0.37;
    CHECK(score_datasets(train, val, fixed).state.spec.sigma() == 0.37);
}

TEST_CASE("kernel mean difference against brute force") {
    std::mt19937_64 rng(57);
    const Matrix points = random_matrix(9, 1, rng);
    const Matrix p = random_matrix(40, 1, rng);
    const Matrix q = random_matrix(30, 1, rng, 2.0);
    const KernelSpec spec(0.6);
    const auto diff = kernel_mean_difference(spec, points, p, q, 8);
    for (std::size_t i = 0; i < 9; ++i) {
        double mp = 0.0, mq = 0.0;
        for (std::size_t j = 0; j < 40; ++j) mp += kernel_eval(spec, points.row(i), p.row(j));
        for (std::size_t j = 0; j < 30; ++j) mq += kernel_eval(spec, points.row(i), q.row(j));
        CHECK(std::abs(diff[i] - (mp / 40.0 - mq / 30.0)) < 1e-14);
    }
}
