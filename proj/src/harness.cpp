#include "mmdval/harness.hpp"

#include "mmdval/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

namespace mmdval {

std::string_view to_string(RemovalDirection d) {
    return d == RemovalDirection::remove_lowest ? "remove_lowest" : "remove_highest";
}

std::vector<double> default_detection_grid() {
    std::vector<double> grid;
    for (int p = 1; p <= 50; ++p) grid.push_back(p / 100.0);
    return grid;
}

std::vector<double> default_removal_grid() {
    std::vector<double> grid;
    for (int p = 0; p <= 30; p += 5) grid.push_back(p / 100.0);
    return grid;
}

namespace {

void require_plan(const ScoreReport& report, const CorruptionPlan& plan) {
    if (plan.corrupted_indices.empty()) throw InputError("corruption plan is empty");
    for (const auto i : plan.corrupted_indices) {
        if (i >= report.size()) {
            throw InputError("corrupted index " + std::to_string(i) + " out of range for " +
                             std::to_string(report.size()) + " points");
        }
    }
}

std::size_t inspected_count(double fraction, std::size_t n) {
    return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

} // namespace

DetectionCurve detection_curve(const ScoreReport& report, const CorruptionPlan& plan, std::span<const double> grid) {
    require_plan(report, plan);
    const std::size_t n = report.size();
    std::vector<char> corrupted(n, 0);
    for (const auto i : plan.corrupted_indices) corrupted[i] = 1;

    // found_prefix[c] = corrupted points among the first c ranked.
    std::vector<std::size_t> found_prefix(n + 1, 0);
    for (std::size_t r = 0; r < n; ++r) found_prefix[r + 1] = found_prefix[r] + corrupted[report.ranking[r]];

    DetectionCurve curve;
    const double total = static_cast<double>(plan.corrupted_indices.size());
    for (const double f : grid) {
        if (!(f > 0.0 && f <= 1.0)) throw InputError("detection grid fractions must lie in (0, 1]");
        const std::size_t c = std::min(n, inspected_count(f, n));
        curve.inspected_fraction.push_back(f);
        curve.recovered_fraction.push_back(static_cast<double>(found_prefix[c]) / total);
    }
    return curve;
}

double detection_accuracy(const ScoreReport& report, const CorruptionPlan& plan, double fraction) {
    const double grid[] = {fraction};
    return detection_curve(report, plan, grid).recovered_fraction.front();
}

double mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_std(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    const double m = mean(values);
    double acc = 0.0;
    for (const double v : values) acc += (v - m) * (v - m);
    return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

std::vector<SweepRow> validation_size_sweep(const Dataset& train, const CorruptionPlan& plan, const Dataset& val_pool,
                                            std::span<const std::size_t> sizes, std::size_t seeds,
                                            const ScoringOptions& options, double detect_fraction) {
    if (seeds == 0) throw InputError("validation sweep needs at least one seed");
    std::vector<SweepRow> rows;
    for (const std::size_t size : sizes) {
        if (size == 0 || size > val_pool.size()) {
            throw InputError("validation size " + std::to_string(size) + " exceeds pool of " +
                             std::to_string(val_pool.size()));
        }
        SweepRow row;
        row.size = size;
        for (std::size_t s = 0; s < seeds; ++s) {
            std::mt19937_64 rng(options.seed + 1000003ULL * (s + 1) + size);
            std::vector<std::size_t> pick(val_pool.size());
            std::iota(pick.begin(), pick.end(), std::size_t{0});
            std::shuffle(pick.begin(), pick.end(), rng);
            pick.resize(size);
            std::sort(pick.begin(), pick.end());
            const Dataset validation = val_pool.subset(pick);
            const auto scored = score_datasets(train, validation, options);
            row.accuracies.push_back(detection_accuracy(scored.report, plan, detect_fraction));
        }
        row.mean = mean(row.accuracies);
        row.std = sample_std(row.accuracies);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<int> knn_predict(const Dataset& train, const Matrix& queries, std::size_t k) {
    if (train.size() < k || k == 0) {
        throw InputError("k-NN needs at least k = " + std::to_string(k) + " training points, got " +
                         std::to_string(train.size()));
    }
    if (queries.cols() != train.dim()) throw InputError("k-NN query dimension mismatch");
    std::vector<int> out(queries.rows());
    std::vector<std::pair<double, std::size_t>> dist(train.size());
    std::vector<std::size_t> votes(static_cast<std::size_t>(train.num_classes));
    for (std::size_t q = 0; q < queries.rows(); ++q) {
        for (std::size_t i = 0; i < train.size(); ++i) {
            dist[i] = {squared_distance(queries.row(q), train.features.row(i)), i};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        std::fill(votes.begin(), votes.end(), 0);
        for (std::size_t r = 0; r < k; ++r) ++votes[static_cast<std::size_t>(train.labels[dist[r].second])];
        const std::size_t best = *std::max_element(votes.begin(), votes.end());
        // Nearest neighbour whose class reaches the top vote count.
        for (std::size_t r = 0; r < k; ++r) {
            const int label = train.labels[dist[r].second];
            if (votes[static_cast<std::size_t>(label)] == best) {
                out[q] = label;
                break;
            }
        }
    }
    return out;
}

double knn_accuracy(const Dataset& train, const Dataset& test, std::size_t k) {
    if (test.size() == 0) throw InputError("test set is empty");
    const auto predicted = knn_predict(train, test.features, k);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) correct += predicted[i] == test.labels[i];
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

RemovalCurve point_removal_curve(const Dataset& train, const ScoreReport& report, const Dataset& test,
                                 std::span<const double> grid, RemovalDirection direction, std::size_t k) {
    if (test.size() == 0) throw InputError("point removal needs a non-empty test set");
    if (report.size() != train.size()) throw InputError("score report does not match the training set");
    const std::size_t n = train.size();
    RemovalCurve curve;
    curve.direction = direction;
    double previous = -1.0;
    for (const double f : grid) {
        if (!(f >= 0.0 && f < 1.0) || f <= previous) {
            throw InputError("removal grid must be strictly increasing within [0, 1)");
        }
        previous = f;
        const std::size_t removed = inspected_count(f, n);
        if (n - removed < k) {
            throw InputError("removing " + std::to_string(removed) + " of " + std::to_string(n) +
                             " points leaves fewer than k = " + std::to_string(k));
        }
        std::vector<std::size_t> keep;
        keep.reserve(n - removed);
        if (direction == RemovalDirection::remove_lowest) {
            keep.assign(report.ranking.begin() + static_cast<std::ptrdiff_t>(removed), report.ranking.end());
        } else {
            keep.assign(report.ranking.begin(), report.ranking.end() - static_cast<std::ptrdiff_t>(removed));
        }
        std::sort(keep.begin(), keep.end());
        curve.removed_fraction.push_back(f);
        curve.test_accuracy.push_back(knn_accuracy(train.subset(keep), test, k));
    }
    return curve;
}

void write_detection_csv(const DetectionCurve& curve, std::ostream& out) {
    out << "inspected_fraction,recovered_fraction\n";
    char buf[64];
    for (std::size_t i = 0; i < curve.inspected_fraction.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.4f,%.17g\n", curve.inspected_fraction[i], curve.recovered_fraction[i]);
        out << buf;
    }
}

void write_removal_csv(const RemovalCurve& curve, std::ostream& out) {
    out << "removed_fraction,test_accuracy,direction\n";
    char buf[96];
    for (std::size_t i = 0; i < curve.removed_fraction.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.4f,%.17g,%s\n", curve.removed_fraction[i], curve.test_accuracy[i],
                      std::string(to_string(curve.direction)).c_str());
        out << buf;
    }
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << "size,mean,std,seeds\n";
    char buf[96];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%zu\n", row.size, row.mean, row.std, row.accuracies.size());
        out << buf;
    }
}

} // namespace mmdval
