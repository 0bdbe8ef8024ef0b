#pragma once

#include "mmdval/corrupt.hpp"
#include "mmdval/dataset.hpp"
#include "mmdval/influence.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace mmdval {

/// Cumulative share of corrupted points recovered when inspecting the lowest
/// net scores first.
struct DetectionCurve {
    std::vector<double> inspected_fraction;
    std::vector<double> recovered_fraction;
};

enum class RemovalDirection { remove_lowest, remove_highest };

std::string_view to_string(RemovalDirection d);

struct RemovalCurve {
    std::vector<double> removed_fraction;
    std::vector<double> test_accuracy;
    RemovalDirection direction = RemovalDirection::remove_lowest;
};

/// 0.01, 0.02, ..., 0.50
std::vector<double> default_detection_grid();
/// 0, 0.05, 0.10, ..., 0.30
std::vector<double> default_removal_grid();

/// For each f in the grid, the fraction of plan.corrupted_indices among the
/// floor(f n) lowest-ranked points.
DetectionCurve detection_curve(const ScoreReport& report, const CorruptionPlan& plan, std::span<const double> grid);

/// |bottom floor(fraction n) intersect corrupted| / |corrupted|.
double detection_accuracy(const ScoreReport& report, const CorruptionPlan& plan, double fraction = 0.2);

struct SweepRow {
    std::size_t size = 0;
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation across seeds
    std::vector<double> accuracies;
};

/// For each size and each seed in [0, seeds), scores `train` against a
/// size-point subsample of val_pool (rows kept in pool order) and records
/// detection accuracy.
std::vector<SweepRow> validation_size_sweep(const Dataset& train, const CorruptionPlan& plan, const Dataset& val_pool,
                                            std::span<const std::size_t> sizes, std::size_t seeds,
                                            const ScoringOptions& options, double detect_fraction = 0.2);

inline constexpr std::size_t kDefaultNeighbours = 5;

/// Majority vote of the k nearest training points (Euclidean). Vote ties go to
/// the tied class whose member is nearest; distance ties to the lower index.
std::vector<int> knn_predict(const Dataset& train, const Matrix& queries, std::size_t k = kDefaultNeighbours);
double knn_accuracy(const Dataset& train, const Dataset& test, std::size_t k = kDefaultNeighbours);

/// Removes the given fraction from one end of the net ranking, fits k-NN on
/// the rest and reports test accuracy.
RemovalCurve point_removal_curve(const Dataset& train, const ScoreReport& report, const Dataset& test,
                                 std::span<const double> grid, RemovalDirection direction,
                                 std::size_t k = kDefaultNeighbours);

double mean(std::span<const double> values);
double sample_std(std::span<const double> values);

void write_detection_csv(const DetectionCurve& curve, std::ostream& out);
void write_removal_csv(const RemovalCurve& curve, std::ostream& out);
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

} // namespace mmdval
