#pragma once

#include "mmdval/cond_prob.hpp"
#include "mmdval/dataset.hpp"
#include "mmdval/kernel.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace mmdval {

inline constexpr double kDefaultLambda = 0.03;
inline constexpr std::size_t kDefaultSamplePairs = 10000;

/// Per-point cached statistics behind every score.
///   A_i  mean kernel to the other training points
///   B_i  mean kernel to the validation points
///   R_i  |e_{y_i} - P(.|x_i)|_2, the label residual
struct ValuationState {
    std::vector<double> A;
    std::vector<double> B;
    std::vector<double> R;
    std::size_t n_train = 0;
    std::size_t n_val = 0;
    double lambda = kDefaultLambda;
    KernelSpec spec{1.0};
};

struct ScoreReport {
    std::vector<double> marginal;
    std::vector<double> conditional;
    std::vector<double> net;
    std::vector<std::size_t> ranking;  // indices by ascending net, least valuable first

    std::size_t size() const noexcept { return net.size(); }
    /// rank_of()[i] = position of point i in `ranking`.
    std::vector<std::size_t> rank_of() const;
};

/// B_i - A_i.
double marginal_influence(const ValuationState& state, std::size_t i);

/// -|prob - e_y|_2, in [-sqrt(2), 0].
double conditional_influence(std::span<const double> prob, int label);

/// (1 - lambda) (B_i - A_i) - lambda R_i.
double net_influence(const ValuationState& state, std::size_t i);

/// Argsort ascending; ties go to the lower index.
std::vector<std::size_t> rank_ascending(std::span<const double> values);

ScoreReport make_report(const ValuationState& state);

struct OfflineResult {
    ValuationState state;
    ScoreReport report;
    std::vector<double> train_kernel_sums;  // sum_{j != i} k(x_i, x_j), i.e. A_i * (n - 1)
};

/// One pass over train x train and train x validation kernel sums, evaluated
/// in block x block tiles.
OfflineResult score_offline(const Dataset& train, const Dataset& validation, const KernelSpec& spec,
                            double lambda, const CondProbModel& prob_model,
                            std::size_t block_size = kDefaultBlockSize);

/// Median heuristic on the union of train and validation features.
double bandwidth_for(const Dataset& train, const Dataset& validation,
                     std::size_t sample_pairs = kDefaultSamplePairs, std::uint64_t seed = 0);

/// The knobs score_datasets needs; sigma unset means median heuristic.
struct ScoringOptions {
    std::optional<double> sigma;
    std::size_t sample_pairs = kDefaultSamplePairs;
    double lambda = kDefaultLambda;
    double smoothing = kDefaultSmoothing;
    std::size_t block_size = kDefaultBlockSize;
    std::uint64_t seed = 0;
};

/// Resolves the bandwidth, fits the conditional model on `validation` and
/// runs score_offline.
OfflineResult score_datasets(const Dataset& train, const Dataset& validation, const ScoringOptions& options);

/// mean_p k(x, .) - mean_q k(x, .) for every row of `points`: the population
/// form of the marginal influence with p as the reference distribution.
std::vector<double> kernel_mean_difference(const KernelSpec& spec, const Matrix& points, const Matrix& p_samples,
                                           const Matrix& q_samples, std::size_t block_size = kDefaultBlockSize);

/// `index,marginal,conditional,net,rank`, 17 significant digits.
void write_scores_csv(const ScoreReport& report, std::ostream& out);

} // namespace mmdval
