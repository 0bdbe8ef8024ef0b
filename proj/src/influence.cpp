#include "mmdval/influence.hpp"

#include "mmdval/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

namespace mmdval {

namespace {

void require_index(const ValuationState& state, std::size_t i) {
    if (state.n_train < 2) throw InputError("influence needs at least 2 training points");
    if (i >= state.n_train) {
        throw InputError("point index " + std::to_string(i) + " out of range for " +
                         std::to_string(state.n_train) + " training points");
    }
}

void require_lambda(double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw InputError("lambda must lie in [0, 1], got " + std::to_string(lambda));
    }
}

} // namespace

std::vector<std::size_t> ScoreReport::rank_of() const {
    std::vector<std::size_t> ranks(ranking.size());
    for (std::size_t r = 0; r < ranking.size(); ++r) ranks[ranking[r]] = r;
    return ranks;
}

double marginal_influence(const ValuationState& state, std::size_t i) {
    require_index(state, i);
    return state.B[i] - state.A[i];
}

double conditional_influence(std::span<const double> prob, int label) {
    constexpr double tol = 1e-9;
    if (label < 0 || static_cast<std::size_t>(label) >= prob.size()) {
        throw InputError("label " + std::to_string(label) + " outside probability vector of size " +
                         std::to_string(prob.size()));
    }
    double sum = 0.0;
    double sq = 0.0;
    for (std::size_t c = 0; c < prob.size(); ++c) {
        const double p = prob[c];
        if (!(p >= -tol && p <= 1.0 + tol)) {
            throw InputError("probability component " + std::to_string(c) + " = " + std::to_string(p) +
                             " outside [0, 1]");
        }
        sum += p;
        const double diff = c == static_cast<std::size_t>(label) ? p - 1.0 : p;
        sq += diff * diff;
    }
    if (std::abs(sum - 1.0) > tol) {
        throw InputError("probability vector sums to " + std::to_string(sum));
    }
    return -std::sqrt(sq);
}

double net_influence(const ValuationState& state, std::size_t i) {
    require_index(state, i);
    return (1.0 - state.lambda) * (state.B[i] - state.A[i]) - state.lambda * state.R[i];
}

std::vector<std::size_t> rank_ascending(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    return order;
}

ScoreReport make_report(const ValuationState& state) {
    require_lambda(state.lambda);
    const std::size_t n = state.n_train;
    if (state.A.size() != n || state.B.size() != n || state.R.size() != n) {
        throw InvariantError("valuation state vectors do not match n_train");
    }
    ScoreReport report;
    report.marginal.resize(n);
    report.conditional.resize(n);
    report.net.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        report.marginal[i] = state.B[i] - state.A[i];
        report.conditional[i] = -state.R[i];
        report.net[i] = (1.0 - state.lambda) * report.marginal[i] + state.lambda * report.conditional[i];
    }
    report.ranking = rank_ascending(report.net);
    return report;
}

OfflineResult score_offline(const Dataset& train, const Dataset& validation, const KernelSpec& spec,
                            double lambda, const CondProbModel& prob_model, std::size_t block_size) {
    require_lambda(lambda);
    if (train.size() < 2) throw InputError("scoring needs at least 2 training points");
    if (validation.size() < 1) throw InputError("scoring needs at least 1 validation point");
    if (train.dim() != validation.dim() || train.dim() != prob_model.dim()) {
        throw InputError("train, validation and conditional model dimensions disagree");
    }
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (train.labels[i] < 0 || train.labels[i] >= prob_model.num_classes()) {
            throw InputError("row " + std::to_string(i) + ": training label " + std::to_string(train.labels[i]) +
                             " not in [0, " + std::to_string(prob_model.num_classes()) + ")");
        }
    }

    const std::size_t n = train.size();
    OfflineResult result;
    ValuationState& state = result.state;
    state.n_train = n;
    state.n_val = validation.size();
    state.lambda = lambda;
    state.spec = spec;

    result.train_kernel_sums = kernel_row_sums_excluding_self(spec, train.features, block_size);
    state.A.resize(n);
    const double others = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) state.A[i] = result.train_kernel_sums[i] / others;

    // With the model supported on the validation set, one pass over validation
    // yields both B_i and P(.|x_i).
    const bool shared = prob_model.supported_by(validation, spec);
    std::vector<double> val_sums;
    if (!shared) val_sums = kernel_row_sums(spec, train.features, validation.features, block_size);
    state.B.resize(n);
    state.R.resize(n);
    const double n_val = static_cast<double>(validation.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto pred = prob_model.predict_with_mass(train.features.row(i));
        state.B[i] = (shared ? pred.kernel_mass : val_sums[i]) / n_val;
        state.R[i] = -conditional_influence(pred.probabilities, train.labels[i]);
    }
    result.report = make_report(state);
    return result;
}

double bandwidth_for(const Dataset& train, const Dataset& validation, std::size_t sample_pairs, std::uint64_t seed) {
    return median_heuristic(vstack(train.features, validation.features), sample_pairs, seed);
}

OfflineResult score_datasets(const Dataset& train, const Dataset& validation, const ScoringOptions& options) {
    const double sigma = options.sigma ? *options.sigma
                                       : bandwidth_for(train, validation, options.sample_pairs, options.seed);
    const KernelSpec spec(sigma);
    Dataset support = validation;
    support.num_classes = std::max(train.num_classes, validation.num_classes);
    const CondProbModel model(support, spec, options.smoothing);
    return score_offline(train, support, spec, options.lambda, model, options.block_size);
}

std::vector<double> kernel_mean_difference(const KernelSpec& spec, const Matrix& points, const Matrix& p_samples,
                                           const Matrix& q_samples, std::size_t block_size) {
    if (p_samples.empty() || q_samples.empty()) throw InputError("kernel mean difference needs samples");
    auto p_sums = kernel_row_sums(spec, points, p_samples, block_size);
    const auto q_sums = kernel_row_sums(spec, points, q_samples, block_size);
    const double np = static_cast<double>(p_samples.rows());
    const double nq = static_cast<double>(q_samples.rows());
    for (std::size_t i = 0; i < p_sums.size(); ++i) p_sums[i] = p_sums[i] / np - q_sums[i] / nq;
    return p_sums;
}

void write_scores_csv(const ScoreReport& report, std::ostream& out) {
    const auto ranks = report.rank_of();
    out << "index,marginal,conditional,net,rank\n";
    char buf[128];
    for (std::size_t i = 0; i < report.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%zu\n", i, report.marginal[i], report.conditional[i],
                      report.net[i], ranks[i]);
        out << buf;
    }
}

} // namespace mmdval
