#pragma once

#include "mmdval/cond_prob.hpp"
#include "mmdval/dataset.hpp"
#include "mmdval/influence.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace mmdval {

/// Valuation state that grows by appended batches. The validation set and its
/// conditional model are frozen at construction. Single writer.
struct StreamState {
    ValuationState state;
    ScoreReport report;
    Dataset train;                          // every point seen so far, in arrival order
    std::vector<double> train_kernel_sums;  // raw sum_{j != i} k(x_i, x_j); A_i = sum / (n - 1)
    Dataset validation;
    CondProbModel model;
    std::size_t processed_batches = 0;
    std::size_t block_size = kDefaultBlockSize;
};

/// Offline pass over the initial split; scores match score_offline exactly.
StreamState stream_init(const Dataset& initial_train, const Dataset& validation, const KernelSpec& spec,
                        double lambda, double smoothing = kDefaultSmoothing,
                        std::size_t block_size = kDefaultBlockSize);

/// Appends `batch` (m rows). Cost: n_t m kernels for old/new pairs,
/// m (m - 1) / 2 within the batch and m n_val against validation. B and R of
/// existing points are untouched.
void stream_update(StreamState& stream, const Dataset& batch);

struct CostProbe {
    double t_incremental = 0.0;  // seconds, median over trials
    double t_recompute = 0.0;
};

/// Times one m-point update on an n_t-point state against one full offline
/// recompute of the n_t + m points, on synthetic Gaussian data.
CostProbe stream_cost_probe(std::size_t n_t, std::size_t m, std::size_t dim, std::size_t trials,
                            std::uint64_t seed = 0);

struct BatchTiming {
    std::size_t batch = 0;
    std::size_t cum_points = 0;
    double t_incremental = 0.0;
    double t_recompute = 0.0;  // negative when recompute timing is disabled
};

struct StreamRunOptions {
    std::size_t batch_size = 100;
    double lambda = kDefaultLambda;
    double smoothing = kDefaultSmoothing;
    std::size_t block_size = kDefaultBlockSize;
    bool time_recompute = true;
};

struct StreamRun {
    StreamState final_state;
    std::vector<BatchTiming> timings;
};

/// Feeds `stream` to a StreamState batch by batch (the first batch
/// initialises; a short last batch is allowed). With time_recompute, every
/// step also times a from-scratch score_offline on the points seen so far.
StreamRun simulate_stream(const Dataset& stream, const Dataset& validation, const KernelSpec& spec,
                          const StreamRunOptions& options);

/// `batch,cum_points,t_incremental_s,t_recompute_s`.
void write_timing_csv(const std::vector<BatchTiming>& timings, std::ostream& out);

} // namespace mmdval
