#include "mmdval/streaming.hpp"

#include "mmdval/error.hpp"
#include "mmdval/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>

namespace mmdval {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

Dataset with_classes(Dataset data, int classes) {
    data.num_classes = classes;
    return data;
}

} // namespace

StreamState stream_init(const Dataset& initial_train, const Dataset& validation, const KernelSpec& spec,
                        double lambda, double smoothing, std::size_t block_size) {
    if (validation.size() == 0) throw InputError("streaming needs a non-empty validation set");
    if (initial_train.size() < 2) throw InputError("streaming needs at least 2 initial training points");
    const int classes = std::max(initial_train.num_classes, validation.num_classes);
    Dataset support = with_classes(validation, classes);
    CondProbModel model(support, spec, smoothing);
    OfflineResult offline = score_offline(initial_train, support, spec, lambda, model, block_size);
    return StreamState{std::move(offline.state),
                       std::move(offline.report),
                       with_classes(initial_train, classes),
                       std::move(offline.train_kernel_sums),
                       std::move(support),
                       std::move(model),
                       0,
                       block_size};
}

void stream_update(StreamState& stream, const Dataset& batch) {
    const std::size_t m = batch.size();
    if (m == 0) throw InputError("stream batch is empty");
    if (batch.dim() != stream.train.dim()) {
        throw InputError("stream batch has dimension " + std::to_string(batch.dim()) + ", expected " +
                         std::to_string(stream.train.dim()));
    }
    for (std::size_t j = 0; j < m; ++j) {
        if (batch.labels[j] < 0 || batch.labels[j] >= stream.model.num_classes()) {
            throw InputError("batch row " + std::to_string(j) + ": label " + std::to_string(batch.labels[j]) +
                             " not in [0, " + std::to_string(stream.model.num_classes()) + ")");
        }
    }

    const KernelSpec& spec = stream.state.spec;
    const Matrix& old_x = stream.train.features;
    const Matrix& new_x = batch.features;
    const std::size_t n_old = old_x.rows();
    const std::size_t block = stream.block_size;
    const std::size_t row_blocks = (n_old + block - 1) / block;

    // Old x new: each old row gains m kernel terms; the column sums of each
    // row block are kept apart and folded in block order.
    std::vector<double> column_partials(row_blocks * m, 0.0);
    auto& sums = stream.train_kernel_sums;
    parallel_for(row_blocks, [&](std::size_t rb) {
        const std::size_t r0 = rb * block;
        const std::size_t r1 = std::min(n_old, r0 + block);
        double* cols = column_partials.data() + rb * m;
        for (std::size_t i = r0; i < r1; ++i) {
            const auto xi = old_x.row(i);
            double acc = sums[i];
            for (std::size_t j = 0; j < m; ++j) {
                const double k = spec.from_squared_distance(squared_distance(xi, new_x.row(j)));
                acc += k;
                cols[j] += k;
            }
            sums[i] = acc;
        }
        spec.count(static_cast<std::uint64_t>(r1 - r0) * m);
    });

    std::vector<double> new_sums(m, 0.0);
    for (std::size_t rb = 0; rb < row_blocks; ++rb) {
        for (std::size_t j = 0; j < m; ++j) new_sums[j] += column_partials[rb * m + j];
    }
    // New x new, upper triangle only; the self term is never added.
    for (std::size_t i = 0; i < m; ++i) {
        const auto xi = new_x.row(i);
        for (std::size_t j = i + 1; j < m; ++j) {
            const double k = spec.from_squared_distance(squared_distance(xi, new_x.row(j)));
            new_sums[i] += k;
            new_sums[j] += k;
        }
    }
    spec.count(static_cast<std::uint64_t>(m) * (m - 1) / 2);

    ValuationState& state = stream.state;
    const double n_val = static_cast<double>(state.n_val);
    const bool shared = stream.model.supported_by(stream.validation, spec);
    for (std::size_t j = 0; j < m; ++j) {
        const auto pred = stream.model.predict_with_mass(new_x.row(j));
        const double mass = shared ? pred.kernel_mass : kernel_row_sums(spec, new_x.slice_rows(j, 1),
                                                                        stream.validation.features)[0];
        state.B.push_back(mass / n_val);
        state.R.push_back(-conditional_influence(pred.probabilities, batch.labels[j]));
    }

    sums.insert(sums.end(), new_sums.begin(), new_sums.end());
    for (std::size_t j = 0; j < m; ++j) {
        stream.train.features.append_row(new_x.row(j));
        stream.train.labels.push_back(batch.labels[j]);
    }
    state.n_train = n_old + m;
    const double others = static_cast<double>(state.n_train - 1);
    state.A.resize(state.n_train);
    for (std::size_t i = 0; i < state.n_train; ++i) state.A[i] = sums[i] / others;

    stream.report = make_report(state);
    ++stream.processed_batches;
}

CostProbe stream_cost_probe(std::size_t n_t, std::size_t m, std::size_t dim, std::size_t trials, std::uint64_t seed) {
    if (n_t < 2 || m < 1 || dim < 1 || trials < 1) throw InputError("cost probe sizes must be positive (n_t >= 2)");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto random_dataset = [&](std::size_t n) {
        std::vector<double> values(n * dim);
        for (auto& v : values) v = gauss(rng);
        Dataset data;
        data.features = Matrix(n, dim, std::move(values));
        data.labels.resize(n);
        for (std::size_t i = 0; i < n; ++i) data.labels[i] = static_cast<int>(i % 2);
        data.num_classes = 2;
        return data;
    };
    const Dataset initial = random_dataset(n_t);
    const Dataset batch = random_dataset(m);
    const Dataset validation = random_dataset(std::max<std::size_t>(2, std::min<std::size_t>(n_t, 300)));
    const KernelSpec spec(bandwidth_for(initial, validation));
    const StreamState base = stream_init(initial, validation, spec, kDefaultLambda);
    const Dataset all = concat(initial, batch);

    std::vector<double> inc;
    std::vector<double> rec;
    for (std::size_t t = 0; t < trials; ++t) {
        StreamState copy = base;
        auto start = Clock::now();
        stream_update(copy, batch);
        inc.push_back(seconds_since(start));

        start = Clock::now();
        const CondProbModel model(validation, spec);
        const auto offline = score_offline(all, validation, spec, kDefaultLambda, model);
        rec.push_back(seconds_since(start));
        if (offline.report.size() != copy.report.size()) throw InvariantError("cost probe size mismatch");
    }
    auto median = [](std::vector<double>& v) {
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
        return v[v.size() / 2];
    };
    return {median(inc), median(rec)};
}

StreamRun simulate_stream(const Dataset& stream, const Dataset& validation, const KernelSpec& spec,
                          const StreamRunOptions& options) {
    if (options.batch_size == 0) throw InputError("batch size must be positive");
    const std::size_t n = stream.size();
    const std::size_t first = std::min(n, options.batch_size);
    if (first < 2) throw InputError("the first stream batch needs at least 2 points");

    std::vector<BatchTiming> timings;
    auto time_recompute = [&](std::size_t points) {
        if (!options.time_recompute) return -1.0;
        const auto start = Clock::now();
        const Dataset seen = stream.slice(0, points);
        Dataset support = validation;
        support.num_classes = std::max(stream.num_classes, validation.num_classes);
        const CondProbModel model(support, spec, options.smoothing);
        const auto offline = score_offline(seen, support, spec, options.lambda, model, options.block_size);
        const double elapsed = seconds_since(start);
        if (offline.report.size() != points) throw InvariantError("recompute size mismatch");
        return elapsed;
    };

    auto start = Clock::now();
    StreamState state = stream_init(stream.slice(0, first), validation, spec, options.lambda, options.smoothing,
                                    options.block_size);
    const double t_init = seconds_since(start);
    timings.push_back({0, first, t_init, time_recompute(first)});

    std::size_t offset = first;
    for (std::size_t b = 1; offset < n; ++b) {
        const std::size_t m = std::min(options.batch_size, n - offset);
        const Dataset batch = stream.slice(offset, m);
        start = Clock::now();
        stream_update(state, batch);
        const double t_inc = seconds_since(start);
        offset += m;
        timings.push_back({b, offset, t_inc, time_recompute(offset)});
    }
    return {std::move(state), std::move(timings)};
}

void write_timing_csv(const std::vector<BatchTiming>& timings, std::ostream& out) {
    out << "batch,cum_points,t_incremental_s,t_recompute_s\n";
    char buf[128];
    for (const auto& t : timings) {
        std::snprintf(buf, sizeof buf, "%zu,%zu,%.9f,%.9f\n", t.batch, t.cum_points, t.t_incremental, t.t_recompute);
        out << buf;
    }
}

} // namespace mmdval
