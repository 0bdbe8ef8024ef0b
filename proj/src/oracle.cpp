#include "mmdval/oracle.hpp"

#include "mmdval/error.hpp"
#include "mmdval/influence.hpp"
#include "mmdval/mmd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mmdval {

namespace {

void require_compatible(const Dataset& train, const Dataset& validation) {
    if (validation.size() == 0) throw InputError("oracle needs a non-empty validation set");
    if (train.dim() != validation.dim()) throw InputError("train and validation dimensions disagree");
}

double pair_kernel(const KernelSpec& spec, const Matrix& a, std::size_t i, const Matrix& b, std::size_t j) {
    return spec.from_squared_distance(squared_distance(a.row(i), b.row(j)));
}

} // namespace

std::vector<double> loo_mmd_values(const Dataset& train, const Dataset& validation, const KernelSpec& spec) {
    require_compatible(train, validation);
    const std::size_t n = train.size();
    const std::size_t nv = validation.size();
    if (n < 3) throw InputError("leave-one-out needs at least 3 training points, got " + std::to_string(n));
    if (nv < 2) throw InputError("unbiased MMD needs at least 2 validation points");

    const Matrix& t = train.features;
    const Matrix& v = validation.features;
    std::vector<double> train_row(n, 0.0);  // sum_{j != i} k(t_i, t_j)
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double k = pair_kernel(spec, t, i, t, j);
            train_row[i] += k;
            train_row[j] += k;
        }
    }
    std::vector<double> cross_row(n, 0.0);  // sum_v k(t_i, v)
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < nv; ++j) cross_row[i] += pair_kernel(spec, t, i, v, j);
    }
    double val_pairs = 0.0;
    for (std::size_t i = 0; i < nv; ++i) {
        for (std::size_t j = i + 1; j < nv; ++j) val_pairs += 2.0 * pair_kernel(spec, v, i, v, j);
    }
    const double train_pairs = std::accumulate(train_row.begin(), train_row.end(), 0.0);
    const double cross = std::accumulate(cross_row.begin(), cross_row.end(), 0.0);

    const double dn = static_cast<double>(n);
    const double dv = static_cast<double>(nv);
    const double val_term = val_pairs / (dv * (dv - 1.0));
    const double full = val_term + train_pairs / (dn * (dn - 1.0)) - 2.0 * cross / (dv * dn);

    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double reduced = val_term + (train_pairs - 2.0 * train_row[i]) / ((dn - 1.0) * (dn - 2.0)) -
                               2.0 * (cross - cross_row[i]) / (dv * (dn - 1.0));
        values[i] = reduced - full;
    }
    return values;
}

std::vector<double> loo_mmd_values_naive(const Dataset& train, const Dataset& validation, const KernelSpec& spec) {
    require_compatible(train, validation);
    const std::size_t n = train.size();
    if (n < 3) throw InputError("leave-one-out needs at least 3 training points, got " + std::to_string(n));
    const double full = mmd2(spec, validation.features, train.features, MmdVariant::unbiased).value;
    std::vector<double> values(n);
    std::vector<std::size_t> keep(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t w = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) keep[w++] = j;
        }
        const Matrix reduced = train.features.select_rows(keep);
        values[i] = mmd2(spec, validation.features, reduced, MmdVariant::unbiased).value - full;
    }
    return values;
}

DirectionalDerivativeOracle::DirectionalDerivativeOracle(const Dataset& train, const Dataset& validation,
                                                         const KernelSpec& spec) {
    require_compatible(train, validation);
    const std::size_t n = train.size();
    const std::size_t nv = validation.size();
    if (n < 1) throw InputError("directional derivative needs training points");
    const Matrix& t = train.features;
    const Matrix& v = validation.features;

    val_mean_.assign(n, 0.0);
    train_mean_.assign(n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        double acc = 0.0;
        for (std::size_t j = 0; j < nv; ++j) acc += pair_kernel(spec, t, a, v, j);
        val_mean_[a] = acc / static_cast<double>(nv);
        acc = 0.0;
        for (std::size_t b = 0; b < n; ++b) acc += pair_kernel(spec, t, a, t, b);
        train_mean_[a] = acc / static_cast<double>(n);
    }
    double val_within = 0.0;
    for (std::size_t i = 0; i < nv; ++i) {
        for (std::size_t j = 0; j < nv; ++j) val_within += pair_kernel(spec, v, i, v, j);
    }
    val_within /= static_cast<double>(nv) * static_cast<double>(nv);
    val_mean_bar_ = std::accumulate(val_mean_.begin(), val_mean_.end(), 0.0) / static_cast<double>(n);
    quad_ = std::accumulate(train_mean_.begin(), train_mean_.end(), 0.0) / static_cast<double>(n);
    base_mmd2_ = val_within - 2.0 * val_mean_bar_ + quad_;
}

double DirectionalDerivativeOracle::evaluate(std::size_t i, double epsilon) const {
    if (!(epsilon > 0.0 && epsilon <= 0.1)) {
        throw InputError("epsilon must lie in (0, 0.1], got " + std::to_string(epsilon));
    }
    if (i >= val_mean_.size()) throw InputError("point index " + std::to_string(i) + " out of range");
    // With w = (1 - eps) u + eps e_i the change MMD^2(eps) - MMD^2(0) expands to
    // eps * [-2 (b_i - b) - (2 - eps) u'Ku + 2 (1 - eps) (Ku)_i + eps k(x_i, x_i)].
    const double slope = -2.0 * (val_mean_[i] - val_mean_bar_) - (2.0 - epsilon) * quad_ +
                         2.0 * (1.0 - epsilon) * train_mean_[i] + epsilon;
    const double base = std::sqrt(std::max(0.0, base_mmd2_));
    const double moved = std::sqrt(std::max(0.0, base_mmd2_ + epsilon * slope));
    const double denom = base + moved;
    if (denom == 0.0) return 0.0;
    return -slope / denom;
}

double numeric_directional_derivative(const Dataset& train, const Dataset& validation, const KernelSpec& spec,
                                      std::size_t i, double epsilon) {
    return DirectionalDerivativeOracle(train, validation, spec).evaluate(i, epsilon);
}

std::vector<double> numeric_directional_derivatives(const Dataset& train, const Dataset& validation,
                                                    const KernelSpec& spec, double epsilon) {
    const DirectionalDerivativeOracle oracle(train, validation, spec);
    std::vector<double> out(oracle.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = oracle.evaluate(i, epsilon);
    return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
    const auto order = rank_ascending(values);
    std::vector<double> ranks(values.size());
    std::size_t start = 0;
    while (start < order.size()) {
        std::size_t end = start + 1;
        while (end < order.size() && values[order[end]] == values[order[start]]) ++end;
        const double mean_rank = 0.5 * static_cast<double>(start + end - 1) + 1.0;
        for (std::size_t r = start; r < end; ++r) ranks[order[r]] = mean_rank;
        start = end;
    }
    return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InputError("pearson: length mismatch");
    if (a.size() < 2) throw InputError("pearson needs at least 2 values");
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return saa == sbb ? 1.0 : 0.0;
    return sab / std::sqrt(saa * sbb);
}

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InputError("spearman: length mismatch");
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    return pearson(ra, rb);
}

RankAgreement rank_agreement(std::span<const double> scores_a, std::span<const double> scores_b, std::size_t k) {
    if (scores_a.size() != scores_b.size()) {
        throw InputError("rank agreement: lengths " + std::to_string(scores_a.size()) + " and " +
                         std::to_string(scores_b.size()) + " differ");
    }
    if (k == 0 || k > scores_a.size()) {
        throw InputError("rank agreement: k = " + std::to_string(k) + " must lie in [1, " +
                         std::to_string(scores_a.size()) + "]");
    }
    RankAgreement out;
    out.k = k;
    out.spearman = spearman(scores_a, scores_b);
    auto bottom = [k](std::span<const double> s) {
        auto order = rank_ascending(s);
        order.resize(k);
        std::sort(order.begin(), order.end());
        return order;
    };
    const auto sa = bottom(scores_a);
    const auto sb = bottom(scores_b);
    std::vector<std::size_t> shared;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(shared));
    out.top_k_overlap = static_cast<double>(shared.size()) / static_cast<double>(k);
    return out;
}

} // namespace mmdval
