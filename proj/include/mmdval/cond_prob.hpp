#pragma once

#include "mmdval/dataset.hpp"
#include "mmdval/kernel.hpp"

#include <span>
#include <vector>

namespace mmdval {

inline constexpr double kDefaultSmoothing = 1e-8;

/// Class probabilities at x together with the total kernel mass
/// sum_j k(x, support_j) they were normalised by.
struct CondPrediction {
    std::vector<double> probabilities;
    double kernel_mass = 0.0;
};

/// Nadaraya-Watson class-probability estimate over a fixed support set:
///   P(y | x) = (eps + sum_{j : y_j = y} k(x, x_j)) / (C eps + sum_j k(x, x_j)).
/// Immutable once fitted.
class CondProbModel {
public:
    CondProbModel(const Dataset& support, const KernelSpec& spec, double smoothing = kDefaultSmoothing);

    std::vector<double> predict(std::span<const double> x) const;
    CondPrediction predict_with_mass(std::span<const double> x) const;
    /// n x C matrix of per-row predictions.
    Matrix predict_batch(const Matrix& queries) const;

    /// True when this model's support is exactly `data`'s features and labels
    /// under the same bandwidth, so kernel mass can double as a kernel mean.
    bool supported_by(const Dataset& data, const KernelSpec& spec) const;

    const KernelSpec& spec() const noexcept { return spec_; }
    double smoothing() const noexcept { return smoothing_; }
    int num_classes() const noexcept { return support_.num_classes; }
    std::size_t support_size() const noexcept { return support_.size(); }
    std::size_t dim() const noexcept { return support_.dim(); }

private:
    Dataset support_;
    KernelSpec spec_;
    double smoothing_;
};

inline CondProbModel fit_cond_prob(const Dataset& validation, const KernelSpec& spec,
                                   double smoothing = kDefaultSmoothing) {
    return CondProbModel(validation, spec, smoothing);
}

} // namespace mmdval
