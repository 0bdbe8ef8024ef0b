#include "mmdval/cond_prob.hpp"

#include "mmdval/error.hpp"

#include <cmath>
#include <string>

namespace mmdval {

CondProbModel::CondProbModel(const Dataset& support, const KernelSpec& spec, double smoothing)
    : support_(support), spec_(spec), smoothing_(smoothing) {
    if (support_.size() == 0) throw InputError("conditional model needs a non-empty validation set");
    support_.validate();
    if (!(smoothing_ >= 0.0) || !std::isfinite(smoothing_)) {
        throw InputError("smoothing must be finite and non-negative");
    }
}

CondPrediction CondProbModel::predict_with_mass(std::span<const double> x) const {
    if (x.size() != support_.dim()) {
        throw InputError("query has dimension " + std::to_string(x.size()) + ", model expects " +
                         std::to_string(support_.dim()));
    }
    const auto classes = static_cast<std::size_t>(support_.num_classes);
    CondPrediction out;
    out.probabilities.assign(classes, 0.0);
    double mass = 0.0;
    for (std::size_t j = 0; j < support_.size(); ++j) {
        const double k = spec_.from_squared_distance(squared_distance(x, support_.features.row(j)));
        mass += k;
        out.probabilities[static_cast<std::size_t>(support_.labels[j])] += k;
    }
    spec_.count(support_.size());
    out.kernel_mass = mass;

    const double denom = static_cast<double>(classes) * smoothing_ + mass;
    if (denom > 0.0) {
        for (auto& p : out.probabilities) p = (smoothing_ + p) / denom;
    } else {
        // No kernel mass and no smoothing: nothing distinguishes the classes.
        for (auto& p : out.probabilities) p = 1.0 / static_cast<double>(classes);
    }
    return out;
}

std::vector<double> CondProbModel::predict(std::span<const double> x) const {
    return predict_with_mass(x).probabilities;
}

Matrix CondProbModel::predict_batch(const Matrix& queries) const {
    Matrix out(queries.rows(), static_cast<std::size_t>(support_.num_classes));
    for (std::size_t i = 0; i < queries.rows(); ++i) {
        const auto probs = predict(queries.row(i));
        std::copy(probs.begin(), probs.end(), out.row(i).begin());
    }
    return out;
}

bool CondProbModel::supported_by(const Dataset& data, const KernelSpec& spec) const {
    return spec.sigma() == spec_.sigma() && data.labels == support_.labels &&
           data.features == support_.features;
}

} // namespace mmdval
