#include "mmdval/synthetic.hpp"

#include "mmdval/error.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace mmdval {

Dataset make_blobs(std::size_t n_per_class, int num_classes, std::size_t dim, const Matrix& centers,
                   double scale, std::uint64_t seed) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw InputError("blob scale must be positive, got " + std::to_string(scale));
    }
    if (num_classes < 2) throw InputError("blobs need at least 2 classes");
    if (n_per_class == 0) throw InputError("blobs need at least one point per class");
    if (dim == 0) throw InputError("blob dimension must be at least 1");
    if (centers.rows() != static_cast<std::size_t>(num_classes) || centers.cols() != dim) {
        throw InputError("centers must be " + std::to_string(num_classes) + "x" + std::to_string(dim));
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t n = n_per_class * static_cast<std::size_t>(num_classes);
    Dataset data;
    data.features = Matrix(n, dim);
    data.labels.resize(n);
    data.num_classes = num_classes;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % static_cast<std::size_t>(num_classes));
        data.labels[i] = label;
        for (std::size_t c = 0; c < dim; ++c) {
            data.features(i, c) = centers(static_cast<std::size_t>(label), c) + scale * gauss(rng);
        }
    }
    return data;
}

Matrix ring_centers(int num_classes, std::size_t dim, double radius) {
    if (num_classes < 1 || dim == 0) throw InputError("ring centers need classes and dimensions");
    Matrix centers(static_cast<std::size_t>(num_classes), dim);
    for (int c = 0; c < num_classes; ++c) {
        const auto row = static_cast<std::size_t>(c);
        if (dim == 1) {
            centers(row, 0) = radius * c;
        } else {
            const double angle = 2.0 * std::numbers::pi * c / num_classes;
            centers(row, 0) = radius * std::cos(angle);
            centers(row, 1) = radius * std::sin(angle);
        }
    }
    return centers;
}

} // namespace mmdval
