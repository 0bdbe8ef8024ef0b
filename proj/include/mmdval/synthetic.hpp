#pragma once

#include "mmdval/dataset.hpp"

#include <cstdint>

namespace mmdval {

/// Isotropic Gaussian blobs. Row i belongs to class i % C, so every prefix of
/// the dataset is (nearly) class balanced. centers is C x d.
Dataset make_blobs(std::size_t n_per_class, int num_classes, std::size_t dim, const Matrix& centers,
                   double scale, std::uint64_t seed);

/// Class centers evenly spaced on a circle of the given radius in the first
/// two coordinates (on a line, spaced by radius, when dim = 1).
Matrix ring_centers(int num_classes, std::size_t dim, double radius);

} // namespace mmdval
