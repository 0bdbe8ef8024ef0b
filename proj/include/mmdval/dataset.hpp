#pragma once

#include "mmdval/matrix.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace mmdval {

/// Labelled point cloud: one feature row and one class label per point.
struct Dataset {
    Matrix features;
    std::vector<int> labels;
    int num_classes = 2;

    std::size_t size() const noexcept { return features.rows(); }
    std::size_t dim() const noexcept { return features.cols(); }

    /// Throws InputError naming the first offending row, if any.
    void validate() const;

    Dataset subset(std::span<const std::size_t> indices) const;
    Dataset slice(std::size_t first, std::size_t count) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Rows of `a` followed by rows of `b`. The class count is the larger of the two.
Dataset concat(const Dataset& a, const Dataset& b);

enum class DataFormat { csv, binary_matrix };

/// `.bin` selects the binary layout, anything else is CSV.
DataFormat format_from_path(const std::filesystem::path& path);

/// Loads and validates a dataset. With `declared_classes == 0` the class count
/// is inferred as max(label) + 1 (at least 2); otherwise labels must lie in
/// [0, declared_classes). Binary files carry their own class count.
Dataset load_dataset(const std::filesystem::path& path, DataFormat format, int declared_classes = 0);
Dataset load_dataset(const std::filesystem::path& path, int declared_classes = 0);

void save_csv(const Dataset& data, const std::filesystem::path& path);
void save_binary(const Dataset& data, const std::filesystem::path& path);

} // namespace mmdval
