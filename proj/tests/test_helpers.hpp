#pragma once

#include "mmdval/dataset.hpp"
#include "mmdval/synthetic.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace mmdval::testing {

inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("mmdval_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, scale);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (auto& v : m.row(i)) v = gauss(rng);
    }
    return m;
}

inline Dataset random_dataset(std::size_t n, std::size_t d, int classes, std::mt19937_64& rng, double scale = 1.0) {
    Dataset data;
    data.features = random_matrix(n, d, rng, scale);
    std::uniform_int_distribution<int> label(0, classes - 1);
    data.labels.resize(n);
    for (auto& y : data.labels) y = label(rng);
    data.num_classes = classes;
    return data;
}

/// 3-class blobs on a ring, rows interleaved by class.
inline Dataset blobs(std::size_t n, std::uint64_t seed, double radius = 4.0, double scale = 0.5, std::size_t dim = 2,
                     int classes = 3) {
    const std::size_t per_class = (n + static_cast<std::size_t>(classes) - 1) / static_cast<std::size_t>(classes);
    return make_blobs(per_class, classes, dim, ring_centers(classes, dim, radius), scale, seed).slice(0, n);
}

} // namespace mmdval::testing
