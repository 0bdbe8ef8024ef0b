#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mmdval {

/// Dense row-major matrix of doubles. Rows are the unit of access everywhere
/// in this library (one row = one data point).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<double> row(std::size_t i) noexcept {
        return {data_.data() + i * cols_, cols_};
    }

    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const noexcept { return data_; }

    void append_row(std::span<const double> values);
    /// Rows [first, first + count).
    Matrix slice_rows(std::size_t first, std::size_t count) const;
    Matrix select_rows(std::span<const std::size_t> indices) const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Row-wise concatenation; column counts must agree.
Matrix vstack(const Matrix& top, const Matrix& bottom);

} // namespace mmdval
