#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace chartml {

/// Dense row-major matrix of doubles. Rows are contiguous so the numeric
/// kernels can run over them directly.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }
    double operator()(std::size_t i, std::size_t j) const {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Matrix select_rows(const Matrix& m, std::span<const std::size_t> idx) {
    Matrix out(idx.size(), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const double* src = m.row(idx[i]);
        double* dst = out.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) dst[j] = src[j];
    }
    return out;
}

/// Missing cells are carried as quiet NaN until imputation fills them.
inline double missing_value() { return std::numeric_limits<double>::quiet_NaN(); }
inline bool is_missing(double v) { return std::isnan(v); }

}  // namespace chartml
