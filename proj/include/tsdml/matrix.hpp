#ifndef TSDML_MATRIX_HPP
#define TSDML_MATRIX_HPP

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace tsdml {

/// Dense row-major matrix of doubles. Immutable in spirit: every operation
/// that modifies entries happens before the value is shared.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

    const std::vector<double>& data() const { return data_; }

    std::vector<double> col(std::size_t j) const;
    Matrix transposed() const;
    bool all_finite() const;

    /// Max absolute entry.
    double max_abs() const;
    double frobenius_norm() const;

    Matrix& operator*=(double c);
    friend Matrix operator*(const Matrix& a, const Matrix& b);
    friend Matrix operator+(const Matrix& a, const Matrix& b);
    friend Matrix operator-(const Matrix& a, const Matrix& b);
    friend bool operator==(const Matrix& a, const Matrix& b);

    /// y = A x
    std::vector<double> apply(std::span<const double> x) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// A * B^T without forming the transpose.
Matrix multiply_transposed(const Matrix& a, const Matrix& b);

double dot(std::span<const double> a, std::span<const double> b);

} // namespace tsdml

#endif
