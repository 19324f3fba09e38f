#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace vgc {

// Dense row-major matrix of 64-bit floats. Sized for this project's scale
// (n up to ~1e4, d up to ~800); no sparse or GPU paths.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix identity(std::size_t n);
    static Matrix row_vector(std::span<const double> v);
    static Matrix column_vector(std::span<const double> v);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::span<double> flat() { return {data_.data(), data_.size()}; }
    std::span<const double> flat() const { return {data_.data(), data_.size()}; }

    void fill(double v) { data_.assign(data_.size(), v); }
    bool all_finite() const;

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// C = A (m,k) * B (k,n)
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A (m,k) * B(n,k)^T  -> (m,n)
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// C = A (k,m)^T * B (k,n) -> (m,n)
Matrix matmul_tn(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

// Adds r to every row of a in place.
void add_row_inplace(Matrix& a, std::span<const double> r);
std::vector<double> column_sums(const Matrix& a);
std::vector<double> column_means(const Matrix& a);

double squared_distance(std::span<const double> a, std::span<const double> b);
double dot(std::span<const double> a, std::span<const double> b);

// Cholesky factorization A = L L^T for symmetric positive definite A.
// Returns false if a non-positive pivot is encountered.
bool cholesky(const Matrix& a, Matrix& lower);
// Solves L L^T x = b given the Cholesky factor.
std::vector<double> cholesky_solve(const Matrix& lower, std::span<const double> b);
double cholesky_log_det(const Matrix& lower);

// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
// Used for PSD validation and square roots of covariance matrices.
void jacobi_eigen_symmetric(const Matrix& a, Matrix& eigenvectors, std::vector<double>& eigenvalues);

// Inverse of a small symmetric positive definite matrix via Cholesky.
Matrix spd_inverse(const Matrix& a);

}  // namespace vgc
