#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace proco {

// Dense row-major matrix of doubles. Column vectors are k x 1 matrices,
// row vectors 1 x k. Value semantics throughout; safe to copy across
// threads.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols);  // zero-initialized
    Matrix(int rows, int cols, std::vector<double> data);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix zeros(int rows, int cols) { return Matrix(rows, cols); }
    static Matrix filled(int rows, int cols, double value);
    static Matrix column(const std::vector<double>& values);
    static Matrix row(const std::vector<double>& values);
    static Matrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    std::string shape_str() const;

    bool all_finite() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// ---- forward kernels ------------------------------------------------------
// These implement the value semantics shared by the plain evaluation path
// and the differentiable tape (the tape adds the backward rules on top).

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double factor);
// a + b replicated across columns; b must be rows(a) x 1.
Matrix add_col_broadcast(const Matrix& a, const Matrix& b);
Matrix relu(const Matrix& a);
Matrix sigmoid(const Matrix& a);
Matrix exp(const Matrix& a);
Matrix log(const Matrix& a);  // DomainError on non-positive entries
Matrix softplus(const Matrix& a);
// Row-wise stabilized log(sum(exp(row))); returns rows(a) x 1.
Matrix logsumexp_rows(const Matrix& a);
// Each column scaled to unit L2 norm. DegenerateInputError on a zero column.
Matrix l2_normalize_cols(const Matrix& a);
Matrix concat_cols(const Matrix& a, const Matrix& b);
Matrix gather_rows(const Matrix& a, const std::vector<int>& indices);
Matrix gather_cols(const Matrix& a, const std::vector<int>& indices);
double sum_all(const Matrix& a);
double dot(const Matrix& a, const Matrix& b);  // same shape, Frobenius inner product
double l2_norm(const Matrix& a);

// Scalar helpers used by both kernels and plain call sites.
double sigmoid_scalar(double x);
double softplus_scalar(double x);

// Unit-normalized copy of a plain vector. DegenerateInputError on zero norm.
std::vector<double> l2_normalize(const std::vector<double>& v);
double dot(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace proco
