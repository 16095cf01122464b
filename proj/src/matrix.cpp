#include "proco/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "proco/error.hpp"

namespace proco {

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) {
        throw ShapeError("matrix dimensions must be non-negative");
    }
    data_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

Matrix::Matrix(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows < 0 || cols < 0 ||
        data_.size() != static_cast<std::size_t>(rows) * cols) {
        throw ShapeError("matrix data length does not match " +
                         std::to_string(rows) + "x" + std::to_string(cols));
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = static_cast<int>(rows.size());
    cols_ = rows_ > 0 ? static_cast<int>(rows.begin()->size()) : 0;
    data_.reserve(static_cast<std::size_t>(rows_) * cols_);
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != cols_) {
            throw ShapeError("ragged initializer for matrix");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::filled(int rows, int cols, double value) {
    Matrix m(rows, cols);
    std::fill(m.data_.begin(), m.data_.end(), value);
    return m;
}

Matrix Matrix::column(const std::vector<double>& values) {
    return Matrix(static_cast<int>(values.size()), 1, values);
}

Matrix Matrix::row(const std::vector<double>& values) {
    return Matrix(1, static_cast<int>(values.size()), values);
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::string Matrix::shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double x) { return std::isfinite(x); });
}

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": shapes " + a.shape_str() +
                         " and " + b.shape_str() + " differ");
    }
}

template <typename F>
Matrix map(const Matrix& a, F f) {
    Matrix out(a.rows(), a.cols());
    const double* src = a.data();
    double* dst = out.data();
    for (std::size_t i = 0; i < a.size(); ++i) dst[i] = f(src[i]);
    return out;
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions disagree, " + a.shape_str() +
                         " * " + b.shape_str());
    }
    Matrix out(a.rows(), b.cols());
    const int m = a.rows(), k = a.cols(), n = b.cols();
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = out.data();
    for (int i = 0; i < m; ++i) {
        const double* arow = pa + static_cast<std::size_t>(i) * k;
        double* crow = pc + static_cast<std::size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
            const double aval = arow[p];
            if (aval == 0.0) continue;
            const double* brow = pb + static_cast<std::size_t>(p) * n;
            for (int j = 0; j < n; ++j) crow[j] += aval * brow[j];
        }
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] + b.data()[i];
    return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "sub");
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
    return out;
}

Matrix scale(const Matrix& a, double factor) {
    return map(a, [factor](double x) { return factor * x; });
}

Matrix add_col_broadcast(const Matrix& a, const Matrix& b) {
    if (b.cols() != 1 || b.rows() != a.rows()) {
        throw ShapeError("add_col_broadcast: bias " + b.shape_str() +
                         " does not match " + a.shape_str());
    }
    Matrix out(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i) {
        const double bias = b(i, 0);
        for (int j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) + bias;
    }
    return out;
}

Matrix relu(const Matrix& a) {
    return map(a, [](double x) { return x > 0.0 ? x : 0.0; });
}

double sigmoid_scalar(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus_scalar(double x) {
    // max(x,0) + log1p(exp(-|x|)) is exact at both tails.
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

Matrix sigmoid(const Matrix& a) { return map(a, sigmoid_scalar); }

Matrix exp(const Matrix& a) {
    return map(a, [](double x) { return std::exp(x); });
}

Matrix log(const Matrix& a) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a.data()[i] > 0.0)) {
            throw DomainError("log: non-positive entry " +
                              std::to_string(a.data()[i]));
        }
    }
    return map(a, [](double x) { return std::log(x); });
}

Matrix softplus(const Matrix& a) { return map(a, softplus_scalar); }

Matrix logsumexp_rows(const Matrix& a) {
    if (a.cols() < 1) {
        throw ShapeError("logsumexp_rows: empty rows");
    }
    Matrix out(a.rows(), 1);
    for (int i = 0; i < a.rows(); ++i) {
        double m = a(i, 0);
        for (int j = 1; j < a.cols(); ++j) m = std::max(m, a(i, j));
        double s = 0.0;
        for (int j = 0; j < a.cols(); ++j) s += std::exp(a(i, j) - m);
        out(i, 0) = m + std::log(s);
    }
    return out;
}

Matrix l2_normalize_cols(const Matrix& a) {
    Matrix out(a.rows(), a.cols());
    for (int j = 0; j < a.cols(); ++j) {
        double sq = 0.0;
        for (int i = 0; i < a.rows(); ++i) sq += a(i, j) * a(i, j);
        const double norm = std::sqrt(sq);
        if (norm == 0.0) {
            throw DegenerateInputError("l2_normalize: zero vector in column " +
                                       std::to_string(j));
        }
        for (int i = 0; i < a.rows(); ++i) out(i, j) = a(i, j) / norm;
    }
    return out;
}

Matrix concat_cols(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw ShapeError("concat_cols: row counts differ, " + a.shape_str() +
                         " vs " + b.shape_str());
    }
    Matrix out(a.rows(), a.cols() + b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
        for (int j = 0; j < b.cols(); ++j) out(i, a.cols() + j) = b(i, j);
    }
    return out;
}

Matrix gather_rows(const Matrix& a, const std::vector<int>& indices) {
    Matrix out(static_cast<int>(indices.size()), a.cols());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const int i = indices[r];
        if (i < 0 || i >= a.rows()) {
            throw ShapeError("gather_rows: index " + std::to_string(i) +
                             " out of range for " + a.shape_str());
        }
        for (int j = 0; j < a.cols(); ++j) out(static_cast<int>(r), j) = a(i, j);
    }
    return out;
}

Matrix gather_cols(const Matrix& a, const std::vector<int>& indices) {
    Matrix out(a.rows(), static_cast<int>(indices.size()));
    for (std::size_t c = 0; c < indices.size(); ++c) {
        const int j = indices[c];
        if (j < 0 || j >= a.cols()) {
            throw ShapeError("gather_cols: index " + std::to_string(j) +
                             " out of range for " + a.shape_str());
        }
        for (int i = 0; i < a.rows(); ++i) out(i, static_cast<int>(c)) = a(i, j);
    }
    return out;
}

double sum_all(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i];
    return s;
}

double dot(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
    return s;
}

double l2_norm(const Matrix& a) { return std::sqrt(dot(a, a)); }

std::vector<double> l2_normalize(const std::vector<double>& v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    const double norm = std::sqrt(sq);
    if (norm == 0.0) {
        throw DegenerateInputError("l2_normalize: zero vector");
    }
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / norm;
    return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw ShapeError("dot: vector lengths differ");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace proco
