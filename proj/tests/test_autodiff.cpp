#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "proco/autodiff.hpp"
#include "proco/error.hpp"
#include "proco/matrix.hpp"

using namespace proco;

namespace {

// Independent reference: naive triple-loop product.
Matrix matmul_oracle(const Matrix& a, const Matrix& b) {
    REQUIRE(a.cols() == b.rows());
    Matrix out(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j)
            for (int k = 0; k < a.cols(); ++k) out(i, j) += a(i, k) * b(k, j);
    return out;
}

Matrix random_matrix(int rows, int cols, std::mt19937_64& rng, double lo = -2.0,
                     double hi = 2.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.raw()[i] = dist(rng);
    return m;
}

// Random values bounded away from zero, for kinked or singular ops.
Matrix random_matrix_away_from_zero(int rows, int cols, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> mag(0.1, 2.0);
    std::bernoulli_distribution sign(0.5);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) {
        m.raw()[i] = (sign(rng) ? 1.0 : -1.0) * mag(rng);
    }
    return m;
}

void check_fd(const std::function<Var(Tape&, const std::vector<Var>&)>& build,
              const std::vector<Matrix>& params, double tol = 1e-4) {
    auto report = grad_check_tape(build, params, 1e-5, tol);
    CAPTURE(report.max_rel_err);
    CAPTURE(report.worst_param);
    CAPTURE(report.worst_coord);
    CHECK(report.pass);
}

}  // namespace

TEST_SUITE_BEGIN("autodiff");

TEST_CASE("matmul identity, frozen example, zero matrix") {
    std::mt19937_64 rng(7);
    Matrix a = random_matrix(2, 3, rng);
    Matrix id = Matrix::identity(2);
    Matrix prod = matmul(id, a);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(prod.data()[i] == a.data()[i]);

    Matrix left{{1, 2}, {3, 4}};
    Matrix right{{5}, {6}};
    Matrix r = matmul(left, right);
    CHECK(r(0, 0) == 17.0);
    CHECK(r(1, 0) == 39.0);
    Matrix ref = matmul_oracle(left, right);
    CHECK(r(0, 0) == ref(0, 0));
    CHECK(r(1, 0) == ref(1, 0));

    Matrix zero(3, 2);
    Matrix z = matmul(zero, random_matrix(2, 4, rng));
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(z.data()[i] == 0.0);
}

TEST_CASE("matmul equals naive oracle bit-for-bit at small sizes") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::uniform_int_distribution<int> dim(1, 6);
        const int m = dim(rng), k = dim(rng), n = dim(rng);
        Matrix a = random_matrix(m, k, rng);
        Matrix b = random_matrix(k, n, rng);
        Matrix got = matmul(a, b);
        Matrix ref = matmul_oracle(a, b);
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got.data()[i] == ref.data()[i]);
        }
    }
}

TEST_CASE("matmul shape mismatch raises ShapeError") {
    Matrix a(2, 3);
    Matrix b(2, 3);
    CHECK_THROWS_AS(matmul(a, b), ShapeError);
    Tape t;
    CHECK_THROWS_AS(t.matmul(t.leaf(a), t.leaf(b)), ShapeError);
}

TEST_CASE("l2_normalize basics") {
    auto e1 = l2_normalize({1.0, 0.0, 0.0});
    CHECK(e1[0] == 1.0);
    CHECK(e1[1] == 0.0);

    auto v = l2_normalize({3.0, 4.0});
    CHECK(v[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(0.8).epsilon(1e-12));

    CHECK_THROWS_AS(l2_normalize({0.0, 0.0}), DegenerateInputError);
    CHECK_THROWS_AS(l2_normalize_cols(Matrix(3, 1)), DegenerateInputError);
}

TEST_CASE("l2_normalize output norm within 1e-10") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        Matrix m = random_matrix_away_from_zero(8, 3, rng);
        Matrix n = l2_normalize_cols(m);
        for (int j = 0; j < n.cols(); ++j) {
            double sq = 0.0;
            for (int i = 0; i < n.rows(); ++i) sq += n(i, j) * n(i, j);
            CHECK(std::abs(std::sqrt(sq) - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("elementwise op values") {
    CHECK(sigmoid_scalar(0.0) == 0.5);

    const double x = 1.37;
    Matrix row = Matrix::row({x, x});
    Matrix lse = logsumexp_rows(row);
    CHECK(lse(0, 0) == doctest::Approx(x + std::log(2.0)).epsilon(1e-14));

    CHECK(softplus_scalar(-50.0) == doctest::Approx(std::exp(-50.0)).epsilon(1e-10));
    CHECK(softplus_scalar(-50.0) > 0.0);
    CHECK(softplus_scalar(50.0) == doctest::Approx(50.0).epsilon(1e-14));
    CHECK(std::isfinite(softplus_scalar(700.0)));

    CHECK_THROWS_AS(log(Matrix::row({1.0, 0.0})), DomainError);
    CHECK_THROWS_AS(log(Matrix::row({-1.0})), DomainError);
}

TEST_CASE("logsumexp is stable for extreme inputs") {
    Matrix row = Matrix::row({500.0, 499.0, -500.0});
    Matrix lse = logsumexp_rows(row);
    CHECK(std::isfinite(lse(0, 0)));
    CHECK(lse(0, 0) == doctest::Approx(500.0 + std::log(1.0 + std::exp(-1.0))).epsilon(1e-12));
}

TEST_CASE("backward: square function and sigmoid") {
    {
        Tape t;
        Var x = t.leaf(Matrix(1, 1, {3.0}));
        Var loss = t.matmul(x, x);  // x^2 as 1x1 product
        t.backward(loss);
        CHECK(t.grad(x)(0, 0) == doctest::Approx(6.0).epsilon(1e-14));
    }
    {
        Tape t;
        Var x = t.leaf(Matrix(1, 1, {0.0}));
        Var loss = t.sigmoid(x);
        t.backward(loss);
        CHECK(t.grad(x)(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
    }
}

TEST_CASE("backward rejects non-scalar seed") {
    Tape t;
    Var x = t.leaf(Matrix(2, 2));
    Var y = t.relu(x);
    CHECK_THROWS_AS(t.backward(y), ShapeError);
}

TEST_CASE("random 3-layer composition matches finite differences") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<Matrix> params = {
            random_matrix(4, 3, rng),  // w1
            random_matrix(4, 1, rng),  // b1
            random_matrix(3, 4, rng),  // w2
            random_matrix(3, 1, rng),  // b2
            random_matrix(1, 3, rng),  // w3
        };
        Matrix input = random_matrix(3, 1, rng);
        auto build = [&input](Tape& t, const std::vector<Var>& p) {
            Var x = t.constant(input);
            Var h1 = t.sigmoid(t.add(t.matmul(p[0], x), p[1]));
            Var h2 = t.softplus(t.add(t.matmul(p[2], h1), p[3]));
            return t.matmul(p[4], h2);
        };
        check_fd(build, params);
    }
}

TEST_CASE("every primitive matches central finite differences") {
    std::mt19937_64 rng(23);

    auto reduce = [](Tape& t, Var v) { return t.sum_all(v); };

    SUBCASE("matmul both sides") {
        std::vector<Matrix> p = {random_matrix(3, 4, rng), random_matrix(4, 2, rng)};
        check_fd([&](Tape& t, const std::vector<Var>& v) {
            return t.sum_all(t.matmul(v[0], v[1]));
        }, p);
    }
    SUBCASE("transpose") {
        std::vector<Matrix> p = {random_matrix(3, 2, rng)};
        check_fd([&](Tape& t, const std::vector<Var>& v) {
            return t.sum_all(t.matmul(t.transpose(v[0]), v[0]));
        }, p);
    }
    SUBCASE("add sub scale") {
        std::vector<Matrix> p = {random_matrix(2, 3, rng), random_matrix(2, 3, rng)};
        check_fd([&](Tape& t, const std::vector<Var>& v) {
            Var s = t.sub(t.add(v[0], v[1]), t.scale(v[1], 0.25));
            return t.sum_all(t.sigmoid(s));
        }, p);
    }
    SUBCASE("add_col_broadcast") {
        std::vector<Matrix> p = {random_matrix(3, 4, rng), random_matrix(3, 1, rng)};
        check_fd([&](Tape& t, const std::vector<Var>& v) {
            return t.sum_all(t.sigmoid(t.add_col_broadcast(v[0], v[1])));
        }, p);
    }
    SUBCASE("relu away from the kink") {
        std::vector<Matrix> p = {random_matrix_away_from_zero(3, 3, rng)};
        check_fd([&](Tape& t, const std::vector<Var>& v) {
            return t.sum_all(t.relu(v[0]));
        }, p);
    }
    SUBCASE("sigmoid exp softplus") {
        std::vector<Matrix> p = {random_matrix(2, 2, rng)};
        check_fd([&](Tape& t, const std::vector<Var>& v) {
            return t.sum_all(t.softplus(t.exp(t.sigmoid(v[0]))));
        }, p);
    }
    SUBCASE("log of positive input") {
        std::mt19937_64 lrng(29);
        Matrix pos = random_matrix(2, 3, lrng, 0.2, 2.0);
        std::vector<Matrix> p = {pos};
        check_fd([&](Tape& t, const std::vector<Var>& v) {
            return t.sum_all(t.log(v[0]));
        }, p);
    }
    SUBCASE("logsumexp_rows") {
        std::vector<Matrix> p = {random_matrix(3, 5, rng)};
        check_fd([&](Tape& t, const std::vector<Var>& v) {
            return t.sum_all(t.logsumexp_rows(v[0]));
        }, p);
    }
    SUBCASE("l2_normalize_cols") {
        std::vector<Matrix> p = {random_matrix_away_from_zero(4, 2, rng)};
        Matrix direction = random_matrix(4, 2, rng);
        check_fd([&](Tape& t, const std::vector<Var>& v) {
            Var dir = t.constant(direction);
            return t.sum_all(t.matmul(t.transpose(dir), t.l2_normalize_cols(v[0])));
        }, p);
    }
    SUBCASE("concat and gathers") {
        std::vector<Matrix> p = {random_matrix(3, 2, rng), random_matrix(3, 3, rng)};
        check_fd([&](Tape& t, const std::vector<Var>& v) {
            Var c = t.concat_cols(v[0], v[1]);
            Var gr = t.gather_rows(c, {2, 0, 2});
            Var gc = t.gather_cols(gr, {4, 1});
            return t.mean_all(t.sigmoid(gc));
        }, p);
    }
    SUBCASE("reused var accumulates both paths") {
        std::vector<Matrix> p = {random_matrix(2, 2, rng)};
        check_fd([&](Tape& t, const std::vector<Var>& v) {
            return reduce(t, t.add(t.matmul(v[0], v[0]), t.sigmoid(v[0])));
        }, p);
    }
}

TEST_CASE("constants receive no gradient buffers") {
    Tape t;
    Var c = t.constant(Matrix::filled(2, 2, 1.0));
    Var x = t.leaf(Matrix::filled(2, 2, 0.5));
    Var loss = t.sum_all(t.matmul(c, x));
    t.backward(loss);
    CHECK_FALSE(t.requires_grad(c));
    CHECK_THROWS_AS(t.grad(c), InvariantError);
    CHECK(t.grad(x).all_finite());
}

TEST_CASE("grad_check: linear function has near-zero error") {
    std::mt19937_64 rng(31);
    Matrix w = random_matrix(1, 5, rng);
    std::vector<Matrix> params = {random_matrix(5, 1, rng)};
    auto report = grad_check_tape(
        [&w](Tape& t, const std::vector<Var>& p) {
            return t.matmul(t.constant(w), p[0]);
        },
        params, 1e-5, 1e-4);
    CHECK(report.pass);
    CHECK(report.max_rel_err < 1e-7);
}

TEST_CASE("grad_check: corrupted gradient rule fails") {
    std::mt19937_64 rng(37);
    std::vector<Matrix> params = {random_matrix(3, 1, rng)};
    auto eval = [](const std::vector<Matrix>& p) {
        double s = 0.0;
        for (std::size_t i = 0; i < p[0].size(); ++i) {
            s += p[0].data()[i] * p[0].data()[i];
        }
        return s;
    };
    // Deliberately wrong analytic gradient: x instead of 2x.
    std::vector<Matrix> corrupted = {params[0]};
    auto report = grad_check(eval, params, corrupted, 1e-5, 1e-4);
    CHECK_FALSE(report.pass);
    CHECK(report.max_rel_err > 0.1);
}

TEST_SUITE_END();
