#include <doctest.h>

#include "alkit/errors.hpp"
#include "alkit/matrix.hpp"
#include "alkit/rng.hpp"
#include "testutil.hpp"

using alkit::Matrix;

TEST_CASE("matrix construction and invariants") {
    Matrix m(2, 3, 1.5);
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK(m.size() == 6);
    CHECK(m(1, 2) == 1.5);
    CHECK(m.all_finite());

    CHECK_THROWS_AS(Matrix(2, 3, std::vector<double>{1.0, 2.0}), alkit::DimensionError);

    m(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(m.all_finite());
}

TEST_CASE("matmul matches the naive triple-loop oracle") {
    alkit::Rng rng(11);
    const Matrix a = testutil::random_matrix(7, 13, rng);
    const Matrix b = testutil::random_matrix(13, 5, rng);
    const Matrix fast = alkit::matmul(a, b);
    const Matrix slow = testutil::naive_matmul(a, b);
    REQUIRE(fast.rows() == slow.rows());
    REQUIRE(fast.cols() == slow.cols());
    for (int i = 0; i < fast.rows(); ++i)
        for (int j = 0; j < fast.cols(); ++j) CHECK(std::abs(fast(i, j) - slow(i, j)) < 1e-12);

    CHECK_THROWS_AS(alkit::matmul(a, a), alkit::DimensionError);
}

TEST_CASE("transposed products agree with explicit transposes") {
    alkit::Rng rng(12);
    const Matrix a = testutil::random_matrix(6, 4, rng);
    const Matrix b = testutil::random_matrix(6, 3, rng);

    Matrix at(4, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 4; ++j) at(j, i) = a(i, j);
    const Matrix expected = testutil::naive_matmul(at, b);
    const Matrix got = alkit::matmul_tn(a, b);
    for (int i = 0; i < got.rows(); ++i)
        for (int j = 0; j < got.cols(); ++j) CHECK(std::abs(got(i, j) - expected(i, j)) < 1e-12);

    const Matrix c = testutil::random_matrix(5, 4, rng);
    Matrix ct(4, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 4; ++j) ct(j, i) = c(i, j);
    const Matrix expected_nt = testutil::naive_matmul(a, ct);
    const Matrix got_nt = alkit::matmul_nt(a, c);
    for (int i = 0; i < got_nt.rows(); ++i)
        for (int j = 0; j < got_nt.cols(); ++j) CHECK(std::abs(got_nt(i, j) - expected_nt(i, j)) < 1e-12);
}

TEST_CASE("gather_rows picks rows in order") {
    Matrix m(3, 2, std::vector<double>{1, 2, 3, 4, 5, 6});
    const Matrix picked = alkit::gather_rows(m, {2, 0});
    CHECK(picked(0, 0) == 5.0);
    CHECK(picked(1, 1) == 2.0);
    CHECK_THROWS_AS(alkit::gather_rows(m, {3}), alkit::DimensionError);
}

TEST_CASE("rng draws are reproducible and in range") {
    alkit::Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        const double u = a.uniform();
        CHECK(u == b.uniform());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    alkit::Rng c(7);
    for (int i = 0; i < 1000; ++i) {
        const int v = c.index(17);
        CHECK(v >= 0);
        CHECK(v < 17);
    }
    // derive_seed separates substreams
    CHECK(alkit::derive_seed(1, 2) != alkit::derive_seed(1, 3));
    CHECK(alkit::derive_seed(1, 2) != alkit::derive_seed(2, 2));
}

TEST_CASE("sample_without_replacement yields distinct items") {
    alkit::Rng rng(9);
    const std::vector<int> sample = rng.sample_without_replacement(20, 10);
    CHECK(sample.size() == 10);
    std::vector<int> sorted = sample;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    for (int v : sample) {
        CHECK(v >= 0);
        CHECK(v < 20);
    }
}
