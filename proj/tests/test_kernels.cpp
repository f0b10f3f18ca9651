#include "doctest.h"

#include "rstr/error.hpp"
#include "rstr/kernels.hpp"
#include "test_util.hpp"

#include <Eigen/Eigenvalues>

using namespace rstr;

namespace {
Matrix col(std::initializer_list<double> v) {
    Matrix m(static_cast<Eigen::Index>(v.size()), 1);
    Eigen::Index i = 0;
    for (double x : v) m(i++, 0) = x;
    return m;
}
}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("closed-form kernel values") {
    CHECK(gram(col({1, 2}), col({3, 4}), KernelConfig::linear())(0, 0) == doctest::Approx(11.0));
    CHECK(gram(col({0.3, -2}), col({0.3, -2}), KernelConfig::gaussian(0.7))(0, 0) == doctest::Approx(1.0));
    CHECK(gram(col({0.3, -2}), col({0.3, -2}), KernelConfig::gaussian())(0, 0) == doctest::Approx(1.0));
    CHECK(gram(col({1, 0}), col({1, 0}), KernelConfig::polynomial(2, 1.0))(0, 0) == doctest::Approx(4.0));
    const double g = gram(col({0, 0}), col({3, 4}), KernelConfig::gaussian(5.0))(0, 0);
    CHECK(g == doctest::Approx(std::exp(-25.0 / 50.0)));
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(KernelConfig::polynomial(0, 1.0).validate(), ConfigError);
    CHECK_THROWS_AS(KernelConfig::gaussian(0.0).validate(), ConfigError);
    CHECK_THROWS_AS(KernelConfig::gaussian(-1.0).validate(), ConfigError);
    CHECK_NOTHROW(KernelConfig::gaussian().validate());
    CHECK_THROWS_AS(gram(Matrix::Ones(2, 3), Matrix::Ones(3, 3), KernelConfig::linear()), DimensionError);
}

TEST_CASE("scalar kernel set") {
    const BlockedFeatureSet s({Matrix::Constant(1, 1, 1.0)}, DomainTag::source);
    const BlockedFeatureSet t({Matrix::Constant(1, 1, 2.0)}, DomainTag::target);
    const KernelSet ks = build_kernel_set(s, t, KernelConfig::linear());
    REQUIRE(ks.num_blocks() == 1);
    CHECK(ks.per_block_source[0](0, 0) == 1.0);
    CHECK(ks.per_block_source[0](1, 0) == 2.0);
    CHECK(ks.per_block_target[0](0, 0) == 2.0);
    CHECK(ks.per_block_target[0](1, 0) == 4.0);
}

TEST_CASE("linear kernel set matches explicit product") {
    std::mt19937_64 rng(7);
    const auto s = test::random_set(rng, 3, 5, 4, DomainTag::source);
    const auto t = test::random_set(rng, 3, 5, 6, DomainTag::target);
    const KernelSet ks = build_kernel_set(s, t, KernelConfig::linear());
    for (std::size_t i = 0; i < 3; ++i) {
        Matrix joined(5, 10);
        joined << s.block(i), t.block(i);
        const Matrix want_s = joined.transpose() * s.block(i);
        const Matrix want_t = joined.transpose() * t.block(i);
        CHECK(ks.per_block_source[i].rows() == 10);
        CHECK((ks.per_block_source[i] - want_s).norm() <= 1e-12 * want_s.norm());
        CHECK((ks.per_block_target[i] - want_t).norm() <= 1e-12 * want_t.norm());
    }
}

TEST_CASE("kernel set rejects swapped domains and layouts") {
    std::mt19937_64 rng(1);
    const auto s = test::random_set(rng, 2, 3, 4, DomainTag::source);
    const auto t = test::random_set(rng, 2, 3, 4, DomainTag::target);
    CHECK_THROWS(build_kernel_set(t, s, KernelConfig::linear()));
    const auto t_bad = test::random_set(rng, 2, 4, 4, DomainTag::target);
    CHECK_THROWS_AS(build_kernel_set(s, t_bad, KernelConfig::linear()), DimensionError);
}

TEST_CASE("test kernels") {
    std::mt19937_64 rng(3);
    const auto s = test::random_set(rng, 2, 3, 5, DomainTag::source);
    const auto t = test::random_set(rng, 2, 3, 4, DomainTag::target);
    for (const KernelConfig& cfg : {KernelConfig::linear(), KernelConfig::gaussian(), KernelConfig::polynomial(3, 0.5)}) {
        const KernelSet ks = build_kernel_set(s, t, cfg);
        const auto same = build_test_kernels(s, t, t.with_tag(DomainTag::test), cfg);
        for (std::size_t i = 0; i < 2; ++i) CHECK((same[i] - ks.per_block_target[i]).norm() <= 1e-12);
        const auto reused = build_test_kernels(ks, t.with_tag(DomainTag::test), cfg);
        for (std::size_t i = 0; i < 2; ++i) CHECK((reused[i] - same[i]).norm() == 0.0);
    }
    // duplicate test columns give duplicate kernel columns
    const auto test_set = s.select({1, 1, 3}).with_tag(DomainTag::test);
    const auto k = build_test_kernels(s, t, test_set, KernelConfig::gaussian());
    CHECK((k[0].col(0) - k[0].col(1)).norm() == 0.0);
    // a single test sample under a linear kernel is the basis transposed times it
    const auto one = s.select({2}).with_tag(DomainTag::test);
    const auto k1 = build_test_kernels(s, t, one, KernelConfig::linear());
    Matrix joined(3, 9);
    joined << s.block(0), t.block(0);
    CHECK((k1[0] - joined.transpose() * one.block(0)).norm() <= 1e-12);

    const KernelSet ks = build_kernel_set(s, t, KernelConfig::linear());
    CHECK_THROWS_AS(build_test_kernels(ks, one, KernelConfig::gaussian()), ConfigError);
}

TEST_CASE("gram matrices are symmetric positive semi-definite") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix A = test::randn(rng, 4, 8);
        for (const KernelConfig& cfg : {KernelConfig::linear(), KernelConfig::gaussian(), KernelConfig::gaussian(0.3),
                                        KernelConfig::polynomial(2, 1.0), KernelConfig::polynomial(3, 2.0)}) {
            const Matrix G = gram(A, A, cfg);
            CHECK((G - G.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, G.cwiseAbs().maxCoeff()));
            Eigen::SelfAdjointEigenSolver<Matrix> es(G);
            CHECK(es.eigenvalues().minCoeff() >= -1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()));
        }
    }
}

TEST_CASE("median heuristic") {
    std::mt19937_64 rng(5);
    const Matrix A = test::randn(rng, 3, 9);
    std::vector<int> perm = {4, 2, 8, 0, 1, 7, 3, 5, 6};
    Matrix B(3, 9);
    for (int j = 0; j < 9; ++j) B.col(j) = A.col(perm[static_cast<std::size_t>(j)]);
    CHECK(median_pairwise_distance(A) == median_pairwise_distance(B));
    // three points on a line at 0, 1, 3: distances 1, 2, 3
    Matrix line(1, 3);
    line << 0, 1, 3;
    CHECK(median_pairwise_distance(line) == doctest::Approx(2.0));
    // all points equal: fall back to 1
    CHECK(median_pairwise_distance(Matrix::Ones(2, 4)) == 1.0);
    CHECK(resolve_bandwidth(line, KernelConfig::gaussian(0.25)) == 0.25);
}

}
