#include "doctest.h"

#include "rstr/error.hpp"
#include "rstr/features.hpp"
#include "rstr/metrics.hpp"
#include "rstr/verification/oracles.hpp"

#include <random>

using namespace rstr;

TEST_SUITE("metrics") {

TEST_CASE("confusion") {
    const std::vector<std::size_t> y = {0, 1, 2, 1, 0};
    const ConfusionMatrix perfect = confusion(y, y, 3);
    CHECK(perfect.counts == std::vector<std::vector<long>>{{2, 0, 0}, {0, 2, 0}, {0, 0, 1}});
    const ConfusionMatrix zero = confusion({0, 0, 0, 0, 0}, y, 3);
    CHECK(zero.counts == std::vector<std::vector<long>>{{2, 0, 0}, {2, 0, 0}, {1, 0, 0}});
    CHECK_THROWS(confusion({0, 1}, {0}, 2));
    CHECK_THROWS(confusion({0, 3}, {0, 1}, 3));

    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::size_t> u(0, 3);
    std::vector<std::size_t> p(100), t(100);
    for (int j = 0; j < 100; ++j) { p[j] = u(rng); t[j] = u(rng); }
    const ConfusionMatrix cm = confusion(p, t, 4);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b) {
            long n = 0;
            for (int j = 0; j < 100; ++j) n += (t[j] == a && p[j] == b);
            CHECK(cm.counts[a][b] == n);
        }
    CHECK(cm.total() == 100);
}

TEST_CASE("mean F1") {
    CHECK(mean_f1(ConfusionMatrix{{{4, 0}, {0, 6}}}) == 1.0);
    CHECK(mean_f1(ConfusionMatrix{{{5, 5}, {5, 5}}}) == doctest::Approx(0.5));
    const ConfusionMatrix absent{{{4, 1, 0}, {1, 4, 0}, {0, 0, 0}}};
    CHECK(mean_f1(absent) == doctest::Approx(8.0 / 15.0));
    CHECK(mean_f1(absent) < accuracy(absent) / 100.0);
    CHECK_THROWS(mean_f1(ConfusionMatrix{{{3}}}));
}

TEST_CASE("accuracy") {
    CHECK(accuracy(ConfusionMatrix{{{4, 0}, {0, 6}}}) == 100.0);
    CHECK(accuracy(ConfusionMatrix{{{71, 0}, {29, 0}}}) == 71.0);
    CHECK_THROWS(accuracy(ConfusionMatrix{{{0, 0}, {0, 0}}}));
}

TEST_CASE("properties against the naive evaluator") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t c = 2 + static_cast<std::size_t>(trial % 5);
        const std::size_t n = 1 + static_cast<std::size_t>(trial * 7 % 90);
        std::uniform_int_distribution<std::size_t> u(0, c - 1);
        std::vector<std::size_t> p(n), t(n);
        for (std::size_t j = 0; j < n; ++j) {
            t[j] = u(rng);
            p[j] = u(rng) < c / 2 ? t[j] : u(rng);
        }
        const ConfusionMatrix cm = confusion(p, t, c);
        CHECK(mean_f1(cm) == oracle::mean_f1(p, t, c));
        CHECK(accuracy(cm) == oracle::accuracy(p, t));
        CHECK(mean_f1(cm) >= 0.0);
        CHECK(mean_f1(cm) <= 1.0);

        // relabel classes consistently in both vectors
        std::vector<std::size_t> perm(c);
        for (std::size_t k = 0; k < c; ++k) perm[k] = (k + 1) % c;
        std::vector<std::size_t> pp(n), tp(n);
        for (std::size_t j = 0; j < n; ++j) { pp[j] = perm[p[j]]; tp[j] = perm[t[j]]; }
        const ConfusionMatrix cmp = confusion(pp, tp, c);
        CHECK(mean_f1(cmp) == doctest::Approx(mean_f1(cm)).epsilon(1e-14));
        CHECK(accuracy(cmp) == accuracy(cm));

        // a diagonal matrix with every class present: F1 equals accuracy / 100
        const ConfusionMatrix diag = confusion(t, t, c);
        bool all_present = true;
        for (std::size_t k = 0; k < c; ++k) all_present = all_present && diag.counts[k][k] > 0;
        if (all_present) CHECK(mean_f1(diag) == accuracy(diag) / 100.0);
    }
}

}

TEST_SUITE("features") {

TEST_CASE("blocked sets") {
    Matrix stacked(4, 3);
    stacked << 1, 2, 3,
               4, 5, 6,
               7, 8, 9,
               10, 11, 12;
    const BlockedFeatureSet s = BlockedFeatureSet::from_stacked(stacked, 2, DomainTag::source);
    CHECK(s.num_blocks() == 2);
    CHECK(s.block_dim() == 2);
    CHECK(s.size() == 3);
    CHECK(s.block(1)(0, 0) == 7);
    CHECK(s.stacked() == stacked);
    CHECK(s.select({2, 0}).block(0).col(0) == stacked.block(0, 2, 2, 1));
    CHECK(s.content_hash() == BlockedFeatureSet::from_stacked(stacked, 2, DomainTag::target).content_hash());
    Matrix other = stacked;
    other(3, 2) += 1e-12;
    CHECK(s.content_hash() != BlockedFeatureSet::from_stacked(other, 2, DomainTag::source).content_hash());
    CHECK_THROWS_AS(BlockedFeatureSet::from_stacked(stacked, 3, DomainTag::source), DimensionError);
    CHECK_THROWS_AS(BlockedFeatureSet({}, DomainTag::source), DimensionError);
    CHECK_THROWS(BlockedFeatureSet({Matrix::Zero(2, 3), Matrix::Zero(2, 4)}, DomainTag::source));
    CHECK_THROWS(BlockedFeatureSet({Matrix::Zero(2, 0)}, DomainTag::source));
}

TEST_CASE("labels") {
    const LabelMatrix L({1, 0, 1}, {"neg", "pos"});
    CHECK(L.onehot() == (Matrix(2, 3) << 0, 1, 0, 1, 0, 1).finished());
    CHECK(L.select({2}).indices() == std::vector<std::size_t>{1});
    CHECK_THROWS_AS(LabelMatrix({0}, {"only"}), ConfigError);
    CHECK_THROWS(LabelMatrix({2}, {"a", "b"}));
    CHECK(argmax_lowest((Vector(3) << 1, 3, 3).finished()) == 1);
}

}
