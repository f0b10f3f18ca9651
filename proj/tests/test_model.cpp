#include "doctest.h"

#include "rstr/baseline.hpp"
#include "rstr/error.hpp"
#include "rstr/metrics.hpp"
#include "rstr/model.hpp"
#include "rstr/synthetic.hpp"
#include "rstr/verification/oracles.hpp"
#include "test_util.hpp"

using namespace rstr;

namespace {

struct Fixture {
    BlockedFeatureSet source;
    BlockedFeatureSet target;
    LabelMatrix labels;
    KernelSet kernels;
};

Fixture small_fixture(std::uint64_t seed, const KernelConfig& cfg = KernelConfig::linear()) {
    std::mt19937_64 rng(seed);
    auto s = test::random_set(rng, 3, 2, 6, DomainTag::source);
    auto t = test::random_set(rng, 3, 2, 5, DomainTag::target, 0.8);
    auto ks = build_kernel_set(s, t, cfg);
    return {std::move(s), std::move(t), test::cyclic_labels(6), std::move(ks)};
}

RstrHyperparams quick(double lambda, double mu, double gamma) {
    RstrHyperparams hp;
    hp.lambda = lambda;
    hp.mu = mu;
    hp.gamma = gamma;
    return hp;
}

}  // namespace

TEST_SUITE("rstr-model") {

TEST_CASE("objective") {
    const Fixture f = small_fixture(1);
    const Matrix& L = f.labels.onehot();
    const Matrix P0 = Matrix::Zero(11, 3);
    CHECK(objective(P0, Vector::Zero(3), f.kernels, L, 1.0, 2.0, 3.0) == doctest::Approx(L.squaredNorm()));

    std::mt19937_64 rng(2);
    const Matrix P = test::randn(rng, 11, 3);
    const Vector w = test::randn(rng, 3, 1).cwiseAbs();
    Matrix pred = Matrix::Zero(3, 6);
    for (std::size_t i = 0; i < 3; ++i) pred += w(static_cast<Eigen::Index>(i)) * P.transpose() * f.kernels.per_block_source[i];
    CHECK(objective(P, w, f.kernels, L, 0, 0, 0) == doctest::Approx((L - pred).squaredNorm()).epsilon(1e-12));

    for (const KernelConfig& cfg : {KernelConfig::linear(), KernelConfig::gaussian()}) {
        const Fixture g = small_fixture(3, cfg);
        const double want = oracle::rstr_objective(P, w, g.kernels.per_block_source, g.kernels.per_block_target,
                                                   L, 0.7, 0.3, 1.9);
        CHECK(std::abs(objective(P, w, g.kernels, L, 0.7, 0.3, 1.9) - want) <= 1e-10 * std::max(1.0, want));
    }
}

TEST_CASE("relaxed mmd") {
    const Fixture f = small_fixture(4);
    std::mt19937_64 rng(5);
    const Matrix P = test::randn(rng, 11, 3);
    const Vector w = test::randn(rng, 3, 1).cwiseAbs();
    CHECK(relaxed_mmd(Matrix::Zero(11, 3), w, f.kernels) == 0.0);
    const double want = oracle::relaxed_mmd(P, w, f.kernels.per_block_source, f.kernels.per_block_target);
    CHECK(std::abs(relaxed_mmd(P, w, f.kernels) - want) <= 1e-12 * std::max(1.0, want));

    const KernelSet same = build_kernel_set(f.source, f.source.with_tag(DomainTag::target), KernelConfig::gaussian());
    CHECK(relaxed_mmd(test::randn(rng, 12, 3), w, same) == 0.0);
}

TEST_CASE("mmd") {
    std::mt19937_64 rng(6);
    const Matrix a = test::randn(rng, 3, 10);
    CHECK(mmd(a, a, KernelConfig::linear()) == doctest::Approx(0.0));
    CHECK(mmd(a, a, KernelConfig::gaussian()) <= 1e-7);
    Matrix s(1, 1), t(1, 1);
    s << 0;
    t << 2;
    CHECK(mmd(s, t, KernelConfig::linear()) == doctest::Approx(2.0));
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix x = test::randn(rng, 1, 7), y = test::randn(rng, 1, 12, 2.0);
        CHECK(std::abs(mmd(x, y, KernelConfig::linear()) - std::abs(x.mean() - y.mean())) <= 1e-12);
    }
}

TEST_CASE("training") {
    SyntheticShiftConfig cfg;
    cfg.n_source = cfg.n_target = 45;
    const SyntheticTask task = generate_synthetic(cfg);
    const auto& S = task.source;
    const auto& T = task.target;

    SUBCASE("trace is monotone with non-negative weights") {
        const RstrModel m = train(S.features, S.labels, T.features, quick(1.0, 1.0, 10.0));
        REQUIRE(!m.objective_trace.empty());
        CHECK(m.converged);
        CHECK(m.objective_trace.size() <= 50);
        CHECK(m.w.minCoeff() >= 0.0);
        REQUIRE(m.p_step_trace.size() == m.objective_trace.size());
        for (std::size_t k = 0; k < m.objective_trace.size(); ++k) {
            if (k > 0) CHECK(m.p_step_trace[k] <= m.objective_trace[k - 1] + 1e-8);
            CHECK(m.objective_trace[k] <= m.p_step_trace[k] + 1e-8);
        }
        const KernelSet ks = build_kernel_set(*m.train_source, *m.train_target, m.kernel);
        CHECK(objective(m.P, m.w, ks, S.labels.onehot(), quick(1.0, 1.0, 10.0)) ==
              doctest::Approx(m.objective_trace.back()));
    }
    SUBCASE("huge lambda switches every region off") {
        const double mu = 0.5;
        const RstrModel m = train(S.features, S.labels, T.features, quick(1e9, mu, 1.0));
        CHECK(m.w.cwiseAbs().maxCoeff() == 0.0);
        CHECK(m.objective_trace.back() ==
              doctest::Approx(S.labels.onehot().squaredNorm() + mu * m.P.cwiseAbs().sum()));
        const RstrModel longer = [&] {
            RstrHyperparams hp = quick(1e9, mu, 1.0);
            hp.outer_tol = 1e-300;
            hp.outer_max_iters = 4;
            return train(S.features, S.labels, T.features, hp);
        }();
        CHECK(longer.P.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("target copy with no mean-gap term does at least as well as the baseline on source") {
        const BlockedFeatureSet copy = S.features.with_tag(DomainTag::target);
        const RstrModel m = train(S.features, S.labels, copy, quick(1e-3, 1e-3, 0.0));
        const BaselineModel b = train_baseline(S.features, S.labels);
        const auto& truth = S.labels.indices();
        const double acc_r = accuracy(confusion(predict(m, S.features.with_tag(DomainTag::test)).hard_labels, truth, 3));
        const double acc_b = accuracy(confusion(predict_baseline(b, S.features).hard_labels, truth, 3));
        CHECK(acc_r >= acc_b);
    }
    SUBCASE("bad inputs") {
        CHECK_THROWS_AS(train(S.features, S.labels.select({0, 1, 2}), T.features, quick(1, 1, 1)), DimensionError);
        RstrHyperparams hp = quick(-1, 1, 1);
        CHECK_THROWS_AS(train(S.features, S.labels, T.features, hp), ConfigError);
        std::mt19937_64 rng(1);
        const auto other = test::random_set(rng, 6, 3, 10, DomainTag::target);
        CHECK_THROWS_AS(train(S.features, S.labels, other, quick(1, 1, 1)), DimensionError);
    }
}

TEST_CASE("prediction") {
    SUBCASE("label assignment") {
        Matrix v(3, 3);
        v << 1, 0.5, 0,
             0, 0.5, 0,
             0, -1, 1;
        const PredictedLabels p = assign_labels(v);
        CHECK(p.hard_labels == std::vector<std::size_t>{0, 0, 2});
        CHECK(p.label_vectors(0, 1) == doctest::Approx(0.5));
        CHECK(p.label_vectors(2, 1) == 0.0);
        CHECK(p.label_vectors.col(0) == v.col(0));
    }
    SUBCASE("ranking is preserved and prediction is permutation-equivariant") {
        SyntheticShiftConfig cfg;
        cfg.n_source = cfg.n_target = 30;
        const SyntheticTask task = generate_synthetic(cfg);
        const RstrModel m = train(task.source.features, task.source.labels, task.target.features, quick(1, 1, 10));
        const BlockedFeatureSet test = task.target.features.with_tag(DomainTag::test);
        const Matrix scores = decision_values(m, test);
        const PredictedLabels p = predict(m, test);
        for (Eigen::Index j = 0; j < scores.cols(); ++j) {
            Vector col = scores.col(j);
            std::vector<double> sorted(col.data(), col.data() + col.size());
            std::sort(sorted.rbegin(), sorted.rend());
            if (sorted[0] - sorted[1] > 0.0) CHECK(p.hard_labels[static_cast<std::size_t>(j)] == argmax_lowest(col));
        }
        std::vector<std::size_t> order(test.size());
        for (std::size_t j = 0; j < order.size(); ++j) order[j] = order.size() - 1 - j;
        const PredictedLabels q = predict(m, test.select(order));
        for (std::size_t j = 0; j < order.size(); ++j) CHECK(q.hard_labels[j] == p.hard_labels[order[j]]);
        CHECK(predict(m, test).label_vectors == p.label_vectors);
        std::mt19937_64 rng(3);
        CHECK_THROWS_AS(predict(m, test::random_set(rng, 6, 7, 3, DomainTag::test)), DimensionError);
    }
}

}

TEST_SUITE("baseline") {

TEST_CASE("interpolates when samples do not outnumber features") {
    // Two 1-D regions, two separable samples: N <= D.
    const BlockedFeatureSet s({(Matrix(1, 2) << -1.0, 1.0).finished(), (Matrix(1, 2) << 0.5, 0.5).finished()},
                              DomainTag::source);
    const LabelMatrix L({0, 1}, {"a", "b"});
    const BaselineModel m = train_baseline(s, L, 1e-12);
    CHECK((m.C.transpose() * s.stacked() - L.onehot()).cwiseAbs().maxCoeff() <= 1e-6);
    std::mt19937_64 rng(1);
    const auto wide = test::random_set(rng, 2, 4, 6, DomainTag::source);
    const LabelMatrix L6 = test::cyclic_labels(6);
    const BaselineModel mw = train_baseline(wide, L6, 1e-12);
    CHECK((mw.C.transpose() * wide.stacked() - L6.onehot()).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("zero labels gives zero coefficients and class 0 predictions") {
    std::mt19937_64 rng(2);
    const auto s = test::random_set(rng, 2, 3, 5, DomainTag::source);
    BaselineModel m = train_baseline(s, test::cyclic_labels(5));
    m.C.setZero();
    for (auto y : predict_baseline(m, s).hard_labels) CHECK(y == 0);
}

TEST_CASE("ridge gradient vanishes at the solution") {
    std::mt19937_64 rng(3);
    const auto s = test::random_set(rng, 2, 3, 12, DomainTag::source);
    const LabelMatrix L = test::cyclic_labels(12);
    const double ridge = 0.3;
    const BaselineModel m = train_baseline(s, L, ridge);
    const Matrix X = s.stacked();
    auto f = [&](const Matrix& C) { return (L.onehot() - C.transpose() * X).squaredNorm() + ridge * C.squaredNorm(); };
    Matrix C = m.C;
    double worst = 0.0;
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < C.rows(); ++i) {
        for (Eigen::Index k = 0; k < C.cols(); ++k) {
            const double c0 = C(i, k);
            C(i, k) = c0 + h;
            const double up = f(C);
            C(i, k) = c0 - h;
            const double down = f(C);
            C(i, k) = c0;
            worst = std::max(worst, std::abs(up - down) / (2 * h));
        }
    }
    CHECK(worst <= 1e-6);
    const Matrix analytic = 2.0 * (X * (m.C.transpose() * X - L.onehot()).transpose() + ridge * m.C);
    CHECK(analytic.norm() <= 1e-8);
}

TEST_CASE("predictions") {
    SyntheticShiftConfig cfg;
    cfg.class_separation = 8.0;
    cfg.shift_magnitude = 0.0;
    const SyntheticTask task = generate_synthetic(cfg);
    const BaselineModel m = train_baseline(task.source.features, task.source.labels);
    const auto first = task.source.features.select({0, 1, 2, 0});
    const PredictedLabels p = predict_baseline(m, first);
    CHECK(p.hard_labels[0] == task.source.labels.indices()[0]);
    CHECK(p.hard_labels[1] == task.source.labels.indices()[1]);
    CHECK(p.hard_labels[2] == task.source.labels.indices()[2]);
    CHECK(p.hard_labels[3] == p.hard_labels[0]);
    CHECK(p.label_vectors.col(3) == p.label_vectors.col(0));
    for (Eigen::Index j = 0; j < 4; ++j) CHECK(p.label_vectors.col(j).sum() == doctest::Approx(1.0));
}

TEST_CASE("independent of any target data") {
    SyntheticShiftConfig a;
    SyntheticShiftConfig b;
    b.shift_magnitude = 5.0;
    const SyntheticTask ta = generate_synthetic(a);
    const SyntheticTask tb = generate_synthetic(b);
    REQUIRE(ta.source.features == tb.source.features);
    CHECK(train_baseline(ta.source.features, ta.source.labels).C == train_baseline(tb.source.features, tb.source.labels).C);
}

TEST_CASE("validation") {
    std::mt19937_64 rng(4);
    const auto s = test::random_set(rng, 2, 3, 5, DomainTag::source);
    CHECK_THROWS_AS(train_baseline(s, test::cyclic_labels(5), 0.0), ConfigError);
    CHECK_THROWS_AS(train_baseline(s, test::cyclic_labels(4)), DimensionError);
    const BaselineModel m = train_baseline(s, test::cyclic_labels(5));
    CHECK_THROWS_AS(predict_baseline(m, test::random_set(rng, 2, 4, 3, DomainTag::test)), DimensionError);
}

}
