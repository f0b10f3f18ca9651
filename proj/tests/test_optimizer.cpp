#include "doctest.h"

#include "rstr/error.hpp"
#include "rstr/optimizer.hpp"
#include "rstr/verification/oracles.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <numeric>

using namespace rstr;

namespace {

PSubproblem random_problem(std::mt19937_64& rng, std::size_t ns, double mu, double gamma) {
    const auto s = test::random_set(rng, 2, 3, ns, DomainTag::source);
    const auto t = test::random_set(rng, 2, 3, ns, DomainTag::target, 0.7);
    const KernelSet ks = build_kernel_set(s, t, KernelConfig::linear());
    Vector w(2);
    w << 0.8, 0.4;
    return make_p_subproblem(ks, w, test::cyclic_labels(ns).onehot(), mu, gamma);
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("soft threshold") {
    CHECK(soft_threshold(0.0, 1.0) == 0.0);
    CHECK(soft_threshold(3.0, 1.0) == 2.0);
    CHECK(soft_threshold(-3.0, 1.0) == -2.0);
    CHECK(soft_threshold(1.0, 1.0) == 0.0);
    CHECK(soft_threshold(-1.0, 1.0) == 0.0);
    CHECK(soft_threshold(2.5, 0.0) == 2.5);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-10, 10), z(0, 4);
    for (int i = 0; i < 2000; ++i) {
        const double a = u(rng), zeta = z(rng);
        CHECK(soft_threshold(-a, zeta) == -soft_threshold(a, zeta));
        CHECK(std::abs(soft_threshold(a, zeta)) <= std::abs(a));
    }
    Matrix A(2, 2);
    A << 3, -0.5, -4, 1;
    Matrix want(2, 2);
    want << 2, 0, -3, 0;
    CHECK(soft_threshold(A, 1.0) == want);
}

TEST_CASE("q-step") {
    std::mt19937_64 rng(4);
    PSubproblem p = random_problem(rng, 6, 0.1, 0.0);
    const auto n = p.basis_size();
    SUBCASE("zero data gives zero") {
        p.labels.setZero();
        const Matrix Q = solve_q(p, Matrix::Zero(n, 3), Matrix::Zero(n, 3), 0.5);
        CHECK(Q.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("stationary under finite differences") {
        p.gamma = 1.3;
        const Matrix P = test::randn(rng, n, 3), T = test::randn(rng, n, 3);
        const Matrix Q = solve_q(p, P, T, 0.8);
        const Matrix g = oracle::q_step_gradient(p.Ks_tilde, p.kst_tilde, p.labels, p.gamma, P, T, 0.8, Q);
        const Matrix g0 = oracle::q_step_gradient(p.Ks_tilde, p.kst_tilde, p.labels, p.gamma, P, T, 0.8,
                                                  test::randn(rng, n, 3));
        CHECK(g.cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + g0.cwiseAbs().maxCoeff()));
    }
    SUBCASE("large kappa pulls Q to P + T / kappa") {
        const Matrix P = test::randn(rng, n, 3), T = test::randn(rng, n, 3);
        const double kappa = 1e9;
        const Matrix Q = solve_q(p, P, T, kappa);
        CHECK((Q - (P + T / kappa)).cwiseAbs().maxCoeff() <= 1e-6);
    }
    SUBCASE("one factorisation serves every kappa") {
        const QStepSolver solver(p);
        const Matrix P = test::randn(rng, n, 3), T = test::randn(rng, n, 3);
        for (double kappa : {0.01, 1.0, 100.0}) {
            CHECK((solver.solve(P, T, kappa) - solve_q(p, P, T, kappa)).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
}

TEST_CASE("ialm") {
    std::mt19937_64 rng(8);
    SUBCASE("least squares when unregularised") {
        PSubproblem p;
        p.Ks_tilde = test::randn(rng, 12, 6);
        p.kst_tilde = Vector::Zero(12);
        p.labels = test::cyclic_labels(6).onehot();
        const PSolveResult r = solve_p_subproblem(p, IalmParams{}, Matrix::Zero(12, 3));
        CHECK(r.converged);
        CHECK((r.P - oracle::least_squares_coefficients(p.Ks_tilde, p.labels)).cwiseAbs().maxCoeff() <= 1e-5);
    }
    SUBCASE("huge mu drives P to zero") {
        PSubproblem p = random_problem(rng, 5, 0.0, 0.5);
        p.mu = 10.0 * (p.Ks_tilde * p.labels.transpose()).cwiseAbs().maxCoeff();
        const PSolveResult r = solve_p_subproblem(p, IalmParams{}, test::randn(rng, p.basis_size(), 3));
        CHECK(r.P.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("decreases the objective from the start point") {
        const PSubproblem p = random_problem(rng, 8, 0.1, 1.0);
        const Matrix P0 = test::randn(rng, p.basis_size(), 3, 0.1);
        const PSolveResult r = solve_p_subproblem(p, IalmParams{}, P0);
        CHECK(p_objective(p, r.P) <= p_objective(p, P0));
        CHECK(p_objective(p, r.P) ==
              doctest::Approx(oracle::p_objective(p.Ks_tilde, p.kst_tilde, p.labels, p.mu, p.gamma, r.P)));
        if (r.converged) CHECK(r.primal_residual < IalmParams{}.epsilon);
        for (std::size_t k = 1; k < r.kappa_history.size(); ++k) {
            CHECK(r.kappa_history[k] >= r.kappa_history[k - 1]);
            CHECK(r.kappa_history[k] <= IalmParams{}.kappa_max);
        }
    }
    SUBCASE("kappa saturates at the cap") {
        const PSubproblem p = random_problem(rng, 6, 0.05, 0.2);
        IalmParams params;
        params.kappa_max = 1.0;
        params.epsilon = 1e-300;  // never stop early
        params.max_iters = 120;
        const PSolveResult r = solve_p_subproblem(p, params, Matrix::Zero(p.basis_size(), 3));
        CHECK_FALSE(r.converged);
        CHECK(r.kappa_history.back() == 1.0);
    }
    SUBCASE("invalid parameters") {
        IalmParams bad;
        bad.rho = 0.9;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }
}

TEST_CASE("w design") {
    std::mt19937_64 rng(9);
    const auto s = test::random_set(rng, 3, 2, 5, DomainTag::source);
    const auto t = test::random_set(rng, 3, 2, 4, DomainTag::target, 1.0);
    const KernelSet ks = build_kernel_set(s, t, KernelConfig::linear());
    const Matrix L = test::cyclic_labels(5).onehot();
    const Matrix P = test::randn(rng, 9, 3);
    const double gamma = 2.5;
    const LassoProblem lp = build_w_design(P, ks, L, gamma);
    for (int trial = 0; trial < 10; ++trial) {
        const Vector w = test::randn(rng, 3, 1).cwiseAbs();
        double loss = 0.0;
        Vector gap = Vector::Zero(3);
        Matrix pred = Matrix::Zero(3, 5);
        for (std::size_t i = 0; i < 3; ++i) {
            pred += w(static_cast<Eigen::Index>(i)) * P.transpose() * ks.per_block_source[i];
            gap += w(static_cast<Eigen::Index>(i)) * P.transpose() * block_mean_gap(ks, i);
        }
        loss = (L - pred).squaredNorm() + gamma * gap.squaredNorm();
        CHECK((lp.y - lp.D * w).squaredNorm() == doctest::Approx(loss).epsilon(1e-12));
    }
    SUBCASE("zero coefficients") {
        const LassoProblem z = build_w_design(Matrix::Zero(9, 3), ks, L, gamma);
        CHECK(z.D.cwiseAbs().maxCoeff() == 0.0);
        CHECK(z.y.head(15) == Eigen::Map<const Vector>(L.data(), 15));
        CHECK(z.y.tail(3).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("gamma zero leaves the bottom block empty") {
        const LassoProblem z = build_w_design(P, ks, L, 0.0);
        CHECK(z.D.bottomRows(3).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("non-negative lasso") {
    SUBCASE("identity design") {
        LassoProblem lp;
        lp.D = Matrix::Identity(2, 2);
        lp.y = Vector(2);
        lp.y << 3, -1;
        lp.lambda = 2.0;
        const LassoResult r = solve_nonneg_lasso(lp, Vector::Zero(2));
        CHECK(r.converged);
        CHECK(r.w(0) == doctest::Approx(2.0));
        CHECK(r.w(1) == 0.0);
    }
    std::mt19937_64 rng(10);
    SUBCASE("lambda above the dominance bound") {
        LassoProblem lp;
        lp.D = test::randn(rng, 8, 4);
        lp.y = test::randn(rng, 8, 1);
        lp.lambda = 2.0 * (lp.D.transpose() * lp.y).maxCoeff() + 1e-9;
        const LassoResult r = solve_nonneg_lasso(lp, Vector::Ones(4));
        CHECK(r.w.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("kkt and monotone objective") {
        for (int trial = 0; trial < 20; ++trial) {
            LassoProblem lp;
            lp.D = test::randn(rng, 10, 6);
            lp.y = test::randn(rng, 10, 1, 2.0);
            lp.lambda = 0.5;
            const Vector w0 = test::randn(rng, 6, 1).cwiseAbs();
            const LassoResult r = solve_nonneg_lasso(lp, w0);
            CHECK(r.w.minCoeff() >= 0.0);
            CHECK(oracle::lasso_kkt(lp.y, lp.D, lp.lambda, r.w) <= 1e-5);
            CHECK(lasso_objective(lp, r.w) <= lasso_objective(lp, w0));
            CHECK(lasso_kkt_residual(lp, r.w) == doctest::Approx(oracle::lasso_kkt(lp.y, lp.D, lp.lambda, r.w)).epsilon(1e-6));
        }
    }
    SUBCASE("grid oracle on two variables") {
        LassoProblem lp;
        lp.D = test::randn(rng, 5, 2, 0.5);
        lp.y = lp.D * Vector::Constant(2, 1.5) + test::randn(rng, 5, 1, 0.1);
        lp.lambda = 0.3;
        const LassoResult r = solve_nonneg_lasso(lp, Vector::Zero(2));
        const auto grid = oracle::lasso_grid_search(lp.y, lp.D, lp.lambda, 0.0, 5.0, 1e-3);
        const double f = lasso_objective(lp, r.w);
        // The solver may land between grid points, but never above the grid minimum.
        CHECK(f <= grid.value + 1e-9);
        CHECK(f >= grid.value - 1e-4);
    }
    SUBCASE("rejects bad problems") {
        LassoProblem lp;
        lp.D = Matrix::Identity(2, 2);
        lp.y = Vector::Zero(3);
        CHECK_THROWS(solve_nonneg_lasso(lp, Vector::Zero(2)));
        lp.y = Vector::Zero(2);
        lp.lambda = -1.0;
        CHECK_THROWS(solve_nonneg_lasso(lp, Vector::Zero(2)));
    }
}

TEST_CASE("simplex projection") {
    Vector v(3);
    v << 0.2, 0.3, 0.5;
    CHECK((project_simplex(v) - v).cwiseAbs().maxCoeff() <= 1e-15);
    v << 2, 0, 0;
    CHECK(project_simplex(v) == Vector::Unit(3, 0));
    v << 0.5, 0.4, -0.3;
    CHECK((project_simplex(v) - oracle::simplex_grid_search(v, 1e-3)).cwiseAbs().maxCoeff() <= 2e-3);
    v << 0.5, 0.5, -1;
    const Vector l = project_simplex(v);
    CHECK(l(0) == doctest::Approx(0.5));
    CHECK(l(1) == doctest::Approx(0.5));
    CHECK(l(2) == 0.0);
    CHECK(argmax_lowest(l) == 0);

    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 500; ++trial) {
        const Eigen::Index c = 2 + trial % 7;
        const Vector x = test::randn(rng, c, 1, 3.0);
        const Vector p = project_simplex(x);
        CHECK(p.minCoeff() >= 0.0);
        CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
        CHECK((project_simplex(p) - p).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(argmax_lowest(p) == argmax_lowest(x));
        std::vector<Eigen::Index> perm(static_cast<std::size_t>(c));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Vector px(c), pp(c);
        for (Eigen::Index i = 0; i < c; ++i) {
            px(i) = x(perm[static_cast<std::size_t>(i)]);
            pp(i) = p(perm[static_cast<std::size_t>(i)]);
        }
        CHECK((project_simplex(px) - pp).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

}
