#ifndef RSTR_OPTIMIZER_HPP
#define RSTR_OPTIMIZER_HPP

#include "rstr/features.hpp"
#include "rstr/kernels.hpp"

#include <vector>

namespace rstr {

/// Penalty schedule and stopping rule of the inexact augmented Lagrangian loop.
struct IalmParams {
    double kappa_init = 1e-2;
    double rho = 1.1;
    double kappa_max = 1e6;
    double epsilon = 1e-7;
    int max_iters = 500;

    void validate() const;
};

/// min_P |L - P' Ks|_F^2 + mu |P|_1 + gamma |P' kst|_2^2
struct PSubproblem {
    Matrix Ks_tilde;   // (Ns + Nt) x Ns, sum_i w_i K_i^s
    Vector kst_tilde;  // (Ns + Nt), sum_i w_i (K_i^s 1/Ns - K_i^t 1/Nt)
    Matrix labels;     // c x Ns
    double mu = 0.0;
    double gamma = 0.0;

    [[nodiscard]] Eigen::Index basis_size() const { return Ks_tilde.rows(); }
    [[nodiscard]] Eigen::Index num_classes() const { return labels.rows(); }
    void validate() const;
};

/// Weighted combination of the per-block kernels for fixed region weights.
PSubproblem make_p_subproblem(const KernelSet& kernels, const Vector& w, const Matrix& labels,
                              double mu, double gamma);

/// Mean-difference vector (K_i^s 1/Ns - K_i^t 1/Nt) of block i.
Vector block_mean_gap(const KernelSet& kernels, std::size_t block);

/// Objective of the P-subproblem at P.
double p_objective(const PSubproblem& problem, const Matrix& P);

/// S_zeta[a]: shrink toward zero by zeta, zero inside [-zeta, zeta].
double soft_threshold(double a, double zeta);
Matrix soft_threshold(const Matrix& A, double zeta);

/// Closed-form minimiser of the smooth Q-step of the augmented Lagrangian:
///   Q = (Ks Ks' + gamma kst kst' + kappa/2 I)^-1 (Ks L' + (T + kappa P)/2)
///
/// The system matrix is factored once (symmetric eigendecomposition of
/// Ks Ks' + gamma kst kst') so that every kappa reuses the same factors.
class QStepSolver {
public:
    explicit QStepSolver(const PSubproblem& problem);

    [[nodiscard]] Matrix solve(const Matrix& P, const Matrix& T, double kappa) const;

private:
    Matrix eigenvectors_;
    Vector eigenvalues_;
    Matrix data_term_;  // Ks L'
};

Matrix solve_q(const PSubproblem& problem, const Matrix& P, const Matrix& T, double kappa);

struct PSolveResult {
    Matrix P;
    int iterations = 0;
    bool converged = false;
    double primal_residual = 0.0;  // |P - Q|_inf at exit
    std::vector<double> kappa_history;
};

/// Inexact ALM for the P-subproblem. Starts from P_init with a zero multiplier.
///
/// Each iteration: Q-step, P = S_{mu/kappa}[Q - T/kappa], T += kappa (P - Q),
/// kappa = min(rho kappa, kappa_max). Stops once |P - Q|_inf < epsilon and the
/// P iterate moved less than epsilon (inf-norm) in that iteration.
PSolveResult solve_p_subproblem(const PSubproblem& problem, const IalmParams& params,
                                const Matrix& P_init);

/// min_w |y - D w|_2^2 + lambda |w|_1, optionally subject to w >= 0.
struct LassoProblem {
    Vector y;
    Matrix D;
    double lambda = 0.0;
    bool nonneg = true;

    void validate() const;
};

/// Region-weight subproblem for fixed P, stacked so that
/// |y - D w|^2 = |z - A w|^2 + gamma |B w|^2.
LassoProblem build_w_design(const Matrix& P, const KernelSet& kernels, const Matrix& labels,
                            double gamma, double lambda = 0.0);

struct LassoOptions {
    int max_sweeps = 10000;
    // Stop when the KKT violation falls below tolerance * max(1, |2 D'y|_inf).
    double tolerance = 1e-10;
};

struct LassoResult {
    Vector w;
    int sweeps = 0;
    bool converged = false;
    double kkt_residual = 0.0;
};

/// Cyclic coordinate descent. Each coordinate update is an exact (projected)
/// soft-threshold step, so the objective never increases.
LassoResult solve_nonneg_lasso(const LassoProblem& problem, const Vector& w_init,
                               const LassoOptions& options = {});

double lasso_objective(const LassoProblem& problem, const Vector& w);
double lasso_kkt_residual(const LassoProblem& problem, const Vector& w);

/// Euclidean projection onto {l >= 0, sum(l) = 1}.
Vector project_simplex(const Vector& v);

}  // namespace rstr

#endif  // RSTR_OPTIMIZER_HPP
