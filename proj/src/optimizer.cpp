#include "rstr/optimizer.hpp"

#include "rstr/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace rstr {

void IalmParams::validate() const {
    if (!(kappa_init > 0.0)) throw ConfigError("ialm: kappa_init must be positive");
    if (!(rho > 1.0)) throw ConfigError("ialm: rho must exceed 1");
    if (!(kappa_max >= kappa_init)) throw ConfigError("ialm: kappa_max must be >= kappa_init");
    if (!(epsilon > 0.0)) throw ConfigError("ialm: epsilon must be positive");
    if (max_iters < 1) throw ConfigError("ialm: max_iters must be positive");
}

void PSubproblem::validate() const {
    if (kst_tilde.size() != Ks_tilde.rows()) throw DimensionError("p-subproblem: kst length != basis size");
    if (labels.cols() != Ks_tilde.cols()) throw DimensionError("p-subproblem: label count != source count");
    if (!(std::isfinite(mu) && mu >= 0.0)) throw ConfigError("p-subproblem: mu must be finite and >= 0");
    if (!(std::isfinite(gamma) && gamma >= 0.0)) throw ConfigError("p-subproblem: gamma must be finite and >= 0");
}

Vector block_mean_gap(const KernelSet& kernels, std::size_t block) {
    const Matrix& ks = kernels.per_block_source.at(block);
    const Matrix& kt = kernels.per_block_target.at(block);
    return ks.rowwise().sum() / static_cast<double>(ks.cols()) -
           kt.rowwise().sum() / static_cast<double>(kt.cols());
}

PSubproblem make_p_subproblem(const KernelSet& kernels, const Vector& w, const Matrix& labels,
                              double mu, double gamma) {
    if (static_cast<std::size_t>(w.size()) != kernels.num_blocks()) {
        throw DimensionError("region weight count does not match block count");
    }
    if (static_cast<std::size_t>(labels.cols()) != kernels.num_source()) {
        throw DimensionError("label count does not match source sample count");
    }
    const auto n = static_cast<Eigen::Index>(kernels.basis_size());
    PSubproblem sub;
    sub.Ks_tilde = Matrix::Zero(n, static_cast<Eigen::Index>(kernels.num_source()));
    sub.kst_tilde = Vector::Zero(n);
    for (std::size_t i = 0; i < kernels.num_blocks(); ++i) {
        const double wi = w(static_cast<Eigen::Index>(i));
        if (wi == 0.0) continue;
        sub.Ks_tilde.noalias() += wi * kernels.per_block_source[i];
        sub.kst_tilde.noalias() += wi * block_mean_gap(kernels, i);
    }
    sub.labels = labels;
    sub.mu = mu;
    sub.gamma = gamma;
    sub.validate();
    return sub;
}

double p_objective(const PSubproblem& problem, const Matrix& P) {
    const Matrix residual = problem.labels - P.transpose() * problem.Ks_tilde;
    const Vector gap = P.transpose() * problem.kst_tilde;
    return residual.squaredNorm() + problem.mu * P.cwiseAbs().sum() +
           problem.gamma * gap.squaredNorm();
}

double soft_threshold(double a, double zeta) {
    if (a > zeta) return a - zeta;
    if (a < -zeta) return a + zeta;
    return 0.0;
}

Matrix soft_threshold(const Matrix& A, double zeta) {
    return A.unaryExpr([zeta](double a) { return soft_threshold(a, zeta); });
}

QStepSolver::QStepSolver(const PSubproblem& problem) {
    problem.validate();
    Matrix H = problem.Ks_tilde * problem.Ks_tilde.transpose();
    if (problem.gamma > 0.0) {
        H.noalias() += problem.gamma * problem.kst_tilde * problem.kst_tilde.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(H);
    if (eig.info() != Eigen::Success) throw Error("q-step: eigendecomposition failed");
    eigenvectors_ = eig.eigenvectors();
    // H is positive semi-definite; clip rounding noise below zero.
    eigenvalues_ = eig.eigenvalues().cwiseMax(0.0);
    data_term_ = problem.Ks_tilde * problem.labels.transpose();
}

Matrix QStepSolver::solve(const Matrix& P, const Matrix& T, double kappa) const {
    if (!(kappa > 0.0)) throw ConfigError("q-step: kappa must be positive");
    if (P.rows() != data_term_.rows() || P.cols() != data_term_.cols() || T.rows() != P.rows() ||
        T.cols() != P.cols()) {
        throw DimensionError("q-step: P and T must be (Ns + Nt) x c");
    }
    const Matrix rhs = data_term_ + 0.5 * (T + kappa * P);
    Matrix coeffs = eigenvectors_.transpose() * rhs;
    const Vector inv = (eigenvalues_.array() + 0.5 * kappa).inverse();
    coeffs = inv.asDiagonal() * coeffs;
    return eigenvectors_ * coeffs;
}

Matrix solve_q(const PSubproblem& problem, const Matrix& P, const Matrix& T, double kappa) {
    return QStepSolver(problem).solve(P, T, kappa);
}

namespace {

double inf_norm(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

PSolveResult solve_p_subproblem(const PSubproblem& problem, const IalmParams& params,
                                const Matrix& P_init) {
    params.validate();
    problem.validate();
    if (P_init.rows() != problem.basis_size() || P_init.cols() != problem.num_classes()) {
        throw DimensionError("p-subproblem: P_init must be (Ns + Nt) x c");
    }
    const QStepSolver q_step(problem);

    PSolveResult out;
    Matrix P = P_init;
    Matrix T = Matrix::Zero(P.rows(), P.cols());
    double kappa = params.kappa_init;
    out.kappa_history.reserve(static_cast<std::size_t>(params.max_iters));

    for (int it = 1; it <= params.max_iters; ++it) {
        out.kappa_history.push_back(kappa);
        const Matrix Q = q_step.solve(P, T, kappa);
        Matrix P_next = soft_threshold(Q - T / kappa, problem.mu / kappa);
        T.noalias() += kappa * (P_next - Q);
        kappa = std::min(params.rho * kappa, params.kappa_max);

        const double primal = inf_norm(P_next - Q);
        const double change = inf_norm(P_next - P);
        P = std::move(P_next);
        out.iterations = it;
        out.primal_residual = primal;
        if (primal < params.epsilon && change < params.epsilon) {
            out.converged = true;
            break;
        }
    }
    out.P = std::move(P);
    return out;
}

void LassoProblem::validate() const {
    if (D.rows() != y.size()) throw DimensionError("lasso: rows(D) != len(y)");
    if (!(std::isfinite(lambda) && lambda >= 0.0)) throw ConfigError("lasso: lambda must be >= 0");
    if (!D.allFinite() || !y.allFinite()) throw DataError("lasso: non-finite design or response");
}

LassoProblem build_w_design(const Matrix& P, const KernelSet& kernels, const Matrix& labels,
                            double gamma, double lambda) {
    const auto n = static_cast<Eigen::Index>(kernels.basis_size());
    const auto ns = static_cast<Eigen::Index>(kernels.num_source());
    const Eigen::Index c = labels.rows();
    if (P.rows() != n || P.cols() != c) throw DimensionError("w-design: P must be (Ns + Nt) x c");
    if (labels.cols() != ns) throw DimensionError("w-design: label count != source count");
    if (!(std::isfinite(gamma) && gamma >= 0.0)) throw ConfigError("w-design: gamma must be >= 0");

    const auto k = static_cast<Eigen::Index>(kernels.num_blocks());
    const double root_gamma = std::sqrt(gamma);
    LassoProblem lp;
    lp.y = Vector::Zero(c * ns + c);
    lp.y.head(c * ns) = labels.reshaped();
    lp.D = Matrix::Zero(c * ns + c, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto bi = static_cast<std::size_t>(i);
        const Matrix fitted = P.transpose() * kernels.per_block_source[bi];
        lp.D.col(i).head(c * ns) = fitted.reshaped();
        lp.D.col(i).tail(c) = root_gamma * (P.transpose() * block_mean_gap(kernels, bi));
    }
    lp.lambda = lambda;
    lp.nonneg = true;
    return lp;
}

double lasso_objective(const LassoProblem& problem, const Vector& w) {
    return (problem.y - problem.D * w).squaredNorm() + problem.lambda * w.cwiseAbs().sum();
}

double lasso_kkt_residual(const LassoProblem& problem, const Vector& w) {
    const Vector grad = 2.0 * problem.D.transpose() * (problem.D * w - problem.y);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        double viol = 0.0;
        if (w(i) > 0.0) {
            viol = std::abs(grad(i) + problem.lambda);
        } else if (w(i) < 0.0) {
            viol = problem.nonneg ? std::abs(w(i)) + std::abs(grad(i) + problem.lambda)
                                  : std::abs(grad(i) - problem.lambda);
        } else if (problem.nonneg) {
            viol = std::max(0.0, -(grad(i) + problem.lambda));
        } else {
            viol = std::max(0.0, std::abs(grad(i)) - problem.lambda);
        }
        worst = std::max(worst, viol);
    }
    return worst;
}

LassoResult solve_nonneg_lasso(const LassoProblem& problem, const Vector& w_init,
                               const LassoOptions& options) {
    problem.validate();
    if (w_init.size() != problem.D.cols()) throw DimensionError("lasso: w_init length != cols(D)");
    if (problem.nonneg && (w_init.array() < 0.0).any()) {
        throw ConfigError("lasso: w_init must be non-negative");
    }
    const Matrix G = problem.D.transpose() * problem.D;
    const Vector b = problem.D.transpose() * problem.y;
    const double lambda = problem.lambda;
    const double tol = options.tolerance * std::max(1.0, 2.0 * (b.size() ? b.cwiseAbs().maxCoeff() : 0.0));

    LassoResult out;
    out.w = w_init;
    Vector Gw = G * out.w;
    for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
        for (Eigen::Index i = 0; i < out.w.size(); ++i) {
            const double gii = G(i, i);
            const double old = out.w(i);
            double fresh = 0.0;
            if (gii > 0.0) {
                // Partial residual correlation with coordinate i removed.
                const double rho = b(i) - (Gw(i) - gii * old);
                fresh = problem.nonneg ? std::max(0.0, (2.0 * rho - lambda) / (2.0 * gii))
                                       : soft_threshold(2.0 * rho, lambda) / (2.0 * gii);
            }
            if (fresh != old) {
                Gw.noalias() += (fresh - old) * G.col(i);
                out.w(i) = fresh;
            }
        }
        out.sweeps = sweep;
        out.kkt_residual = lasso_kkt_residual(problem, out.w);
        if (out.kkt_residual <= tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

Vector project_simplex(const Vector& v) {
    if (v.size() == 0) return v;
    if (!v.allFinite()) throw DataError("project_simplex: non-finite input");
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cumulative += u[j];
        const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
        if (u[j] - candidate > 0.0) theta = candidate;
    }
    return (v.array() - theta).cwiseMax(0.0).matrix();
}

}  // namespace rstr
