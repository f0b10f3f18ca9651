#include "rstr/verification/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rstr::oracle {

double soft_threshold(double a, double zeta) {
    if (a > zeta) return a - zeta;
    if (a < -zeta) return a + zeta;
    return 0.0;
}

double q_step_objective(const Matrix& K, const Vector& k, const Matrix& L, double gamma,
                        const Matrix& P, const Matrix& T, double kappa, const Matrix& Q) {
    const Eigen::Index n = K.rows();
    const Eigen::Index ns = K.cols();
    const Eigen::Index c = L.rows();
    double fit = 0.0;
    for (Eigen::Index cls = 0; cls < c; ++cls) {
        for (Eigen::Index j = 0; j < ns; ++j) {
            double pred = 0.0;
            for (Eigen::Index r = 0; r < n; ++r) pred += Q(r, cls) * K(r, j);
            const double diff = L(cls, j) - pred;
            fit += diff * diff;
        }
    }
    double gap = 0.0;
    for (Eigen::Index cls = 0; cls < c; ++cls) {
        double g = 0.0;
        for (Eigen::Index r = 0; r < n; ++r) g += Q(r, cls) * k(r);
        gap += g * g;
    }
    double trace = 0.0;
    double prox = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index cls = 0; cls < c; ++cls) {
            const double diff = P(r, cls) - Q(r, cls);
            trace += T(r, cls) * diff;
            prox += diff * diff;
        }
    }
    return fit + gamma * gap + trace + 0.5 * kappa * prox;
}

Matrix q_step_gradient(const Matrix& K, const Vector& k, const Matrix& L, double gamma,
                       const Matrix& P, const Matrix& T, double kappa, const Matrix& Q,
                       double step) {
    Matrix grad(Q.rows(), Q.cols());
    Matrix probe = Q;
    for (Eigen::Index r = 0; r < Q.rows(); ++r) {
        for (Eigen::Index c = 0; c < Q.cols(); ++c) {
            probe(r, c) = Q(r, c) + step;
            const double up = q_step_objective(K, k, L, gamma, P, T, kappa, probe);
            probe(r, c) = Q(r, c) - step;
            const double down = q_step_objective(K, k, L, gamma, P, T, kappa, probe);
            probe(r, c) = Q(r, c);
            grad(r, c) = (up - down) / (2.0 * step);
        }
    }
    return grad;
}

double p_objective(const Matrix& K, const Vector& k, const Matrix& L, double mu, double gamma,
                   const Matrix& P) {
    const Matrix zero = Matrix::Zero(P.rows(), P.cols());
    // With T = 0 and kappa = 0 the Q-step objective is the smooth part.
    double value = q_step_objective(K, k, L, gamma, zero, zero, 0.0, P);
    for (Eigen::Index r = 0; r < P.rows(); ++r) {
        for (Eigen::Index c = 0; c < P.cols(); ++c) value += mu * std::abs(P(r, c));
    }
    return value;
}

Matrix least_squares_coefficients(const Matrix& K, const Matrix& L, double ridge) {
    Matrix gram = K.transpose() * K;
    gram.diagonal().array() += ridge;
    const Matrix alpha = gram.colPivHouseholderQr().solve(L.transpose());
    return K * alpha;
}

double lasso_objective(const Vector& y, const Matrix& D, double lambda, const Vector& w) {
    double sq = 0.0;
    for (Eigen::Index r = 0; r < D.rows(); ++r) {
        double pred = 0.0;
        for (Eigen::Index i = 0; i < D.cols(); ++i) pred += D(r, i) * w(i);
        sq += (y(r) - pred) * (y(r) - pred);
    }
    double l1 = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) l1 += std::abs(w(i));
    return sq + lambda * l1;
}

double lasso_kkt(const Vector& y, const Matrix& D, double lambda, const Vector& w) {
    std::vector<double> residual(static_cast<std::size_t>(D.rows()));
    for (Eigen::Index r = 0; r < D.rows(); ++r) {
        double pred = 0.0;
        for (Eigen::Index i = 0; i < D.cols(); ++i) pred += D(r, i) * w(i);
        residual[static_cast<std::size_t>(r)] = pred - y(r);
    }
    double worst = 0.0;
    for (Eigen::Index i = 0; i < D.cols(); ++i) {
        if (w(i) < 0.0) return std::numeric_limits<double>::infinity();
        double g = 0.0;
        for (Eigen::Index r = 0; r < D.rows(); ++r) g += D(r, i) * residual[static_cast<std::size_t>(r)];
        const double stationarity = 2.0 * g + lambda;
        const double viol = w(i) > 0.0 ? std::abs(stationarity) : std::max(0.0, -stationarity);
        worst = std::max(worst, viol);
    }
    return worst;
}

GridMinimum lasso_grid_search(const Vector& y, const Matrix& D, double lambda, double lo,
                              double hi, double step) {
    // Quadratic form coefficients so each grid point costs O(1).
    double g00 = 0, g01 = 0, g11 = 0, b0 = 0, b1 = 0, yy = 0;
    for (Eigen::Index r = 0; r < D.rows(); ++r) {
        g00 += D(r, 0) * D(r, 0);
        g01 += D(r, 0) * D(r, 1);
        g11 += D(r, 1) * D(r, 1);
        b0 += D(r, 0) * y(r);
        b1 += D(r, 1) * y(r);
        yy += y(r) * y(r);
    }
    const auto count = static_cast<long>(std::llround((hi - lo) / step));
    GridMinimum best{std::numeric_limits<double>::infinity(), 0.0, 0.0};
    for (long i = 0; i <= count; ++i) {
        const double a = lo + step * static_cast<double>(i);
        for (long j = 0; j <= count; ++j) {
            const double b = lo + step * static_cast<double>(j);
            const double value = yy - 2.0 * (a * b0 + b * b1) + a * a * g00 + 2.0 * a * b * g01 +
                                 b * b * g11 + lambda * (std::abs(a) + std::abs(b));
            if (value < best.value) best = {value, a, b};
        }
    }
    return best;
}

Vector simplex_grid_search(const Vector& v, double step) {
    const auto count = static_cast<long>(std::llround(1.0 / step));
    double best = std::numeric_limits<double>::infinity();
    Vector arg(3);
    for (long i = 0; i <= count; ++i) {
        for (long j = 0; i + j <= count; ++j) {
            const double a = step * static_cast<double>(i);
            const double b = step * static_cast<double>(j);
            const double c = std::max(0.0, 1.0 - a - b);
            const double dist = (a - v(0)) * (a - v(0)) + (b - v(1)) * (b - v(1)) + (c - v(2)) * (c - v(2));
            if (dist < best) {
                best = dist;
                arg << a, b, c;
            }
        }
    }
    return arg;
}

namespace {

// sum_i w_i P'(K_i^s 1/Ns - K_i^t 1/Nt), entry by entry.
std::vector<double> mean_gap(const Matrix& P, const Vector& w, const std::vector<Matrix>& Ks,
                             const std::vector<Matrix>& Kt) {
    const Eigen::Index n = P.rows();
    const Eigen::Index c = P.cols();
    std::vector<double> gap(static_cast<std::size_t>(c), 0.0);
    for (std::size_t blk = 0; blk < Ks.size(); ++blk) {
        const double ns = static_cast<double>(Ks[blk].cols());
        const double nt = static_cast<double>(Kt[blk].cols());
        for (Eigen::Index cls = 0; cls < c; ++cls) {
            double acc = 0.0;
            for (Eigen::Index r = 0; r < n; ++r) {
                double ms = 0.0;
                for (Eigen::Index j = 0; j < Ks[blk].cols(); ++j) ms += Ks[blk](r, j);
                double mt = 0.0;
                for (Eigen::Index j = 0; j < Kt[blk].cols(); ++j) mt += Kt[blk](r, j);
                acc += P(r, cls) * (ms / ns - mt / nt);
            }
            gap[static_cast<std::size_t>(cls)] += w(static_cast<Eigen::Index>(blk)) * acc;
        }
    }
    return gap;
}

}  // namespace

double relaxed_mmd(const Matrix& P, const Vector& w, const std::vector<Matrix>& Ks,
                   const std::vector<Matrix>& Kt) {
    double out = 0.0;
    for (double g : mean_gap(P, w, Ks, Kt)) out += g * g;
    return out;
}

double rstr_objective(const Matrix& P, const Vector& w, const std::vector<Matrix>& Ks,
                      const std::vector<Matrix>& Kt, const Matrix& L, double lambda, double mu,
                      double gamma) {
    const Eigen::Index n = P.rows();
    const Eigen::Index c = P.cols();
    const Eigen::Index ns = L.cols();
    double loss = 0.0;
    for (Eigen::Index cls = 0; cls < c; ++cls) {
        for (Eigen::Index j = 0; j < ns; ++j) {
            double pred = 0.0;
            for (std::size_t blk = 0; blk < Ks.size(); ++blk) {
                for (Eigen::Index r = 0; r < n; ++r) {
                    pred += w(static_cast<Eigen::Index>(blk)) * P(r, cls) * Ks[blk](r, j);
                }
            }
            loss += (L(cls, j) - pred) * (L(cls, j) - pred);
        }
    }
    double w_l1 = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) w_l1 += std::abs(w(i));
    double p_l1 = 0.0;
    for (Eigen::Index cls = 0; cls < c; ++cls) {
        for (Eigen::Index r = 0; r < n; ++r) p_l1 += std::abs(P(r, cls));
    }
    return loss + lambda * w_l1 + mu * p_l1 + gamma * relaxed_mmd(P, w, Ks, Kt);
}

double accuracy(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& truths) {
    std::size_t correct = 0;
    for (std::size_t j = 0; j < preds.size(); ++j) correct += (preds[j] == truths[j]);
    return 100.0 * static_cast<double>(correct) / static_cast<double>(preds.size());
}

double mean_f1(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& truths,
               std::size_t c) {
    double sum = 0.0;
    for (std::size_t cls = 0; cls < c; ++cls) {
        long tp = 0;
        long predicted = 0;
        long actual = 0;
        for (std::size_t j = 0; j < preds.size(); ++j) {
            tp += (preds[j] == cls && truths[j] == cls);
            predicted += (preds[j] == cls);
            actual += (truths[j] == cls);
        }
        const double p = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
        const double r = actual ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
        if (p + r > 0.0) sum += 2.0 * p * r / (p + r);
    }
    return sum / static_cast<double>(c);
}

const std::vector<ProtocolRow>& published_protocol() {
    static const std::vector<ProtocolRow> rows = {
        {"TYPE-I", "Exp.1: H -> V", "SMIC (HS)", "SMIC (VIS)"},
        {"TYPE-I", "Exp.2: V -> H", "SMIC (VIS)", "SMIC (HS)"},
        {"TYPE-I", "Exp.3: H -> N", "SMIC (HS)", "SMIC (NIR)"},
        {"TYPE-I", "Exp.4: N -> H", "SMIC (NIR)", "SMIC (HS)"},
        {"TYPE-I", "Exp.5: V -> N", "SMIC (VIS)", "SMIC (NIR)"},
        {"TYPE-I", "Exp.6: N -> V", "SMIC (NIR)", "SMIC (VIS)"},
        {"TYPE-II", "Exp.7: C -> H", "Selected CASME II", "SMIC (HS)"},
        {"TYPE-II", "Exp.8: H -> C", "SMIC (HS)", "Selected CASME II"},
        {"TYPE-II", "Exp.9: C -> V", "Selected CASME II", "SMIC (VIS)"},
        {"TYPE-II", "Exp.10: V -> C", "SMIC (VIS)", "Selected CASME II"},
        {"TYPE-II", "Exp.11: C -> N", "Selected CASME II", "SMIC (NIR)"},
        {"TYPE-II", "Exp.12: N -> C", "SMIC (NIR)", "Selected CASME II"},
    };
    return rows;
}

}  // namespace rstr::oracle
