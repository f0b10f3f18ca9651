#ifndef RSTR_VERIFICATION_ORACLES_HPP
#define RSTR_VERIFICATION_ORACLES_HPP

// Reference computations used to check the solvers. Everything here is
// written with plain loops or a different decomposition than the code it
// checks, and none of it calls into the optimizer or model internals.

#include "rstr/data_io.hpp"
#include "rstr/features.hpp"
#include "rstr/kernels.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace rstr::oracle {

double soft_threshold(double a, double zeta);

/// |L - Q'K|_F^2 + gamma |Q'k|^2 + tr(T'(P - Q)) + kappa/2 |P - Q|_F^2, by loops.
double q_step_objective(const Matrix& K, const Vector& k, const Matrix& L, double gamma,
                        const Matrix& P, const Matrix& T, double kappa, const Matrix& Q);

/// Central finite-difference gradient of q_step_objective with respect to Q.
Matrix q_step_gradient(const Matrix& K, const Vector& k, const Matrix& L, double gamma,
                       const Matrix& P, const Matrix& T, double kappa, const Matrix& Q,
                       double step = 1e-5);

/// |L - P'K|_F^2 + mu |P|_1 + gamma |P'k|^2, by loops.
double p_objective(const Matrix& K, const Vector& k, const Matrix& L, double mu, double gamma,
                   const Matrix& P);

/// Minimum-norm least squares for min |L - P'K|_F^2 through the dual normal
/// equations P = K (K'K + ridge I)^-1 L', solved with column-pivoted QR.
Matrix least_squares_coefficients(const Matrix& K, const Matrix& L, double ridge = 1e-12);

/// Largest violation of the (non-negative) lasso optimality conditions.
double lasso_kkt(const Vector& y, const Matrix& D, double lambda, const Vector& w);
double lasso_objective(const Vector& y, const Matrix& D, double lambda, const Vector& w);

struct GridMinimum {
    double value;
    double w0;
    double w1;
};
/// Exhaustive search of the two-variable lasso objective over [lo, hi]^2.
GridMinimum lasso_grid_search(const Vector& y, const Matrix& D, double lambda, double lo,
                              double hi, double step);

/// Nearest point to a 3-vector on the simplex grid of spacing `step`.
Vector simplex_grid_search(const Vector& v, double step);

/// Training objective term by term, with explicit sums over blocks, samples and classes.
double rstr_objective(const Matrix& P, const Vector& w, const std::vector<Matrix>& Ks,
                      const std::vector<Matrix>& Kt, const Matrix& L, double lambda, double mu,
                      double gamma);
double relaxed_mmd(const Matrix& P, const Vector& w, const std::vector<Matrix>& Ks,
                   const std::vector<Matrix>& Kt);

double accuracy(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& truths);
double mean_f1(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& truths,
               std::size_t c);

struct ProtocolRow {
    std::string type;
    std::string task;
    std::string source_db;
    std::string target_db;
};
/// The task table as published, row by row.
const std::vector<ProtocolRow>& published_protocol();

}  // namespace rstr::oracle

#endif  // RSTR_VERIFICATION_ORACLES_HPP
