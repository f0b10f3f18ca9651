#ifndef RSTR_MODEL_HPP
#define RSTR_MODEL_HPP

#include "rstr/features.hpp"
#include "rstr/kernels.hpp"
#include "rstr/optimizer.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace rstr {

struct RstrHyperparams {
    double lambda = 1.0;  // region-weight sparsity
    double mu = 0.1;      // coefficient sparsity
    double gamma = 1.0;   // mean-gap penalty
    KernelConfig kernel;
    int outer_max_iters = 50;
    double outer_tol = 1e-5;  // relative objective change
    IalmParams ialm;
    LassoOptions lasso;
    // Rescale (P, w) -> (P / a, a w) with the optimal a after every outer iteration.
    bool rebalance_scale = true;

    void validate() const;
};

/// Trained region selective transfer regressor.
///
/// Holds the coefficient matrix over the joined training basis, so the source
/// and target feature sets it was trained on are kept alongside it for
/// building test-time kernels.
struct RstrModel {
    Matrix P;  // (Ns + Nt) x c
    Vector w;  // K, non-negative
    KernelConfig kernel;
    std::shared_ptr<const BlockedFeatureSet> train_source;
    std::shared_ptr<const BlockedFeatureSet> train_target;
    std::vector<std::string> class_names;
    std::vector<double> objective_trace;
    bool converged = false;

    // Diagnostics. Half-step objectives are recorded as (after P-step, after w-step).
    std::vector<double> p_step_trace;
    int ialm_nonconverged = 0;
    int lasso_nonconverged = 0;
    int rejected_p_steps = 0;
    std::vector<std::string> warnings;

    [[nodiscard]] std::uint64_t training_hash() const;
};

/// Combined hash of a source/target pair; stored with serialized models.
std::uint64_t training_hash(const BlockedFeatureSet& source, const BlockedFeatureSet& target);

/// Full training objective:
///   |L - P' sum w_i K_i^s|_F^2 + lambda |w|_1 + mu |P|_1
///     + gamma |sum w_i P' (K_i^s 1/Ns - K_i^t 1/Nt)|^2
double objective(const Matrix& P, const Vector& w, const KernelSet& kernels, const Matrix& labels,
                 double lambda, double mu, double gamma);
double objective(const Matrix& P, const Vector& w, const KernelSet& kernels, const Matrix& labels,
                 const RstrHyperparams& hp);

/// Squared norm of the projected source/target mean gap (the gamma term without gamma).
double relaxed_mmd(const Matrix& P, const Vector& w, const KernelSet& kernels);

/// Biased empirical MMD between two sample sets (columns) under `cfg`.
double mmd(const Matrix& source_block, const Matrix& target_block, const KernelConfig& cfg);

/// Alternates a P-step (inexact ALM) and a w-step (non-negative lasso) until the
/// relative objective change drops below outer_tol. Target labels are never seen.
RstrModel train(const BlockedFeatureSet& source, const LabelMatrix& labels,
                const BlockedFeatureSet& target, const RstrHyperparams& hp);

/// Scores P' sum w_i k_i projected onto the probability simplex, then argmax.
PredictedLabels predict(const RstrModel& model, const BlockedFeatureSet& test);

/// Raw (unprojected) scores, c x N_test.
Matrix decision_values(const RstrModel& model, const BlockedFeatureSet& test);

/// Projects every column onto the simplex and takes the lowest-index argmax.
PredictedLabels assign_labels(const Matrix& scores);

}  // namespace rstr

#endif  // RSTR_MODEL_HPP
