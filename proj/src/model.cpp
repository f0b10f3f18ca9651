#include "rstr/model.hpp"

#include "rstr/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rstr {

void RstrHyperparams::validate() const {
    auto nonneg = [](double v, const char* name) {
        if (!(std::isfinite(v) && v >= 0.0)) throw ConfigError(std::string(name) + " must be finite and >= 0");
    };
    nonneg(lambda, "lambda");
    nonneg(mu, "mu");
    nonneg(gamma, "gamma");
    kernel.validate();
    ialm.validate();
    if (outer_max_iters < 1) throw ConfigError("outer_max_iters must be positive");
    if (!(outer_tol > 0.0)) throw ConfigError("outer_tol must be positive");
}

std::uint64_t training_hash(const BlockedFeatureSet& source, const BlockedFeatureSet& target) {
    std::uint64_t h = source.content_hash();
    // Order-sensitive mix of the two hashes.
    h ^= target.content_hash() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

std::uint64_t RstrModel::training_hash() const {
    return rstr::training_hash(*train_source, *train_target);
}

namespace {

void check_model_inputs(const Matrix& P, const Vector& w, const KernelSet& kernels,
                        const Matrix* labels) {
    if (static_cast<std::size_t>(w.size()) != kernels.num_blocks()) {
        throw DimensionError("region weight count does not match block count");
    }
    if (static_cast<std::size_t>(P.rows()) != kernels.basis_size()) {
        throw DimensionError("P rows do not match basis size");
    }
    if (labels != nullptr) {
        if (labels->rows() != P.cols()) throw DimensionError("P columns do not match class count");
        if (static_cast<std::size_t>(labels->cols()) != kernels.num_source()) {
            throw DimensionError("label count does not match source count");
        }
    }
}

Vector projected_gap(const Matrix& P, const Vector& w, const KernelSet& kernels) {
    Vector gap = Vector::Zero(P.cols());
    for (std::size_t i = 0; i < kernels.num_blocks(); ++i) {
        const double wi = w(static_cast<Eigen::Index>(i));
        if (wi == 0.0) continue;
        gap.noalias() += wi * (P.transpose() * block_mean_gap(kernels, i));
    }
    return gap;
}

}  // namespace

double objective(const Matrix& P, const Vector& w, const KernelSet& kernels, const Matrix& labels,
                 double lambda, double mu, double gamma) {
    check_model_inputs(P, w, kernels, &labels);
    Matrix fitted = Matrix::Zero(labels.rows(), labels.cols());
    for (std::size_t i = 0; i < kernels.num_blocks(); ++i) {
        const double wi = w(static_cast<Eigen::Index>(i));
        if (wi == 0.0) continue;
        fitted.noalias() += wi * (P.transpose() * kernels.per_block_source[i]);
    }
    const double loss = (labels - fitted).squaredNorm();
    return loss + lambda * w.cwiseAbs().sum() + mu * P.cwiseAbs().sum() +
           gamma * projected_gap(P, w, kernels).squaredNorm();
}

double objective(const Matrix& P, const Vector& w, const KernelSet& kernels, const Matrix& labels,
                 const RstrHyperparams& hp) {
    return objective(P, w, kernels, labels, hp.lambda, hp.mu, hp.gamma);
}

double relaxed_mmd(const Matrix& P, const Vector& w, const KernelSet& kernels) {
    check_model_inputs(P, w, kernels, nullptr);
    return projected_gap(P, w, kernels).squaredNorm();
}

double mmd(const Matrix& source_block, const Matrix& target_block, const KernelConfig& cfg) {
    if (source_block.rows() != target_block.rows()) {
        throw DimensionError("mmd: feature dimensions differ");
    }
    Matrix joined(source_block.rows(), source_block.cols() + target_block.cols());
    joined << source_block, target_block;
    const double bw = resolve_bandwidth(joined, cfg);
    const double ss = gram_with_bandwidth(source_block, source_block, cfg, bw).mean();
    const double st = gram_with_bandwidth(source_block, target_block, cfg, bw).mean();
    const double tt = gram_with_bandwidth(target_block, target_block, cfg, bw).mean();
    return std::sqrt(std::max(0.0, ss - 2.0 * st + tt));
}

RstrModel train(const BlockedFeatureSet& source, const LabelMatrix& labels,
                const BlockedFeatureSet& target, const RstrHyperparams& hp) {
    hp.validate();
    if (labels.size() != source.size()) throw DimensionError("label count does not match source count");
    if (labels.num_classes() < 2) throw ConfigError("at least two classes are required");
    require_same_layout(source, target, "train");

    const auto src = std::make_shared<const BlockedFeatureSet>(source.with_tag(DomainTag::source));
    const auto tgt = std::make_shared<const BlockedFeatureSet>(target.with_tag(DomainTag::target));
    const KernelSet kernels = build_kernel_set(*src, *tgt, hp.kernel);
    const Matrix& L = labels.onehot();

    RstrModel model;
    model.kernel = hp.kernel;
    model.train_source = src;
    model.train_target = tgt;
    model.class_names = labels.class_names();
    model.w = Vector::Ones(static_cast<Eigen::Index>(kernels.num_blocks()));
    model.P = Matrix::Zero(static_cast<Eigen::Index>(kernels.basis_size()), L.rows());

    double current = objective(model.P, model.w, kernels, L, hp);
    for (int outer = 0; outer < hp.outer_max_iters; ++outer) {
        const double previous = current;

        // P-step, warm-started from the current coefficients.
        const PSubproblem sub = make_p_subproblem(kernels, model.w, L, hp.mu, hp.gamma);
        PSolveResult p_res = solve_p_subproblem(sub, hp.ialm, model.P);
        if (!p_res.converged) ++model.ialm_nonconverged;
        const double after_p = objective(p_res.P, model.w, kernels, L, hp);
        if (after_p <= current) {
            model.P = std::move(p_res.P);
            current = after_p;
        } else {
            ++model.rejected_p_steps;
        }
        model.p_step_trace.push_back(current);

        // w-step, warm-started from the current weights.
        const LassoProblem lp = build_w_design(model.P, kernels, L, hp.gamma, hp.lambda);
        LassoResult w_res = solve_nonneg_lasso(lp, model.w, hp.lasso);
        if (!w_res.converged) ++model.lasso_nonconverged;
        const double after_w = objective(model.P, w_res.w, kernels, L, hp);
        if (after_w <= current) {
            model.w = std::move(w_res.w);
            current = after_w;
        }

        // The loss and mean-gap terms depend on P and w only through their
        // product, so (P / a, a w) changes just the two L1 terms. Take the
        // exact minimiser over a; stationary points are fixed by this step.
        const double p_l1 = model.P.cwiseAbs().sum();
        const double w_l1 = model.w.sum();
        if (hp.rebalance_scale && hp.lambda > 0.0 && hp.mu > 0.0 && p_l1 > 0.0 && w_l1 > 0.0) {
            const double a = std::sqrt(hp.mu * p_l1 / (hp.lambda * w_l1));
            Matrix P_scaled = model.P / a;
            Vector w_scaled = model.w * a;
            const double after_scale = objective(P_scaled, w_scaled, kernels, L, hp);
            if (after_scale <= current) {
                model.P = std::move(P_scaled);
                model.w = std::move(w_scaled);
                current = after_scale;
            }
        }
        model.objective_trace.push_back(current);

        const double scale = std::max(std::abs(previous), std::numeric_limits<double>::min());
        if (std::abs(previous - current) / scale < hp.outer_tol) {
            model.converged = true;
            break;
        }
    }
    if (model.ialm_nonconverged > 0) {
        model.warnings.push_back("inner ALM loop hit max_iters in " +
                                 std::to_string(model.ialm_nonconverged) + " P-step(s)");
    }
    if (model.lasso_nonconverged > 0) {
        model.warnings.push_back("lasso solver hit max_sweeps in " +
                                 std::to_string(model.lasso_nonconverged) + " w-step(s)");
    }
    if (!model.converged) model.warnings.push_back("outer loop reached outer_max_iters");
    return model;
}

Matrix decision_values(const RstrModel& model, const BlockedFeatureSet& test) {
    if (!model.train_source || !model.train_target) throw ConfigError("model has no training basis");
    require_same_layout(*model.train_source, test, "predict");
    const std::vector<Matrix> kte =
        build_test_kernels(*model.train_source, *model.train_target, test, model.kernel);
    if (static_cast<std::size_t>(model.w.size()) != kte.size()) {
        throw DimensionError("predict: region weight count does not match block count");
    }
    Matrix combined = Matrix::Zero(kte.front().rows(), kte.front().cols());
    for (std::size_t i = 0; i < kte.size(); ++i) {
        const double wi = model.w(static_cast<Eigen::Index>(i));
        if (wi != 0.0) combined.noalias() += wi * kte[i];
    }
    if (combined.rows() != model.P.rows()) throw DimensionError("predict: basis size mismatch");
    return model.P.transpose() * combined;
}

PredictedLabels assign_labels(const Matrix& scores) {
    PredictedLabels out;
    out.label_vectors.resize(scores.rows(), scores.cols());
    out.hard_labels.reserve(static_cast<std::size_t>(scores.cols()));
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
        out.label_vectors.col(j) = project_simplex(scores.col(j));
        out.hard_labels.push_back(argmax_lowest(out.label_vectors.col(j)));
    }
    return out;
}

PredictedLabels predict(const RstrModel& model, const BlockedFeatureSet& test) {
    return assign_labels(decision_values(model, test));
}

}  // namespace rstr
