#include "rstr/baseline.hpp"

#include "rstr/error.hpp"
#include "rstr/optimizer.hpp"

#include <cmath>

namespace rstr {

BaselineModel train_baseline(const BlockedFeatureSet& source, const LabelMatrix& labels,
                             double ridge) {
    if (!(std::isfinite(ridge) && ridge > 0.0)) throw ConfigError("baseline ridge must be positive");
    if (labels.size() != source.size()) throw DimensionError("label count does not match source count");

    const Matrix X = source.stacked();
    Matrix gram = X * X.transpose();
    gram.diagonal().array() += ridge;
    const Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) throw Error("baseline: ridge system is not positive definite");

    BaselineModel model;
    model.C = llt.solve(X * labels.onehot().transpose());
    model.ridge = ridge;
    model.class_names = labels.class_names();
    model.num_blocks = source.num_blocks();
    return model;
}

PredictedLabels predict_baseline(const BaselineModel& model, const BlockedFeatureSet& test) {
    if (static_cast<Eigen::Index>(test.feature_dim()) != model.C.rows() ||
        (model.num_blocks != 0 && test.num_blocks() != model.num_blocks)) {
        throw DimensionError("baseline: test feature dimension " + std::to_string(test.feature_dim()) +
                             " does not match model dimension " + std::to_string(model.C.rows()));
    }
    const Matrix scores = model.C.transpose() * test.stacked();
    PredictedLabels out;
    out.label_vectors.resize(scores.rows(), scores.cols());
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
        out.label_vectors.col(j) = project_simplex(scores.col(j));
        out.hard_labels.push_back(argmax_lowest(scores.col(j)));
    }
    return out;
}

}  // namespace rstr
