#ifndef RSTR_BASELINE_HPP
#define RSTR_BASELINE_HPP

#include "rstr/features.hpp"

#include <string>
#include <vector>

namespace rstr {

/// Source-only ridge regression onto one-hot labels; no adaptation.
struct BaselineModel {
    Matrix C;  // (K*d) x c over the stacked feature space
    double ridge = 1e-6;
    std::vector<std::string> class_names;
    std::size_t num_blocks = 0;
};

/// C = (X X' + ridge I)^-1 X L'
BaselineModel train_baseline(const BlockedFeatureSet& source, const LabelMatrix& labels,
                             double ridge = 1e-6);

/// Hard label = argmax of C'x (lowest index on ties); label vectors are the
/// simplex projections of C'x.
PredictedLabels predict_baseline(const BaselineModel& model, const BlockedFeatureSet& test);

}  // namespace rstr

#endif  // RSTR_BASELINE_HPP
