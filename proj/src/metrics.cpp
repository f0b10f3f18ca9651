#include "rstr/metrics.hpp"

#include "rstr/error.hpp"

#include <string>

namespace rstr {

long ConfusionMatrix::total() const {
    long sum = 0;
    for (const auto& row : counts) {
        for (long v : row) sum += v;
    }
    return sum;
}

long ConfusionMatrix::trace() const {
    long sum = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) sum += counts[i][i];
    return sum;
}

ConfusionMatrix confusion(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& truths,
                          std::size_t c) {
    if (preds.size() != truths.size()) {
        throw DimensionError("confusion: " + std::to_string(preds.size()) + " predictions vs " +
                             std::to_string(truths.size()) + " truths");
    }
    ConfusionMatrix cm{std::vector<std::vector<long>>(c, std::vector<long>(c, 0))};
    for (std::size_t j = 0; j < preds.size(); ++j) {
        if (preds[j] >= c || truths[j] >= c) {
            throw DataError("confusion: label out of range at sample " + std::to_string(j));
        }
        ++cm.counts[truths[j]][preds[j]];
    }
    return cm;
}

double mean_f1(const ConfusionMatrix& cm) {
    const std::size_t c = cm.num_classes();
    if (c < 2) throw ConfigError("mean_f1 needs at least two classes");
    double sum = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        long tp = cm.counts[i][i];
        long predicted = 0;
        long actual = 0;
        for (std::size_t k = 0; k < c; ++k) {
            predicted += cm.counts[k][i];
            actual += cm.counts[i][k];
        }
        const double p = predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
        const double r = actual > 0 ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
        if (p + r > 0.0) sum += 2.0 * p * r / (p + r);
    }
    return sum / static_cast<double>(c);
}

double accuracy(const ConfusionMatrix& cm) {
    const long n = cm.total();
    if (n < 1) throw DataError("accuracy: empty confusion matrix");
    return 100.0 * static_cast<double>(cm.trace()) / static_cast<double>(n);
}

}  // namespace rstr
