#ifndef RSTR_METRICS_HPP
#define RSTR_METRICS_HPP

#include <cstddef>
#include <vector>

namespace rstr {

/// counts[t][p]: samples of true class t predicted as p.
struct ConfusionMatrix {
    std::vector<std::vector<long>> counts;

    [[nodiscard]] std::size_t num_classes() const { return counts.size(); }
    [[nodiscard]] long total() const;
    [[nodiscard]] long trace() const;
};

ConfusionMatrix confusion(const std::vector<std::size_t>& preds,
                          const std::vector<std::size_t>& truths, std::size_t c);

/// Mean over classes of 2 p r / (p + r); a class with p + r = 0 scores 0, and
/// precision is 0 for a class that is never predicted.
double mean_f1(const ConfusionMatrix& cm);

/// 100 * correct / total.
double accuracy(const ConfusionMatrix& cm);

}  // namespace rstr

#endif  // RSTR_METRICS_HPP
