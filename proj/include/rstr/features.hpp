#ifndef RSTR_FEATURES_HPP
#define RSTR_FEATURES_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rstr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class DomainTag { source, target, test };

std::string_view to_string(DomainTag tag);

/// N samples described by K region blocks of equal dimension d.
///
/// Block i is a d x N matrix whose column j is the descriptor of region i for
/// sample j. Stacking the blocks vertically gives the full (K*d) x N feature
/// matrix, block-major.
class BlockedFeatureSet {
public:
    BlockedFeatureSet(std::vector<Matrix> blocks, DomainTag tag,
                      std::vector<std::string> sample_ids = {});

    /// Splits a stacked (K*d) x N matrix into K blocks of d rows each.
    static BlockedFeatureSet from_stacked(const Matrix& stacked, std::size_t num_blocks,
                                          DomainTag tag,
                                          std::vector<std::string> sample_ids = {});

    [[nodiscard]] std::size_t num_blocks() const { return blocks_.size(); }
    [[nodiscard]] std::size_t block_dim() const { return static_cast<std::size_t>(blocks_.front().rows()); }
    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(blocks_.front().cols()); }
    [[nodiscard]] std::size_t feature_dim() const { return num_blocks() * block_dim(); }

    [[nodiscard]] const Matrix& block(std::size_t i) const { return blocks_.at(i); }
    [[nodiscard]] const std::vector<Matrix>& blocks() const { return blocks_; }
    [[nodiscard]] DomainTag tag() const { return tag_; }
    [[nodiscard]] const std::vector<std::string>& sample_ids() const { return ids_; }

    [[nodiscard]] Matrix stacked() const;
    [[nodiscard]] BlockedFeatureSet with_tag(DomainTag tag) const;
    /// Columns `indices` of every block, in the given order.
    [[nodiscard]] BlockedFeatureSet select(const std::vector<std::size_t>& indices) const;

    /// 64-bit FNV-1a over the shape and the raw bytes of every entry.
    [[nodiscard]] std::uint64_t content_hash() const;

    friend bool operator==(const BlockedFeatureSet& a, const BlockedFeatureSet& b);

private:
    std::vector<Matrix> blocks_;
    DomainTag tag_;
    std::vector<std::string> ids_;
};

/// Throws DimensionError unless both sets have the same K and d.
void require_same_layout(const BlockedFeatureSet& a, const BlockedFeatureSet& b,
                         std::string_view what);

/// c x N one-hot class indicators. Column j has a single 1 in the row of its class.
class LabelMatrix {
public:
    LabelMatrix(const std::vector<std::size_t>& classes, std::vector<std::string> class_names);

    [[nodiscard]] std::size_t num_classes() const { return names_.size(); }
    [[nodiscard]] std::size_t size() const { return indices_.size(); }
    [[nodiscard]] const Matrix& onehot() const { return onehot_; }
    [[nodiscard]] const std::vector<std::size_t>& indices() const { return indices_; }
    [[nodiscard]] const std::vector<std::string>& class_names() const { return names_; }
    [[nodiscard]] LabelMatrix select(const std::vector<std::size_t>& positions) const;

    friend bool operator==(const LabelMatrix& a, const LabelMatrix& b) {
        return a.indices_ == b.indices_ && a.names_ == b.names_;
    }

private:
    std::vector<std::size_t> indices_;
    std::vector<std::string> names_;
    Matrix onehot_;
};

/// Simplex label vectors (c x N_test) and the argmax class of each column.
struct PredictedLabels {
    Matrix label_vectors;
    std::vector<std::size_t> hard_labels;
};

/// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax_lowest(const Eigen::Ref<const Vector>& v);

}  // namespace rstr

#endif  // RSTR_FEATURES_HPP
