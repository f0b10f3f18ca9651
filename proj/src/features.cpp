#include "rstr/features.hpp"

#include "rstr/error.hpp"

#include <cmath>
#include <cstring>

namespace rstr {

std::string_view to_string(DomainTag tag) {
    switch (tag) {
        case DomainTag::source: return "source";
        case DomainTag::target: return "target";
        case DomainTag::test: return "test";
    }
    return "unknown";
}

BlockedFeatureSet::BlockedFeatureSet(std::vector<Matrix> blocks, DomainTag tag,
                                     std::vector<std::string> sample_ids)
    : blocks_(std::move(blocks)), tag_(tag), ids_(std::move(sample_ids)) {
    if (blocks_.empty()) throw DimensionError("feature set needs at least one block");
    const auto d = blocks_.front().rows();
    const auto n = blocks_.front().cols();
    if (d < 1) throw DimensionError("block dimension must be at least 1");
    if (n < 1) throw DataError("empty dataset");
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        if (blocks_[i].rows() != d || blocks_[i].cols() != n) {
            throw DimensionError("block " + std::to_string(i) + " is " +
                                 std::to_string(blocks_[i].rows()) + "x" +
                                 std::to_string(blocks_[i].cols()) + ", expected " +
                                 std::to_string(d) + "x" + std::to_string(n));
        }
        if (!blocks_[i].allFinite()) {
            throw DataError("block " + std::to_string(i) + " contains non-finite values");
        }
    }
    if (ids_.empty()) {
        ids_.reserve(static_cast<std::size_t>(n));
        for (Eigen::Index j = 0; j < n; ++j) ids_.push_back(std::to_string(j));
    } else if (ids_.size() != static_cast<std::size_t>(n)) {
        throw DimensionError("sample id count does not match sample count");
    }
}

BlockedFeatureSet BlockedFeatureSet::from_stacked(const Matrix& stacked, std::size_t num_blocks,
                                                  DomainTag tag,
                                                  std::vector<std::string> sample_ids) {
    if (num_blocks == 0 || stacked.rows() % static_cast<Eigen::Index>(num_blocks) != 0) {
        throw DimensionError("stacked rows are not divisible by the block count");
    }
    const Eigen::Index d = stacked.rows() / static_cast<Eigen::Index>(num_blocks);
    std::vector<Matrix> blocks;
    blocks.reserve(num_blocks);
    for (std::size_t i = 0; i < num_blocks; ++i) {
        blocks.emplace_back(stacked.middleRows(static_cast<Eigen::Index>(i) * d, d));
    }
    return {std::move(blocks), tag, std::move(sample_ids)};
}

Matrix BlockedFeatureSet::stacked() const {
    const auto d = static_cast<Eigen::Index>(block_dim());
    Matrix out(static_cast<Eigen::Index>(feature_dim()), static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        out.middleRows(static_cast<Eigen::Index>(i) * d, d) = blocks_[i];
    }
    return out;
}

BlockedFeatureSet BlockedFeatureSet::with_tag(DomainTag tag) const {
    BlockedFeatureSet copy = *this;
    copy.tag_ = tag;
    return copy;
}

BlockedFeatureSet BlockedFeatureSet::select(const std::vector<std::size_t>& indices) const {
    std::vector<Matrix> blocks;
    blocks.reserve(blocks_.size());
    for (const auto& b : blocks_) {
        Matrix sub(b.rows(), static_cast<Eigen::Index>(indices.size()));
        for (std::size_t j = 0; j < indices.size(); ++j) {
            if (indices[j] >= size()) throw DimensionError("sample index out of range");
            sub.col(static_cast<Eigen::Index>(j)) = b.col(static_cast<Eigen::Index>(indices[j]));
        }
        blocks.push_back(std::move(sub));
    }
    std::vector<std::string> ids;
    ids.reserve(indices.size());
    for (auto j : indices) ids.push_back(ids_[j]);
    return {std::move(blocks), tag_, std::move(ids)};
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& h, const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= bytes[i];
        h *= kFnvPrime;
    }
}

}  // namespace

std::uint64_t BlockedFeatureSet::content_hash() const {
    std::uint64_t h = kFnvOffset;
    const std::uint64_t shape[3] = {num_blocks(), block_dim(), size()};
    fnv_mix(h, shape, sizeof(shape));
    for (const auto& b : blocks_) {
        // Column-major storage, so this walks samples block by block.
        fnv_mix(h, b.data(), static_cast<std::size_t>(b.size()) * sizeof(double));
    }
    return h;
}

bool operator==(const BlockedFeatureSet& a, const BlockedFeatureSet& b) {
    if (a.tag_ != b.tag_ || a.ids_ != b.ids_ || a.blocks_.size() != b.blocks_.size()) return false;
    for (std::size_t i = 0; i < a.blocks_.size(); ++i) {
        const auto& x = a.blocks_[i];
        const auto& y = b.blocks_[i];
        if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
        if (std::memcmp(x.data(), y.data(), static_cast<std::size_t>(x.size()) * sizeof(double)) != 0) {
            return false;
        }
    }
    return true;
}

void require_same_layout(const BlockedFeatureSet& a, const BlockedFeatureSet& b,
                         std::string_view what) {
    if (a.num_blocks() != b.num_blocks()) {
        throw DimensionError(std::string(what) + ": block count " + std::to_string(a.num_blocks()) +
                             " vs " + std::to_string(b.num_blocks()));
    }
    if (a.block_dim() != b.block_dim()) {
        throw DimensionError(std::string(what) + ": block dimension " +
                             std::to_string(a.block_dim()) + " vs " + std::to_string(b.block_dim()));
    }
}

LabelMatrix::LabelMatrix(const std::vector<std::size_t>& classes,
                         std::vector<std::string> class_names)
    : indices_(classes), names_(std::move(class_names)) {
    if (names_.size() < 2) throw ConfigError("at least two classes are required");
    onehot_ = Matrix::Zero(static_cast<Eigen::Index>(names_.size()),
                           static_cast<Eigen::Index>(indices_.size()));
    for (std::size_t j = 0; j < indices_.size(); ++j) {
        if (indices_[j] >= names_.size()) {
            throw DataError("class index " + std::to_string(indices_[j]) + " out of range at sample " +
                            std::to_string(j));
        }
        onehot_(static_cast<Eigen::Index>(indices_[j]), static_cast<Eigen::Index>(j)) = 1.0;
    }
}

LabelMatrix LabelMatrix::select(const std::vector<std::size_t>& positions) const {
    std::vector<std::size_t> picked;
    picked.reserve(positions.size());
    for (auto p : positions) picked.push_back(indices_.at(p));
    return {picked, names_};
}

std::size_t argmax_lowest(const Eigen::Ref<const Vector>& v) {
    std::size_t best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (v(i) > v(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(i);
    }
    return best;
}

}  // namespace rstr
