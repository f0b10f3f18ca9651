#ifndef RSTR_KERNELS_HPP
#define RSTR_KERNELS_HPP

#include "rstr/features.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rstr {

enum class KernelKind { linear, polynomial, gaussian };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

/// Kernel function selection.
///
/// linear:     k(a, b) = a'b
/// polynomial: k(a, b) = (a'b + offset)^degree
/// gaussian:   k(a, b) = exp(-|a - b|^2 / (2 bandwidth^2))
///
/// A gaussian kernel without a bandwidth uses the median heuristic, resolved
/// per block over the columns of the basis (left) operand.
struct KernelConfig {
    KernelKind kind = KernelKind::linear;
    int degree = 2;
    double offset = 1.0;
    std::optional<double> bandwidth;

    static KernelConfig linear() { return {}; }
    static KernelConfig polynomial(int degree, double offset) {
        return {KernelKind::polynomial, degree, offset, std::nullopt};
    }
    static KernelConfig gaussian(std::optional<double> bandwidth = std::nullopt) {
        return {KernelKind::gaussian, 2, 1.0, bandwidth};
    }

    /// Throws ConfigError on degree < 1 or a non-positive bandwidth.
    void validate() const;

    friend bool operator==(const KernelConfig&, const KernelConfig&) = default;
};

std::string describe(const KernelConfig& cfg);

/// Median of the pairwise Euclidean distances between the columns of `points`.
/// Falls back to 1 when all columns coincide (or there is only one).
double median_pairwise_distance(const Matrix& points);

/// Bandwidth actually used for `basis` under `cfg` (0 for non-gaussian kernels).
double resolve_bandwidth(const Matrix& basis, const KernelConfig& cfg);

/// m x n matrix of k(a_p, b_q) for the columns of A (d x m) and B (d x n).
Matrix gram(const Matrix& A, const Matrix& B, const KernelConfig& cfg);

/// Same as gram() with an already-resolved gaussian bandwidth.
Matrix gram_with_bandwidth(const Matrix& A, const Matrix& B, const KernelConfig& cfg,
                           double bandwidth);

/// Per-block kernels of source and target samples against the joined basis
/// [source samples, target samples].
struct KernelSet {
    std::vector<Matrix> per_block_source;  // K matrices, (Ns + Nt) x Ns
    std::vector<Matrix> per_block_target;  // K matrices, (Ns + Nt) x Nt
    KernelConfig config;
    std::vector<Matrix> basis;             // K matrices, d x (Ns + Nt)
    std::vector<double> bandwidths;        // resolved per block, gaussian only

    [[nodiscard]] std::size_t num_blocks() const { return basis.size(); }
    [[nodiscard]] std::size_t basis_size() const { return static_cast<std::size_t>(basis.front().cols()); }
    [[nodiscard]] std::size_t num_source() const { return static_cast<std::size_t>(per_block_source.front().cols()); }
    [[nodiscard]] std::size_t num_target() const { return static_cast<std::size_t>(per_block_target.front().cols()); }
};

KernelSet build_kernel_set(const BlockedFeatureSet& source, const BlockedFeatureSet& target,
                           const KernelConfig& cfg);

/// Per-block (Ns + Nt) x N_test kernels for new samples against the training basis.
std::vector<Matrix> build_test_kernels(const BlockedFeatureSet& source,
                                       const BlockedFeatureSet& target,
                                       const BlockedFeatureSet& test, const KernelConfig& cfg);

/// Variant reusing a training KernelSet; throws ConfigError if `cfg` is not the
/// configuration the set was built with.
std::vector<Matrix> build_test_kernels(const KernelSet& training, const BlockedFeatureSet& test,
                                       const KernelConfig& cfg);

}  // namespace rstr

#endif  // RSTR_KERNELS_HPP
