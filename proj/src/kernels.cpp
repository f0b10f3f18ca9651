#include "rstr/kernels.hpp"

#include "rstr/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rstr {

std::string to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::linear: return "linear";
        case KernelKind::polynomial: return "polynomial";
        case KernelKind::gaussian: return "gaussian";
    }
    return "unknown";
}

KernelKind kernel_kind_from_string(const std::string& name) {
    if (name == "linear") return KernelKind::linear;
    if (name == "polynomial" || name == "poly") return KernelKind::polynomial;
    if (name == "gaussian" || name == "rbf") return KernelKind::gaussian;
    throw ConfigError("unknown kernel kind '" + name + "'");
}

void KernelConfig::validate() const {
    if (kind == KernelKind::polynomial && degree < 1) {
        throw ConfigError("polynomial degree must be >= 1");
    }
    if (kind == KernelKind::polynomial && !std::isfinite(offset)) {
        throw ConfigError("polynomial offset must be finite");
    }
    if (kind == KernelKind::gaussian && bandwidth &&
        !(std::isfinite(*bandwidth) && *bandwidth > 0.0)) {
        throw ConfigError("gaussian bandwidth must be positive");
    }
}

std::string describe(const KernelConfig& cfg) {
    std::ostringstream os;
    os << to_string(cfg.kind);
    if (cfg.kind == KernelKind::polynomial) os << "(degree=" << cfg.degree << ",offset=" << cfg.offset << ")";
    if (cfg.kind == KernelKind::gaussian) {
        if (cfg.bandwidth) os << "(bandwidth=" << *cfg.bandwidth << ")";
        else os << "(bandwidth=median)";
    }
    return os.str();
}

double median_pairwise_distance(const Matrix& points) {
    const Eigen::Index n = points.cols();
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index p = 0; p < n; ++p) {
        for (Eigen::Index q = p + 1; q < n; ++q) {
            dist.push_back((points.col(p) - points.col(q)).norm());
        }
    }
    if (dist.empty()) return 1.0;
    std::sort(dist.begin(), dist.end());
    const std::size_t m = dist.size();
    const double med = (m % 2 == 1) ? dist[m / 2] : 0.5 * (dist[m / 2 - 1] + dist[m / 2]);
    return med > 0.0 ? med : 1.0;
}

double resolve_bandwidth(const Matrix& basis, const KernelConfig& cfg) {
    if (cfg.kind != KernelKind::gaussian) return 0.0;
    return cfg.bandwidth ? *cfg.bandwidth : median_pairwise_distance(basis);
}

Matrix gram_with_bandwidth(const Matrix& A, const Matrix& B, const KernelConfig& cfg,
                           double bandwidth) {
    cfg.validate();
    if (A.rows() != B.rows()) {
        throw DimensionError("gram: operand dimensions " + std::to_string(A.rows()) + " and " +
                             std::to_string(B.rows()) + " differ");
    }
    if (!A.allFinite() || !B.allFinite()) throw DataError("gram: non-finite input values");

    switch (cfg.kind) {
        case KernelKind::linear:
            return A.transpose() * B;
        case KernelKind::polynomial: {
            Matrix G = A.transpose() * B;
            G.array() += cfg.offset;
            return G.array().pow(static_cast<double>(cfg.degree)).matrix();
        }
        case KernelKind::gaussian: {
            if (!(bandwidth > 0.0)) throw ConfigError("gaussian bandwidth must be positive");
            const double scale = -1.0 / (2.0 * bandwidth * bandwidth);
            Matrix G(A.cols(), B.cols());
            for (Eigen::Index q = 0; q < B.cols(); ++q) {
                for (Eigen::Index p = 0; p < A.cols(); ++p) {
                    G(p, q) = std::exp(scale * (A.col(p) - B.col(q)).squaredNorm());
                }
            }
            return G;
        }
    }
    throw ConfigError("unknown kernel kind");
}

Matrix gram(const Matrix& A, const Matrix& B, const KernelConfig& cfg) {
    return gram_with_bandwidth(A, B, cfg, resolve_bandwidth(A, cfg));
}

KernelSet build_kernel_set(const BlockedFeatureSet& source, const BlockedFeatureSet& target,
                           const KernelConfig& cfg) {
    cfg.validate();
    require_same_layout(source, target, "build_kernel_set");
    if (source.tag() != DomainTag::source) throw ConfigError("build_kernel_set: first set must be tagged source");
    if (target.tag() != DomainTag::target) throw ConfigError("build_kernel_set: second set must be tagged target");

    const auto ns = static_cast<Eigen::Index>(source.size());
    const auto nt = static_cast<Eigen::Index>(target.size());
    KernelSet ks;
    ks.config = cfg;
    for (std::size_t i = 0; i < source.num_blocks(); ++i) {
        Matrix joined(static_cast<Eigen::Index>(source.block_dim()), ns + nt);
        joined << source.block(i), target.block(i);
        const double bw = resolve_bandwidth(joined, cfg);
        ks.per_block_source.push_back(gram_with_bandwidth(joined, source.block(i), cfg, bw));
        ks.per_block_target.push_back(gram_with_bandwidth(joined, target.block(i), cfg, bw));
        ks.bandwidths.push_back(bw);
        ks.basis.push_back(std::move(joined));
    }
    return ks;
}

std::vector<Matrix> build_test_kernels(const BlockedFeatureSet& source,
                                       const BlockedFeatureSet& target,
                                       const BlockedFeatureSet& test, const KernelConfig& cfg) {
    cfg.validate();
    require_same_layout(source, target, "build_test_kernels");
    require_same_layout(source, test, "build_test_kernels");
    const auto ns = static_cast<Eigen::Index>(source.size());
    const auto nt = static_cast<Eigen::Index>(target.size());
    std::vector<Matrix> out;
    out.reserve(source.num_blocks());
    for (std::size_t i = 0; i < source.num_blocks(); ++i) {
        Matrix joined(static_cast<Eigen::Index>(source.block_dim()), ns + nt);
        joined << source.block(i), target.block(i);
        out.push_back(gram(joined, test.block(i), cfg));
    }
    return out;
}

std::vector<Matrix> build_test_kernels(const KernelSet& training, const BlockedFeatureSet& test,
                                       const KernelConfig& cfg) {
    if (!(cfg == training.config)) {
        throw ConfigError("test kernel configuration " + describe(cfg) +
                          " differs from training configuration " + describe(training.config));
    }
    if (test.num_blocks() != training.num_blocks() ||
        static_cast<Eigen::Index>(test.block_dim()) != training.basis.front().rows()) {
        throw DimensionError("build_test_kernels: test layout does not match training basis");
    }
    std::vector<Matrix> out;
    out.reserve(training.num_blocks());
    for (std::size_t i = 0; i < training.num_blocks(); ++i) {
        out.push_back(gram_with_bandwidth(training.basis[i], test.block(i), cfg, training.bandwidths[i]));
    }
    return out;
}

}  // namespace rstr
