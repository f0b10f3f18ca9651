#ifndef RSTR_SYNTHETIC_HPP
#define RSTR_SYNTHETIC_HPP

#include "rstr/features.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace rstr {

/// Reproducible generator: std::mt19937_64 for raw 64-bit words (fully
/// specified by the C++ standard), uniforms from the top 53 bits, and
/// normals from the polar-free Box-Muller transform. Both Box-Muller outputs
/// are used, cosine branch first.
class SynthRng {
public:
    explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in the open interval (0, 1).
    double uniform();
    double normal();
    /// d independent standard normals.
    Vector normal_vector(Eigen::Index d);
    /// Uniformly distributed unit vector.
    Vector unit_vector(Eigen::Index d);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct SyntheticShiftConfig {
    std::uint64_t seed = 1;
    std::size_t classes = 3;
    std::size_t K = 6;
    std::size_t d = 8;
    std::size_t n_source = 90;
    std::size_t n_target = 90;
    double class_separation = 3.0;
    double shift_magnitude = 2.0;
    double noise_std = 1.0;
    std::vector<std::size_t> informative_blocks{0, 1};
    // Translate noise blocks of the target as well as informative ones.
    bool shift_noise_blocks = true;

    [[nodiscard]] std::vector<std::size_t> noise_blocks() const;
    void validate() const;
};

struct LabeledSet {
    BlockedFeatureSet features;
    LabelMatrix labels;
};

struct SyntheticTask {
    LabeledSet source;
    LabeledSet target;  // labels are for scoring only
};

/// Class-conditional clouds in the informative blocks, class-independent noise
/// elsewhere, and a per-block random translation of the target domain.
///
/// Draw order: class means (informative blocks ascending, classes ascending,
/// Gram-Schmidt orthonormalised so that class means are exactly
/// class_separation apart when classes <= d), then one shift direction per
/// block, then source samples, then target samples (sample-major, block-major,
/// coordinate-major). Sample j has class j mod classes.
SyntheticTask generate_synthetic(const SyntheticShiftConfig& cfg);

/// Stand-in datasets for the four protocol databases (ids H, V, N, C) with the
/// builtin class constitutions. All share one set of class means; each
/// dataset gets its own translation of magnitude `shift_magnitude`.
std::map<std::string, LabeledSet> generate_standins(const SyntheticShiftConfig& cfg);

}  // namespace rstr

#endif  // RSTR_SYNTHETIC_HPP
