#include "rstr/synthetic.hpp"

#include "rstr/data_io.hpp"
#include "rstr/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rstr {

double SynthRng::uniform() {
    // 53 random bits, shifted off zero so log() below stays finite.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double SynthRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
}

Vector SynthRng::normal_vector(Eigen::Index d) {
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = normal();
    return v;
}

Vector SynthRng::unit_vector(Eigen::Index d) {
    Vector v = normal_vector(d);
    double n = v.norm();
    while (n == 0.0) {
        v = normal_vector(d);
        n = v.norm();
    }
    return v / n;
}

std::vector<std::size_t> SyntheticShiftConfig::noise_blocks() const {
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < K; ++b) {
        if (std::find(informative_blocks.begin(), informative_blocks.end(), b) == informative_blocks.end()) {
            out.push_back(b);
        }
    }
    return out;
}

void SyntheticShiftConfig::validate() const {
    if (classes < 2) throw ConfigError("synthetic: at least two classes");
    if (K < 1 || d < 1 || n_source < 1 || n_target < 1) throw ConfigError("synthetic: sizes must be >= 1");
    if (informative_blocks.empty()) throw ConfigError("synthetic: informative_blocks must be non-empty");
    for (auto b : informative_blocks) {
        if (b >= K) throw ConfigError("synthetic: informative block index out of range");
    }
    if (!(class_separation >= 0.0) || !(shift_magnitude >= 0.0) || !(noise_std >= 0.0)) {
        throw ConfigError("synthetic: separation, shift and noise must be >= 0");
    }
}

namespace {

struct DomainModel {
    // means[b][k] is the class-k mean of block b; empty for noise blocks.
    std::vector<std::vector<Vector>> means;
};

DomainModel draw_class_means(const SyntheticShiftConfig& cfg, SynthRng& rng) {
    const auto d = static_cast<Eigen::Index>(cfg.d);
    DomainModel model;
    model.means.resize(cfg.K);
    std::vector<std::size_t> informative = cfg.informative_blocks;
    std::sort(informative.begin(), informative.end());
    informative.erase(std::unique(informative.begin(), informative.end()), informative.end());
    const double radius = cfg.class_separation / std::numbers::sqrt2;
    for (auto b : informative) {
        std::vector<Vector> basis;
        for (std::size_t k = 0; k < cfg.classes; ++k) {
            Vector v = rng.normal_vector(d);
            if (cfg.classes <= cfg.d) {
                for (const auto& u : basis) v -= u.dot(v) * u;
            }
            const double n = v.norm();
            basis.push_back(n > 0.0 ? Vector(v / n) : Vector(Vector::Zero(d)));
        }
        for (auto& u : basis) u *= radius;
        model.means[b] = std::move(basis);
    }
    return model;
}

std::vector<Vector> draw_shift(const SyntheticShiftConfig& cfg, SynthRng& rng) {
    std::vector<Vector> shift;
    shift.reserve(cfg.K);
    for (std::size_t b = 0; b < cfg.K; ++b) {
        shift.push_back(cfg.shift_magnitude * rng.unit_vector(static_cast<Eigen::Index>(cfg.d)));
    }
    return shift;
}

LabeledSet draw_samples(const SyntheticShiftConfig& cfg, const DomainModel& model,
                        const std::vector<Vector>* shift, const std::vector<std::size_t>& classes,
                        const std::vector<std::string>& names, DomainTag tag, SynthRng& rng) {
    const auto d = static_cast<Eigen::Index>(cfg.d);
    const auto n = static_cast<Eigen::Index>(classes.size());
    std::vector<Matrix> blocks(cfg.K, Matrix(d, n));
    for (Eigen::Index j = 0; j < n; ++j) {
        const std::size_t k = classes[static_cast<std::size_t>(j)];
        for (std::size_t b = 0; b < cfg.K; ++b) {
            Vector x = cfg.noise_std * rng.normal_vector(d);
            const bool informative = !model.means[b].empty();
            if (informative) x += model.means[b][k];
            if (shift && (informative || cfg.shift_noise_blocks)) x += (*shift)[b];
            blocks[b].col(j) = x;
        }
    }
    return {BlockedFeatureSet(std::move(blocks), tag), LabelMatrix(classes, names)};
}

std::vector<std::string> default_class_names(std::size_t c) {
    std::vector<std::string> names;
    for (std::size_t k = 0; k < c; ++k) names.push_back("class" + std::to_string(k));
    return names;
}

std::vector<std::size_t> round_robin(std::size_t n, std::size_t c) {
    std::vector<std::size_t> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = j % c;
    return out;
}

}  // namespace

SyntheticTask generate_synthetic(const SyntheticShiftConfig& cfg) {
    cfg.validate();
    SynthRng rng(cfg.seed);
    const DomainModel model = draw_class_means(cfg, rng);
    const std::vector<Vector> shift = draw_shift(cfg, rng);
    const auto names = default_class_names(cfg.classes);
    LabeledSet source = draw_samples(cfg, model, nullptr, round_robin(cfg.n_source, cfg.classes), names,
                                     DomainTag::source, rng);
    LabeledSet target = draw_samples(cfg, model, &shift, round_robin(cfg.n_target, cfg.classes), names,
                                     DomainTag::target, rng);
    return {std::move(source), std::move(target)};
}

std::map<std::string, LabeledSet> generate_standins(const SyntheticShiftConfig& cfg) {
    SyntheticShiftConfig base = cfg;
    base.classes = 3;
    base.validate();
    SynthRng rng(cfg.seed);
    const DomainModel model = draw_class_means(base, rng);
    std::map<std::string, LabeledSet> out;
    for (const auto& manifest : builtin_manifests()) {
        std::vector<std::string> names;
        std::vector<std::size_t> classes;
        for (std::size_t k = 0; k < manifest.class_counts.size(); ++k) {
            names.push_back(manifest.class_counts[k].first);
            classes.insert(classes.end(), manifest.class_counts[k].second, k);
        }
        const std::vector<Vector> shift = draw_shift(base, rng);
        out.emplace(manifest.dataset_id,
                    draw_samples(base, model, &shift, classes, names, DomainTag::source, rng));
    }
    return out;
}

}  // namespace rstr
