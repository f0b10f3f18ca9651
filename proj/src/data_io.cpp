#include "rstr/data_io.hpp"

#include "rstr/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

namespace rstr {

namespace {

constexpr std::string_view kMagic = "#cdmer-features";
constexpr std::string_view kVersion = "v1";

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

std::size_t parse_count(std::string_view token, std::string_view key, const std::string& origin) {
    const std::string prefix = std::string(key) + "=";
    if (token.substr(0, prefix.size()) != prefix) {
        throw DataError(origin + ": malformed header, expected '" + prefix + "<n>' but found '" +
                        std::string(token) + "'");
    }
    const std::string_view digits = token.substr(prefix.size());
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty()) {
        throw DataError(origin + ": malformed header value for " + std::string(key));
    }
    return value;
}

std::vector<std::string> split_classes(std::string_view list) {
    std::vector<std::string> out;
    if (list.empty()) return out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = list.find(',', start);
        out.emplace_back(list.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                            : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

LoadedFeatures read_features(std::istream& in, DomainTag tag, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line)) throw DataError(origin + ": missing header");
    const auto head = split_ws(line);
    if (head.size() != 6 || head[0] != kMagic || head[1] != kVersion) {
        throw DataError(origin + ": malformed header, expected '#cdmer-features v1 K=<k> d=<d> N=<n> classes=<...>'");
    }
    const std::size_t K = parse_count(head[2], "K", origin);
    const std::size_t d = parse_count(head[3], "d", origin);
    const std::size_t N = parse_count(head[4], "N", origin);
    if (head[5].substr(0, 8) != "classes=") {
        throw DataError(origin + ": malformed header, expected 'classes=' field");
    }
    std::vector<std::string> class_names = split_classes(head[5].substr(8));
    {
        std::set<std::string> seen;
        for (const auto& name : class_names) {
            if (name.empty()) throw DataError(origin + ": empty class name in header");
            if (!seen.insert(name).second) throw DataError(origin + ": duplicate class name '" + name + "'");
        }
    }
    if (K == 0 || d == 0) throw DataError(origin + ": K and d must be at least 1");
    if (N == 0) throw DataError(origin + ": empty dataset");

    const std::size_t width = K * d;
    Matrix stacked(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(N));
    std::vector<std::size_t> label_idx;
    std::optional<bool> labeled;

    std::size_t row = 0;
    while (std::getline(in, line)) {
        const auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        if (row >= N) throw DataError(origin + ": more than N=" + std::to_string(N) + " sample rows");
        const std::string where = origin + ": row " + std::to_string(row + 1);

        bool has_label = false;
        if (tokens.size() == width + 1 && !class_names.empty()) has_label = true;
        else if (tokens.size() != width) {
            throw DataError(where + " has " + std::to_string(tokens.size()) + " fields, expected " +
                            std::to_string(width) + (class_names.empty() ? "" : " (plus optional label)"));
        }
        if (labeled && *labeled != has_label) {
            const std::size_t want = *labeled ? width + 1 : width;
            throw DataError(where + " has " + std::to_string(tokens.size()) + " fields, expected " +
                            std::to_string(want) + " (rows must either all carry a label or none)");
        }
        labeled = has_label;

        std::size_t first = 0;
        if (has_label) {
            const std::string name(tokens[0]);
            std::size_t k = 0;
            while (k < class_names.size() && class_names[k] != name) ++k;
            if (k == class_names.size()) throw DataError(where + ": unknown class name '" + name + "'");
            label_idx.push_back(k);
            first = 1;
        }
        for (std::size_t f = 0; f < width; ++f) {
            const std::string_view tok = tokens[first + f];
            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
            if (ec != std::errc() || ptr != tok.data() + tok.size()) {
                throw DataError(where + ": cannot parse value '" + std::string(tok) + "'");
            }
            if (!std::isfinite(value)) throw DataError(where + ": non-finite value");
            stacked(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(row)) = value;
        }
        ++row;
    }
    if (row != N) {
        throw DataError(origin + ": header declares N=" + std::to_string(N) + " but found " +
                        std::to_string(row) + " sample rows");
    }

    LoadedFeatures out{BlockedFeatureSet::from_stacked(stacked, K, tag), std::nullopt, class_names};
    if (labeled.value_or(false)) {
        if (class_names.size() < 2) throw DataError(origin + ": labeled data needs at least two classes");
        out.labels.emplace(label_idx, class_names);
    }
    return out;
}

void write_features(std::ostream& out, const BlockedFeatureSet& features, const LabelMatrix* labels,
                    const std::vector<std::string>& class_names) {
    const std::vector<std::string>& names = labels ? labels->class_names() : class_names;
    if (labels && labels->size() != features.size()) {
        throw DimensionError("write_features: label count does not match sample count");
    }
    out << kMagic << ' ' << kVersion << " K=" << features.num_blocks() << " d=" << features.block_dim()
        << " N=" << features.size() << " classes=";
    for (std::size_t k = 0; k < names.size(); ++k) {
        if (names[k].empty() || names[k].find_first_of(" \t,\n") != std::string::npos) {
            throw DataError("class name '" + names[k] + "' cannot be written");
        }
        out << (k ? "," : "") << names[k];
    }
    out << '\n';

    char buf[64];
    for (std::size_t j = 0; j < features.size(); ++j) {
        bool first = true;
        if (labels) {
            out << names[labels->indices()[j]];
            first = false;
        }
        for (std::size_t b = 0; b < features.num_blocks(); ++b) {
            const Matrix& blk = features.block(b);
            for (Eigen::Index r = 0; r < blk.rows(); ++r) {
                const auto res = std::to_chars(buf, buf + sizeof(buf), blk(r, static_cast<Eigen::Index>(j)));
                if (!first) out << ' ';
                out.write(buf, res.ptr - buf);
                first = false;
            }
        }
        out << '\n';
    }
}

void save_features(const std::string& path, const BlockedFeatureSet& features, const LabelMatrix* labels,
                   const std::vector<std::string>& class_names) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    write_features(out, features, labels, class_names);
    if (!out) throw DataError("failed writing '" + path + "'");
}

LoadedFeatures load_features(const DatasetManifest& manifest, DomainTag tag) {
    std::ifstream in(manifest.feature_file, std::ios::binary);
    if (!in) throw DataError("cannot open feature file '" + manifest.feature_file + "'");
    LoadedFeatures loaded = read_features(in, tag, manifest.feature_file);
    const auto& f = loaded.features;
    auto check = [&](std::size_t declared, std::size_t actual, const char* what) {
        if (declared != 0 && declared != actual) {
            throw DataError(manifest.feature_file + ": manifest declares " + what + "=" +
                            std::to_string(declared) + " but file has " + std::to_string(actual));
        }
    };
    check(manifest.K, f.num_blocks(), "K");
    check(manifest.d, f.block_dim(), "d");
    check(manifest.N, f.size(), "N");
    if (!manifest.class_counts.empty() && loaded.labels) {
        for (const auto& [name, count] : manifest.class_counts) {
            std::size_t k = 0;
            while (k < loaded.class_names.size() && loaded.class_names[k] != name) ++k;
            if (k == loaded.class_names.size()) {
                throw DataError(manifest.feature_file + ": manifest class '" + name + "' not in file");
            }
            std::size_t actual = 0;
            for (auto idx : loaded.labels->indices()) actual += (idx == k);
            check(count, actual, ("count of " + name).c_str());
        }
    }
    return loaded;
}

std::string to_string(TaskType type) { return type == TaskType::type_i ? "TYPE-I" : "TYPE-II"; }

TaskType task_type_from_string(const std::string& s) {
    if (s == "TYPE-I" || s == "I") return TaskType::type_i;
    if (s == "TYPE-II" || s == "II") return TaskType::type_ii;
    throw ConfigError("unknown task type '" + s + "'");
}

const std::vector<TaskSpec>& builtin_protocol() {
    static const std::vector<TaskSpec> tasks = {
        {"Exp.1", "H", "V", TaskType::type_i},   {"Exp.2", "V", "H", TaskType::type_i},
        {"Exp.3", "H", "N", TaskType::type_i},   {"Exp.4", "N", "H", TaskType::type_i},
        {"Exp.5", "V", "N", TaskType::type_i},   {"Exp.6", "N", "V", TaskType::type_i},
        {"Exp.7", "C", "H", TaskType::type_ii},  {"Exp.8", "H", "C", TaskType::type_ii},
        {"Exp.9", "C", "V", TaskType::type_ii},  {"Exp.10", "V", "C", TaskType::type_ii},
        {"Exp.11", "C", "N", TaskType::type_ii}, {"Exp.12", "N", "C", TaskType::type_ii},
    };
    return tasks;
}

const std::vector<DatasetManifest>& builtin_manifests() {
    static const std::vector<DatasetManifest> manifests = {
        {"C", "Selected CASME II", {{"Positive", 32}, {"Negative", 73}, {"Surprise", 25}}, 0, 0, 130, ""},
        {"H", "SMIC (HS)", {{"Positive", 51}, {"Negative", 70}, {"Surprise", 43}}, 0, 0, 164, ""},
        {"V", "SMIC (VIS)", {{"Positive", 23}, {"Negative", 28}, {"Surprise", 20}}, 0, 0, 71, ""},
        {"N", "SMIC (NIR)", {{"Positive", 23}, {"Negative", 28}, {"Surprise", 20}}, 0, 0, 71, ""},
    };
    return manifests;
}

std::string dataset_display_name(const std::string& id) {
    for (const auto& m : builtin_manifests()) {
        if (m.dataset_id == id) return m.display_name;
    }
    return id;
}

void validate_protocol(const std::vector<TaskSpec>& tasks) {
    std::set<std::string> ids;
    for (const auto& t : tasks) {
        if (t.task_id.empty()) throw ConfigError("task with empty id");
        if (!ids.insert(t.task_id).second) throw ConfigError("duplicate task id '" + t.task_id + "'");
        if (t.source_id == t.target_id) {
            throw ConfigError("task '" + t.task_id + "' uses the same dataset as source and target");
        }
    }
}

}  // namespace rstr
