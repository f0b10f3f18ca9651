#ifndef RSTR_DATA_IO_HPP
#define RSTR_DATA_IO_HPP

#include "rstr/features.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rstr {

/// Per-dataset metadata. Zero-valued K/d/N mean "take from the file".
struct DatasetManifest {
    std::string dataset_id;
    std::string display_name;
    std::vector<std::pair<std::string, std::size_t>> class_counts;
    std::size_t K = 0;
    std::size_t d = 0;
    std::size_t N = 0;
    std::string feature_file;
};

struct LoadedFeatures {
    BlockedFeatureSet features;
    std::optional<LabelMatrix> labels;
    std::vector<std::string> class_names;
};

/// Parses the `cdmer-features v1` text format:
///
///   #cdmer-features v1 K=<k> d=<d> N=<n> classes=<c1,c2,...>
///   [<label>] <v_1> ... <v_{K*d}>      (N lines, block-major values)
///
/// Either every row carries a label token or none does. `origin` prefixes
/// error messages.
LoadedFeatures read_features(std::istream& in, DomainTag tag, const std::string& origin = "<stream>");

/// Writes the same format; values use the shortest round-trip decimal form.
void write_features(std::ostream& out, const BlockedFeatureSet& features,
                    const LabelMatrix* labels, const std::vector<std::string>& class_names = {});

void save_features(const std::string& path, const BlockedFeatureSet& features,
                   const LabelMatrix* labels, const std::vector<std::string>& class_names = {});

/// Reads manifest.feature_file and cross-checks it against the manifest.
LoadedFeatures load_features(const DatasetManifest& manifest, DomainTag tag);

enum class TaskType { type_i, type_ii };

std::string to_string(TaskType type);
TaskType task_type_from_string(const std::string& s);

/// One source -> target experiment.
struct TaskSpec {
    std::string task_id;
    std::string source_id;
    std::string target_id;
    TaskType type = TaskType::type_i;

    friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

/// The twelve cross-database tasks over SMIC (H, V, N) and selected CASME II (C).
const std::vector<TaskSpec>& builtin_protocol();

/// Class constitutions of the four databases, keyed by id H, V, N, C.
const std::vector<DatasetManifest>& builtin_manifests();

/// "SMIC (HS)", "SMIC (VIS)", "SMIC (NIR)", "Selected CASME II" for the builtin ids; the id otherwise.
std::string dataset_display_name(const std::string& id);

/// Throws ConfigError on duplicate task ids or source == target.
void validate_protocol(const std::vector<TaskSpec>& tasks);

}  // namespace rstr

#endif  // RSTR_DATA_IO_HPP
