#ifndef RSTR_HARNESS_HPP
#define RSTR_HARNESS_HPP

#include "rstr/baseline.hpp"
#include "rstr/data_io.hpp"
#include "rstr/model.hpp"
#include "rstr/synthetic.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rstr {

enum class Method { rstr, baseline, both };
enum class ReportFormat { tsv, json };

std::string to_string(Method m);
Method method_from_string(const std::string& s);
std::string to_string(ReportFormat f);
ReportFormat report_format_from_string(const std::string& s);

/// Hyperparameter grids. The three grids are named after the published search
/// spaces (lambda, mu, tau); each carries an explicit target symbol among
/// {lambda, mu, gamma} so the tau grid's role is never implicit.
struct SweepConfig {
    std::vector<double> lambda_grid;
    std::vector<double> mu_grid;
    std::vector<double> tau_grid;
    std::string lambda_maps_to = "lambda";
    std::string mu_maps_to = "mu";
    std::string tau_maps_to = "gamma";

    /// lambda in {0.1, ..., 10000}, mu in {0.1, 0.2, ..., 5}, tau in {0.01, ..., 0.1}.
    static SweepConfig defaults();

    void validate() const;
    [[nodiscard]] std::size_t size() const;
    /// Grid points in order: lambda grid outermost, tau grid innermost.
    [[nodiscard]] std::vector<RstrHyperparams> expand(const RstrHyperparams& base) const;
};

struct RunConfig {
    std::vector<TaskSpec> tasks = builtin_protocol();
    std::map<std::string, DatasetManifest> manifests;
    // When set, datasets H, V, N, C without a manifest are generated in memory.
    std::optional<SyntheticShiftConfig> synthetic;
    Method method = Method::both;
    RstrHyperparams hyperparams;
    std::optional<SweepConfig> sweep;
    double baseline_ridge = 1e-6;
    std::string output;
    ReportFormat format = ReportFormat::tsv;
    std::uint64_t seed = 1;
    int jobs = 1;

    void validate() const;
};

/// Parses a run configuration. Relative feature paths resolve against `base_dir`.
RunConfig run_config_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

struct Dataset {
    BlockedFeatureSet features;
    std::optional<LabelMatrix> labels;
};

/// Resolves dataset ids to features, loading each file at most once.
class DatasetStore {
public:
    explicit DatasetStore(const RunConfig& cfg);

    /// Throws ConfigError for an unknown id and DataError for unreadable files.
    const Dataset& get(const std::string& id);

private:
    const RunConfig* cfg_;
    std::map<std::string, Dataset> cache_;
    std::map<std::string, LabeledSet> synthetic_;
};

struct TaskResult {
    TaskSpec task;
    std::string method;  // "RSTR" or "regression baseline"
    bool ok = true;
    std::string error;
    double mean_f1 = 0.0;
    double accuracy = 0.0;
    std::optional<RstrHyperparams> hyperparams;
    std::string selection = "fixed";  // or "oracle-selected"
    std::size_t grid_index = 0;
    std::size_t grid_size = 1;
    double wall_seconds = 0.0;
    std::size_t outer_iterations = 0;
    double final_objective = 0.0;
    bool converged = true;
    std::vector<double> region_weights;
};

/// Index of the best (mean F1, accuracy) pair: highest mean F1, then highest
/// accuracy, then earliest.
std::size_t select_best(const std::vector<std::pair<double, double>>& scores);

/// Trains on labeled source plus unlabeled target, scores the target. One
/// result per requested method, RSTR first.
std::vector<TaskResult> run_task(const RunConfig& cfg, const TaskSpec& task, DatasetStore& store);
std::vector<TaskResult> run_task(const RunConfig& cfg, const TaskSpec& task);

struct ProtocolReport {
    std::vector<TaskResult> results;
    bool partial = false;
    bool swept = false;
};

/// Runs every task; a failing task is recorded and the run marked partial.
ProtocolReport run_protocol(const RunConfig& cfg);

/// "<mean F1, 4 decimals> / <accuracy, 2 decimals>"
std::string format_cell(double mean_f1, double accuracy);

struct AverageRow {
    std::string method;
    double mean_f1 = 0.0;
    double accuracy = 0.0;
    std::size_t tasks = 0;
};
std::vector<AverageRow> averages(const ProtocolReport& report);

std::string render_report(const ProtocolReport& report, ReportFormat format);

}  // namespace rstr

#endif  // RSTR_HARNESS_HPP
