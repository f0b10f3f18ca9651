#include "rstr/harness.hpp"

#include "rstr/error.hpp"
#include "rstr/metrics.hpp"
#include "rstr/parallel.hpp"
#include "rstr/serialization.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace rstr {

using nlohmann::json;

std::string to_string(Method m) {
    switch (m) {
        case Method::rstr: return "rstr";
        case Method::baseline: return "baseline";
        case Method::both: return "both";
    }
    return "unknown";
}

Method method_from_string(const std::string& s) {
    if (s == "rstr") return Method::rstr;
    if (s == "baseline") return Method::baseline;
    if (s == "both") return Method::both;
    throw ConfigError("unknown method '" + s + "' (expected rstr, baseline or both)");
}

std::string to_string(ReportFormat f) { return f == ReportFormat::tsv ? "tsv" : "json"; }

ReportFormat report_format_from_string(const std::string& s) {
    if (s == "tsv") return ReportFormat::tsv;
    if (s == "json") return ReportFormat::json;
    throw ConfigError("unknown report format '" + s + "' (expected tsv or json)");
}

namespace {

// {step, 2 step, ..., count step}, each rounded so that e.g. 3 * 0.1 is 0.3.
std::vector<double> stepped(double step, int count) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 1; i <= count; ++i) out.push_back(std::round(step * i * 1e6) / 1e6);
    return out;
}

void assign_symbol(RstrHyperparams& hp, const std::string& symbol, double value) {
    if (symbol == "lambda") hp.lambda = value;
    else if (symbol == "mu") hp.mu = value;
    else if (symbol == "gamma") hp.gamma = value;
    else throw ConfigError("sweep mapping target '" + symbol + "' is not one of lambda, mu, gamma");
}

}  // namespace

SweepConfig SweepConfig::defaults() {
    SweepConfig s;
    s.lambda_grid = {0.1, 1, 10, 100, 1000, 10000};
    s.mu_grid = stepped(0.1, 50);
    s.tau_grid = stepped(0.01, 10);
    return s;
}

void SweepConfig::validate() const {
    if (lambda_grid.empty() || mu_grid.empty() || tau_grid.empty()) {
        throw ConfigError("sweep grids must be non-empty");
    }
    const std::set<std::string> targets{lambda_maps_to, mu_maps_to, tau_maps_to};
    if (targets != std::set<std::string>{"lambda", "mu", "gamma"}) {
        throw ConfigError("sweep mapping must send the three grids to lambda, mu and gamma, one each");
    }
    for (const auto* grid : {&lambda_grid, &mu_grid, &tau_grid}) {
        for (double v : *grid) {
            if (!(std::isfinite(v) && v >= 0.0)) throw ConfigError("sweep grid values must be finite and >= 0");
        }
    }
}

std::size_t SweepConfig::size() const { return lambda_grid.size() * mu_grid.size() * tau_grid.size(); }

std::vector<RstrHyperparams> SweepConfig::expand(const RstrHyperparams& base) const {
    validate();
    std::vector<RstrHyperparams> out;
    out.reserve(size());
    for (double a : lambda_grid) {
        for (double b : mu_grid) {
            for (double c : tau_grid) {
                RstrHyperparams hp = base;
                assign_symbol(hp, lambda_maps_to, a);
                assign_symbol(hp, mu_maps_to, b);
                assign_symbol(hp, tau_maps_to, c);
                out.push_back(hp);
            }
        }
    }
    return out;
}

void RunConfig::validate() const {
    validate_protocol(tasks);
    hyperparams.validate();
    if (sweep) sweep->validate();
    if (!(baseline_ridge > 0.0)) throw ConfigError("baseline_ridge must be positive");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    std::set<std::string> known;
    for (const auto& [id, m] : manifests) known.insert(id);
    if (synthetic) {
        synthetic->validate();
        for (const auto& m : builtin_manifests()) known.insert(m.dataset_id);
    }
    for (const auto& t : tasks) {
        for (const auto& id : {t.source_id, t.target_id}) {
            if (!known.count(id)) {
                throw ConfigError("task '" + t.task_id + "' references unknown dataset '" + id + "'");
            }
        }
    }
}

namespace {

SyntheticShiftConfig synthetic_from_json(const json& j) {
    SyntheticShiftConfig s;
    s.seed = j.value("seed", s.seed);
    s.classes = j.value("classes", s.classes);
    s.K = j.value("K", s.K);
    s.d = j.value("d", s.d);
    s.n_source = j.value("n_source", s.n_source);
    s.n_target = j.value("n_target", s.n_target);
    s.class_separation = j.value("class_separation", s.class_separation);
    s.shift_magnitude = j.value("shift_magnitude", s.shift_magnitude);
    s.noise_std = j.value("noise_std", s.noise_std);
    s.informative_blocks = j.value("informative_blocks", s.informative_blocks);
    s.shift_noise_blocks = j.value("shift_noise_blocks", s.shift_noise_blocks);
    return s;
}

DatasetManifest manifest_from_json(const std::string& id, const json& j, const std::string& base_dir) {
    DatasetManifest m;
    m.dataset_id = id;
    m.display_name = j.value("display_name", dataset_display_name(id));
    m.K = j.value("K", std::size_t{0});
    m.d = j.value("d", std::size_t{0});
    m.N = j.value("N", std::size_t{0});
    const std::string file = j.at("feature_file").get<std::string>();
    const std::filesystem::path p(file);
    m.feature_file = p.is_absolute() ? file : (std::filesystem::path(base_dir) / p).string();
    if (j.contains("class_counts")) {
        for (const auto& entry : j.at("class_counts")) {
            m.class_counts.emplace_back(entry.at(0).get<std::string>(), entry.at(1).get<std::size_t>());
        }
    }
    return m;
}

}  // namespace

RunConfig run_config_from_json(const json& j, const std::string& base_dir) {
    RunConfig cfg;
    try {
        if (j.contains("tasks")) {
            const json& t = j.at("tasks");
            if (t.is_string()) {
                if (t.get<std::string>() != "builtin") throw ConfigError("tasks must be \"builtin\" or a list");
                cfg.tasks = builtin_protocol();
            } else {
                cfg.tasks.clear();
                for (const auto& e : t) {
                    cfg.tasks.push_back({e.at("task_id").get<std::string>(), e.at("source_id").get<std::string>(),
                                         e.at("target_id").get<std::string>(),
                                         task_type_from_string(e.value("type", std::string("TYPE-I")))});
                }
            }
        }
        if (j.contains("manifests")) {
            for (const auto& [id, m] : j.at("manifests").items()) {
                cfg.manifests.emplace(id, manifest_from_json(id, m, base_dir));
            }
        }
        if (j.contains("synthetic")) cfg.synthetic = synthetic_from_json(j.at("synthetic"));
        cfg.method = method_from_string(j.value("method", std::string("both")));
        if (j.contains("hyperparams")) cfg.hyperparams = hyperparams_from_json(j.at("hyperparams"));
        if (j.contains("sweep")) {
            const json& s = j.at("sweep");
            SweepConfig sweep = SweepConfig::defaults();
            if (!(s.is_string() && s.get<std::string>() == "default")) {
                sweep.lambda_grid = s.value("lambda", sweep.lambda_grid);
                sweep.mu_grid = s.value("mu", sweep.mu_grid);
                sweep.tau_grid = s.value("tau", sweep.tau_grid);
                if (s.contains("mapping")) {
                    const json& m = s.at("mapping");
                    sweep.lambda_maps_to = m.value("lambda", sweep.lambda_maps_to);
                    sweep.mu_maps_to = m.value("mu", sweep.mu_maps_to);
                    sweep.tau_maps_to = m.value("tau", sweep.tau_maps_to);
                }
            }
            cfg.sweep = sweep;
        }
        cfg.baseline_ridge = j.value("baseline_ridge", cfg.baseline_ridge);
        cfg.output = j.value("output", cfg.output);
        cfg.format = report_format_from_string(j.value("format", std::string("tsv")));
        cfg.seed = j.value("seed", cfg.seed);
        cfg.jobs = j.value("jobs", cfg.jobs);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    }
    if (cfg.synthetic && !j.at("synthetic").contains("seed")) cfg.synthetic->seed = cfg.seed;
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    const auto dir = std::filesystem::path(path).parent_path();
    return run_config_from_json(j, dir.empty() ? "." : dir.string());
}

DatasetStore::DatasetStore(const RunConfig& cfg) : cfg_(&cfg) {
    if (cfg.synthetic) synthetic_ = generate_standins(*cfg.synthetic);
}

const Dataset& DatasetStore::get(const std::string& id) {
    if (auto it = cache_.find(id); it != cache_.end()) return it->second;
    if (auto m = cfg_->manifests.find(id); m != cfg_->manifests.end()) {
        LoadedFeatures loaded = load_features(m->second, DomainTag::source);
        return cache_.emplace(id, Dataset{std::move(loaded.features), std::move(loaded.labels)}).first->second;
    }
    if (auto s = synthetic_.find(id); s != synthetic_.end()) {
        return cache_.emplace(id, Dataset{s->second.features, s->second.labels}).first->second;
    }
    throw ConfigError("unresolvable dataset id '" + id + "'");
}

std::size_t select_best(const std::vector<std::pair<double, double>>& scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        const auto& [f1, acc] = scores[i];
        const auto& [bf1, bacc] = scores[best];
        if (f1 > bf1 || (f1 == bf1 && acc > bacc)) best = i;
    }
    return best;
}

namespace {

// Re-expresses target labels in the source's class order.
std::vector<std::size_t> aligned_truths(const LabelMatrix& source, const LabelMatrix& target,
                                        const std::string& task_id) {
    std::vector<std::size_t> remap(target.num_classes());
    for (std::size_t k = 0; k < target.num_classes(); ++k) {
        const auto& names = source.class_names();
        std::size_t s = 0;
        while (s < names.size() && names[s] != target.class_names()[k]) ++s;
        if (s == names.size()) {
            throw DataError(task_id + ": target class '" + target.class_names()[k] + "' absent from source");
        }
        remap[k] = s;
    }
    std::vector<std::size_t> out;
    out.reserve(target.size());
    for (auto idx : target.indices()) out.push_back(remap[idx]);
    return out;
}

struct Score {
    double mean_f1;
    double accuracy;
};

Score score(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& truths, std::size_t c) {
    const ConfusionMatrix cm = confusion(preds, truths, c);
    return {mean_f1(cm), accuracy(cm)};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<TaskResult> run_task(const RunConfig& cfg, const TaskSpec& task, DatasetStore& store) {
    const Dataset& src = store.get(task.source_id);
    const Dataset& tgt = store.get(task.target_id);
    if (!src.labels) throw DataError(task.task_id + ": source dataset '" + task.source_id + "' has no labels");
    if (!tgt.labels) {
        throw DataError(task.task_id + ": target dataset '" + task.target_id + "' has no labels for scoring");
    }
    require_same_layout(src.features, tgt.features, task.task_id);
    const BlockedFeatureSet source = src.features.with_tag(DomainTag::source);
    const BlockedFeatureSet target = tgt.features.with_tag(DomainTag::target);
    const LabelMatrix& labels = *src.labels;
    const std::vector<std::size_t> truths = aligned_truths(labels, *tgt.labels, task.task_id);
    const std::size_t c = labels.num_classes();

    std::vector<TaskResult> results;
    if (cfg.method == Method::rstr || cfg.method == Method::both) {
        const auto t0 = std::chrono::steady_clock::now();
        const std::vector<RstrHyperparams> points =
            cfg.sweep ? cfg.sweep->expand(cfg.hyperparams) : std::vector<RstrHyperparams>{cfg.hyperparams};

        struct PointOutcome {
            Score s;
            std::vector<double> w;
            std::size_t iterations;
            double objective;
            bool converged;
        };
        std::vector<PointOutcome> outcomes(points.size());
        parallel_for(points.size(), cfg.jobs, [&](std::size_t i) {
            const RstrModel model = train(source, labels, target, points[i]);
            const PredictedLabels pred = predict(model, target);
            outcomes[i] = {score(pred.hard_labels, truths, c),
                           std::vector<double>(model.w.data(), model.w.data() + model.w.size()),
                           model.objective_trace.size(), model.objective_trace.back(), model.converged};
        });
        std::vector<std::pair<double, double>> scores;
        scores.reserve(outcomes.size());
        for (const auto& o : outcomes) scores.emplace_back(o.s.mean_f1, o.s.accuracy);
        const std::size_t best = select_best(scores);

        TaskResult r;
        r.task = task;
        r.method = "RSTR";
        r.mean_f1 = outcomes[best].s.mean_f1;
        r.accuracy = outcomes[best].s.accuracy;
        r.hyperparams = points[best];
        r.selection = cfg.sweep ? "oracle-selected" : "fixed";
        r.grid_index = best;
        r.grid_size = points.size();
        r.outer_iterations = outcomes[best].iterations;
        r.final_objective = outcomes[best].objective;
        r.converged = outcomes[best].converged;
        r.region_weights = outcomes[best].w;
        r.wall_seconds = seconds_since(t0);
        results.push_back(std::move(r));
    }
    if (cfg.method == Method::baseline || cfg.method == Method::both) {
        const auto t0 = std::chrono::steady_clock::now();
        const BaselineModel model = train_baseline(source, labels, cfg.baseline_ridge);
        const PredictedLabels pred = predict_baseline(model, target);
        const Score s = score(pred.hard_labels, truths, c);
        TaskResult r;
        r.task = task;
        r.method = "regression baseline";
        r.mean_f1 = s.mean_f1;
        r.accuracy = s.accuracy;
        r.wall_seconds = seconds_since(t0);
        results.push_back(std::move(r));
    }
    return results;
}

std::vector<TaskResult> run_task(const RunConfig& cfg, const TaskSpec& task) {
    DatasetStore store(cfg);
    return run_task(cfg, task, store);
}

ProtocolReport run_protocol(const RunConfig& cfg) {
    cfg.validate();
    DatasetStore store(cfg);
    ProtocolReport report;
    report.swept = cfg.sweep.has_value();
    for (const auto& task : cfg.tasks) {
        try {
            auto rows = run_task(cfg, task, store);
            for (auto& r : rows) report.results.push_back(std::move(r));
        } catch (const std::exception& e) {
            report.partial = true;
            std::vector<std::string> methods;
            if (cfg.method != Method::baseline) methods.emplace_back("RSTR");
            if (cfg.method != Method::rstr) methods.emplace_back("regression baseline");
            for (const auto& m : methods) {
                TaskResult r;
                r.task = task;
                r.method = m;
                r.ok = false;
                r.error = e.what();
                report.results.push_back(std::move(r));
            }
        }
    }
    return report;
}

std::string format_cell(double f1, double acc) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f / %.2f", f1, acc);
    return buf;
}

std::vector<AverageRow> averages(const ProtocolReport& report) {
    std::vector<AverageRow> rows;
    for (const auto& r : report.results) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const AverageRow& a) { return a.method == r.method; });
        if (it == rows.end()) {
            rows.push_back({r.method, 0.0, 0.0, 0});
            it = rows.end() - 1;
        }
        if (!r.ok) continue;
        it->mean_f1 += r.mean_f1;
        it->accuracy += r.accuracy;
        ++it->tasks;
    }
    for (auto& a : rows) {
        if (a.tasks > 0) {
            a.mean_f1 /= static_cast<double>(a.tasks);
            a.accuracy /= static_cast<double>(a.tasks);
        }
    }
    return rows;
}

namespace {

std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string sanitize(std::string s) {
    for (char& ch : s) {
        if (ch == '\t' || ch == '\n' || ch == '\r') ch = ' ';
    }
    return s;
}

std::string render_tsv(const ProtocolReport& report) {
    std::ostringstream os;
    os << "# cdmer-report v1\tselection=" << (report.swept ? "oracle-selected" : "fixed")
       << "\tpartial=" << (report.partial ? "true" : "false") << '\n';
    os << "task\ttype\tsource\ttarget\tmethod\tmean_f1\taccuracy\tcell\tlambda\tmu\tgamma\tstatus\n";
    char f1[32];
    char acc[32];
    for (const auto& r : report.results) {
        os << r.task.task_id << '\t' << to_string(r.task.type) << '\t' << r.task.source_id << '\t'
           << r.task.target_id << '\t' << r.method << '\t';
        if (r.ok) {
            std::snprintf(f1, sizeof(f1), "%.4f", r.mean_f1);
            std::snprintf(acc, sizeof(acc), "%.2f", r.accuracy);
            os << f1 << '\t' << acc << '\t' << format_cell(r.mean_f1, r.accuracy) << '\t';
        } else {
            os << "-\t-\t-\t";
        }
        if (r.hyperparams) {
            os << fmt_g(r.hyperparams->lambda) << '\t' << fmt_g(r.hyperparams->mu) << '\t'
               << fmt_g(r.hyperparams->gamma) << '\t';
        } else {
            os << "-\t-\t-\t";
        }
        os << (r.ok ? "ok" : "error: " + sanitize(r.error)) << '\n';
    }
    for (const auto& a : averages(report)) {
        std::snprintf(f1, sizeof(f1), "%.4f", a.mean_f1);
        std::snprintf(acc, sizeof(acc), "%.2f", a.accuracy);
        os << "Average\t-\t-\t-\t" << a.method << '\t' << f1 << '\t' << acc << '\t'
           << format_cell(a.mean_f1, a.accuracy) << "\t-\t-\t-\t" << (a.tasks ? "ok" : "no tasks") << '\n';
    }
    return os.str();
}

std::string render_json(const ProtocolReport& report) {
    json rows = json::array();
    for (const auto& r : report.results) {
        json row = {{"task_id", r.task.task_id},
                    {"type", to_string(r.task.type)},
                    {"source_id", r.task.source_id},
                    {"target_id", r.task.target_id},
                    {"method", r.method},
                    {"status", r.ok ? "ok" : "error"}};
        if (r.ok) {
            row["mean_f1"] = r.mean_f1;
            row["accuracy"] = r.accuracy;
            row["cell"] = format_cell(r.mean_f1, r.accuracy);
            row["selection"] = r.selection;
        } else {
            row["error"] = r.error;
        }
        if (r.hyperparams) {
            row["hyperparams"] = {{"lambda", r.hyperparams->lambda},
                                  {"mu", r.hyperparams->mu},
                                  {"gamma", r.hyperparams->gamma},
                                  {"kernel", kernel_to_json(r.hyperparams->kernel)}};
            row["grid_index"] = r.grid_index;
            row["grid_size"] = r.grid_size;
            row["outer_iterations"] = r.outer_iterations;
            row["final_objective"] = r.final_objective;
            row["converged"] = r.converged;
            row["region_weights"] = r.region_weights;
        }
        rows.push_back(std::move(row));
    }
    json avg = json::array();
    for (const auto& a : averages(report)) {
        avg.push_back({{"method", a.method},
                       {"mean_f1", a.mean_f1},
                       {"accuracy", a.accuracy},
                       {"cell", format_cell(a.mean_f1, a.accuracy)},
                       {"tasks", a.tasks}});
    }
    const json doc = {{"format", "cdmer-report v1"},
                      {"selection", report.swept ? "oracle-selected" : "fixed"},
                      {"partial", report.partial},
                      {"results", std::move(rows)},
                      {"averages", std::move(avg)}};
    return doc.dump(2) + "\n";
}

}  // namespace

std::string render_report(const ProtocolReport& report, ReportFormat format) {
    return format == ReportFormat::tsv ? render_tsv(report) : render_json(report);
}

}  // namespace rstr
