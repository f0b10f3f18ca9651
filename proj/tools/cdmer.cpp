// cdmer: command-line driver for region selective transfer regression.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 verification failure.

#include "rstr/data_io.hpp"
#include "rstr/error.hpp"
#include "rstr/harness.hpp"
#include "rstr/metrics.hpp"
#include "rstr/serialization.hpp"
#include "rstr/synthetic.hpp"
#include "rstr/verification/acceptance.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitVerify = 3;

struct CommonFlags {
    std::string config;
    std::string task;
    std::string method;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format;
    std::optional<int> jobs;
    bool synthetic = false;
    std::optional<double> lambda, mu, gamma;
};

void add_common(CLI::App* app, CommonFlags& f, bool with_task) {
    app->add_option("--config", f.config, "Run configuration (JSON)");
    if (with_task) app->add_option("--task", f.task, "Task id, e.g. Exp.1");
    app->add_option("--method", f.method, "rstr | baseline | both")->check(CLI::IsMember({"rstr", "baseline", "both"}));
    app->add_option("--seed", f.seed, "Seed for synthetic data");
    app->add_option("--out", f.out, "Output path (default: stdout)");
    app->add_option("--format", f.format, "tsv | json")->check(CLI::IsMember({"tsv", "json"}));
    app->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
    app->add_flag("--synthetic", f.synthetic, "Use generated stand-ins for datasets without a manifest");
    app->add_option("--lambda", f.lambda, "Region-weight sparsity");
    app->add_option("--mu", f.mu, "Coefficient sparsity");
    app->add_option("--gamma", f.gamma, "Mean-gap penalty");
}

// Loads the config file (if any) and applies flag overrides; flags win.
rstr::RunConfig resolve_config(const CommonFlags& f) {
    rstr::RunConfig cfg = f.config.empty() ? rstr::RunConfig{} : rstr::load_run_config(f.config);
    if (f.synthetic && !cfg.synthetic) cfg.synthetic = rstr::SyntheticShiftConfig{};
    if (f.seed) {
        cfg.seed = *f.seed;
        if (cfg.synthetic) cfg.synthetic->seed = *f.seed;
    }
    if (!f.method.empty()) cfg.method = rstr::method_from_string(f.method);
    if (!f.out.empty()) cfg.output = f.out;
    if (!f.format.empty()) cfg.format = rstr::report_format_from_string(f.format);
    if (f.jobs) cfg.jobs = *f.jobs;
    if (f.lambda) cfg.hyperparams.lambda = *f.lambda;
    if (f.mu) cfg.hyperparams.mu = *f.mu;
    if (f.gamma) cfg.hyperparams.gamma = *f.gamma;
    if (!f.task.empty()) {
        const auto it = std::find_if(cfg.tasks.begin(), cfg.tasks.end(),
                                     [&](const rstr::TaskSpec& t) { return t.task_id == f.task; });
        if (it == cfg.tasks.end()) throw rstr::ConfigError("unknown task '" + f.task + "'");
        cfg.tasks = {*it};
    }
    cfg.validate();
    return cfg;
}

const rstr::TaskSpec& single_task(const rstr::RunConfig& cfg) {
    if (cfg.tasks.size() != 1) throw rstr::ConfigError("select one task with --task");
    return cfg.tasks.front();
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
    } else {
        rstr::write_text_file(path, text);
    }
}

int report(const rstr::RunConfig& cfg) {
    const rstr::ProtocolReport r = rstr::run_protocol(cfg);
    emit(cfg.output, rstr::render_report(r, cfg.format));
    for (const auto& t : r.results) {
        if (!t.ok) std::cerr << "cdmer: " << t.task.task_id << " (" << t.method << "): " << t.error << "\n";
    }
    return r.partial ? kExitData : kExitOk;
}

int cmd_train(const CommonFlags& f) {
    rstr::RunConfig cfg = resolve_config(f);
    const rstr::TaskSpec& task = single_task(cfg);
    if (cfg.method == rstr::Method::both) cfg.method = rstr::Method::rstr;
    if (cfg.output.empty()) throw rstr::ConfigError("train needs --out for the model artifact");
    rstr::DatasetStore store(cfg);
    const rstr::Dataset& src = store.get(task.source_id);
    const rstr::Dataset& tgt = store.get(task.target_id);
    if (!src.labels) throw rstr::DataError(task.source_id + ": source has no labels");
    if (cfg.method == rstr::Method::baseline) {
        rstr::write_text_file(cfg.output, rstr::serialize_model(rstr::train_baseline(src.features, *src.labels, cfg.baseline_ridge)));
        return kExitOk;
    }
    const rstr::RstrModel m = rstr::train(src.features, *src.labels, tgt.features.with_tag(rstr::DomainTag::target), cfg.hyperparams);
    for (const auto& w : m.warnings) std::cerr << "cdmer: warning: " << w << "\n";
    rstr::write_text_file(cfg.output, rstr::serialize_model(m));
    std::cerr << "cdmer: trained " << task.task_id << " in " << m.objective_trace.size()
              << " outer iterations, objective " << m.objective_trace.back() << "\n";
    return kExitOk;
}

int cmd_predict(const CommonFlags& f, const std::string& model_path, const std::string& input) {
    rstr::RunConfig cfg = resolve_config(f);
    const rstr::TaskSpec& task = single_task(cfg);
    rstr::DatasetStore store(cfg);
    const std::string text = rstr::read_text_file(model_path);
    const std::string method = rstr::model_method(text);

    std::optional<rstr::LoadedFeatures> external;
    if (!input.empty()) {
        std::ifstream in(input);
        if (!in) throw rstr::DataError("cannot open '" + input + "'");
        external = rstr::read_features(in, rstr::DomainTag::test, input);
    }
    const rstr::Dataset& tgt = store.get(task.target_id);
    const rstr::BlockedFeatureSet test =
        external ? external->features : tgt.features.with_tag(rstr::DomainTag::test);

    rstr::PredictedLabels pred;
    std::vector<std::string> names;
    if (method == "rstr") {
        const rstr::Dataset& src = store.get(task.source_id);
        const rstr::RstrModel m = rstr::deserialize_rstr_model(text, src.features, tgt.features);
        pred = rstr::predict(m, test);
        names = m.class_names;
    } else {
        const rstr::BaselineModel m = rstr::deserialize_baseline_model(text);
        pred = rstr::predict_baseline(m, test);
        names = m.class_names;
    }

    std::ostringstream out;
    out << "# cdmer-predictions v1\tmethod=" << method << "\n";
    out << "sample\tpredicted";
    for (const auto& n : names) out << "\tl_" << n;
    out << "\n";
    for (std::size_t j = 0; j < pred.hard_labels.size(); ++j) {
        out << j << "\t" << names[pred.hard_labels[j]];
        for (Eigen::Index k = 0; k < pred.label_vectors.rows(); ++k) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6f", pred.label_vectors(k, static_cast<Eigen::Index>(j)));
            out << "\t" << buf;
        }
        out << "\n";
    }
    emit(cfg.output, out.str());

    const std::optional<rstr::LabelMatrix>& truth = external ? external->labels : tgt.labels;
    if (truth && truth->class_names() == names) {
        const rstr::ConfusionMatrix cm = rstr::confusion(pred.hard_labels, truth->indices(), names.size());
        std::cerr << "cdmer: " << rstr::format_cell(rstr::mean_f1(cm), rstr::accuracy(cm)) << "\n";
    }
    return kExitOk;
}

int cmd_sweep(const CommonFlags& f) {
    rstr::RunConfig cfg = resolve_config(f);
    if (!cfg.sweep) cfg.sweep = rstr::SweepConfig::defaults();
    if (cfg.method == rstr::Method::baseline) throw rstr::ConfigError("sweep applies to the rstr method");
    return report(cfg);
}

struct GenerateFlags {
    std::string out;
    std::uint64_t seed = 1;
    bool pair = false;
    rstr::SyntheticShiftConfig cfg;
};

int cmd_generate(GenerateFlags g) {
    if (g.out.empty()) throw rstr::ConfigError("generate-synthetic needs --out <directory>");
    g.cfg.seed = g.seed;
    g.cfg.validate();
    std::filesystem::create_directories(g.out);
    json manifests = json::object();
    json cfg_json;
    auto save = [&](const std::string& id, const rstr::LabeledSet& set) {
        const std::string file = id + ".features";
        rstr::save_features((std::filesystem::path(g.out) / file).string(), set.features, &set.labels,
                            set.labels.class_names());
        manifests[id] = {{"feature_file", file}};
    };
    if (g.pair) {
        const rstr::SyntheticTask task = rstr::generate_synthetic(g.cfg);
        save("S", task.source);
        save("T", task.target);
        cfg_json["tasks"] = json::array({{{"task_id", "synthetic"}, {"source_id", "S"}, {"target_id", "T"}}});
    } else {
        for (const auto& [id, set] : rstr::generate_standins(g.cfg)) save(id, set);
        cfg_json["tasks"] = "builtin";
    }
    cfg_json["manifests"] = manifests;
    cfg_json["method"] = "both";
    cfg_json["hyperparams"] = {{"lambda", 1.0}, {"mu", 1.0}, {"gamma", 10.0}};
    cfg_json["seed"] = g.seed;
    rstr::write_text_file((std::filesystem::path(g.out) / "config.json").string(), cfg_json.dump(2) + "\n");
    std::cerr << "cdmer: wrote " << manifests.size() << " feature files and config.json to " << g.out << "\n";
    return kExitOk;
}

int cmd_verify(const rstr::verify::Options& o, const std::string& only) {
    bool all_ok = true;
    auto print = [&](const rstr::verify::CheckResult& r) {
        std::cout << rstr::verify::format_line(r) << std::endl;
        all_ok = all_ok && r.passed;
    };
    if (only.empty()) {
        rstr::verify::run_all(o, print);
    } else {
        bool found = false;
        for (const auto& c : rstr::verify::checks()) {
            if (c.id != only || !c.run) continue;
            found = true;
            print(rstr::verify::run_check(c, o));
        }
        if (!found) throw rstr::ConfigError("unknown or shared check '" + only + "'");
    }
    return all_ok ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-database micro-expression recognition with region selective transfer regression"};
    app.require_subcommand(1);

    CommonFlags train_f, predict_f, task_f, proto_f, sweep_f;
    auto* train_cmd = app.add_subcommand("train", "Train one model on a task and write the artifact");
    add_common(train_cmd, train_f, true);

    std::string model_path, input_path;
    auto* predict_cmd = app.add_subcommand("predict", "Predict target (or --input) samples with a saved model");
    add_common(predict_cmd, predict_f, true);
    predict_cmd->add_option("--model", model_path, "Model artifact")->required();
    predict_cmd->add_option("--input", input_path, "Feature file to label instead of the task target");

    auto* task_cmd = app.add_subcommand("run-task", "Run one task and print its report");
    add_common(task_cmd, task_f, true);
    task_cmd->callback([&] { if (task_f.task.empty()) throw CLI::RequiredError("--task"); });

    auto* proto_cmd = app.add_subcommand("run-protocol", "Run every task of the configuration");
    add_common(proto_cmd, proto_f, false);

    auto* sweep_cmd = app.add_subcommand("sweep", "Grid-search hyperparameters per task (oracle-selected)");
    add_common(sweep_cmd, sweep_f, true);

    GenerateFlags gen;
    auto* gen_cmd = app.add_subcommand("generate-synthetic", "Write synthetic feature files plus a config");
    gen_cmd->add_option("--out", gen.out, "Output directory")->required();
    gen_cmd->add_option("--seed", gen.seed, "Seed");
    gen_cmd->add_flag("--pair", gen.pair, "One source/target pair instead of the four stand-in datasets");
    gen_cmd->add_option("--K", gen.cfg.K, "Blocks");
    gen_cmd->add_option("--d", gen.cfg.d, "Block dimension");
    gen_cmd->add_option("--n-source", gen.cfg.n_source, "Source samples (--pair)");
    gen_cmd->add_option("--n-target", gen.cfg.n_target, "Target samples (--pair)");
    gen_cmd->add_option("--separation", gen.cfg.class_separation, "Distance between class means");
    gen_cmd->add_option("--shift", gen.cfg.shift_magnitude, "Domain shift magnitude");

    rstr::verify::Options vopt;
    std::string only, fixture;
    auto* verify_cmd = app.add_subcommand("verify", "Run the acceptance suite");
    verify_cmd->add_option("--seed", vopt.seed, "Seed");
    verify_cmd->add_option("--jobs", vopt.jobs, "Worker threads")->check(CLI::PositiveNumber);
    verify_cmd->add_option("--check", only, "Run a single check, e.g. C3");
    verify_cmd->add_option("--fixture", fixture, "Extra feature file for the loader check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*train_cmd) return cmd_train(train_f);
        if (*predict_cmd) return cmd_predict(predict_f, model_path, input_path);
        if (*task_cmd) return report(resolve_config(task_f));
        if (*proto_cmd) return report(resolve_config(proto_f));
        if (*sweep_cmd) return cmd_sweep(sweep_f);
        if (*gen_cmd) return cmd_generate(gen);
        if (*verify_cmd) {
            if (!fixture.empty()) vopt.fixture = fixture;
            return cmd_verify(vopt, only);
        }
    } catch (const rstr::ConfigError& e) {
        std::cerr << "cdmer: config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const rstr::Error& e) {
        std::cerr << "cdmer: data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "cdmer: error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitConfig;
}
