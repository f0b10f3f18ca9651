#include "rstr/serialization.hpp"

#include "rstr/error.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace rstr {

using nlohmann::json;

namespace {

constexpr const char* kModelFormat = "cdmer-model v1";

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Matrix matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const json& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows) throw DataError("model: matrix row count mismatch");
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = data.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != cols) throw DataError("model: matrix column count mismatch");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json parse_envelope(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("model: cannot parse artifact: ") + e.what());
    }
    if (!j.is_object() || j.value("format", "") != kModelFormat) {
        throw DataError("model: not a cdmer-model v1 artifact");
    }
    return j;
}

}  // namespace

json kernel_to_json(const KernelConfig& cfg) {
    json j = {{"kind", to_string(cfg.kind)}};
    if (cfg.kind == KernelKind::polynomial) {
        j["degree"] = cfg.degree;
        j["offset"] = cfg.offset;
    }
    if (cfg.kind == KernelKind::gaussian) {
        j["bandwidth"] = cfg.bandwidth ? json(*cfg.bandwidth) : json("median-heuristic");
    }
    return j;
}

KernelConfig kernel_from_json(const json& j) {
    KernelConfig cfg;
    try {
        cfg.kind = kernel_kind_from_string(j.value("kind", std::string("linear")));
        cfg.degree = j.value("degree", cfg.degree);
        cfg.offset = j.value("offset", cfg.offset);
        if (j.contains("bandwidth")) {
            const json& bw = j.at("bandwidth");
            if (bw.is_number()) cfg.bandwidth = bw.get<double>();
            else if (!(bw.is_string() && bw.get<std::string>() == "median-heuristic")) {
                throw ConfigError("kernel bandwidth must be a number or \"median-heuristic\"");
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("kernel config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

json hyperparams_to_json(const RstrHyperparams& hp) {
    return {{"lambda", hp.lambda},
            {"mu", hp.mu},
            {"gamma", hp.gamma},
            {"kernel", kernel_to_json(hp.kernel)},
            {"outer_max_iters", hp.outer_max_iters},
            {"outer_tol", hp.outer_tol},
            {"rebalance_scale", hp.rebalance_scale},
            {"ialm",
             {{"kappa_init", hp.ialm.kappa_init},
              {"rho", hp.ialm.rho},
              {"kappa_max", hp.ialm.kappa_max},
              {"epsilon", hp.ialm.epsilon},
              {"max_iters", hp.ialm.max_iters}}},
            {"lasso", {{"max_sweeps", hp.lasso.max_sweeps}, {"tolerance", hp.lasso.tolerance}}}};
}

RstrHyperparams hyperparams_from_json(const json& j, RstrHyperparams hp) {
    try {
        hp.lambda = j.value("lambda", hp.lambda);
        hp.mu = j.value("mu", hp.mu);
        hp.gamma = j.value("gamma", hp.gamma);
        if (j.contains("kernel")) hp.kernel = kernel_from_json(j.at("kernel"));
        hp.outer_max_iters = j.value("outer_max_iters", hp.outer_max_iters);
        hp.outer_tol = j.value("outer_tol", hp.outer_tol);
        hp.rebalance_scale = j.value("rebalance_scale", hp.rebalance_scale);
        if (j.contains("ialm")) {
            const json& a = j.at("ialm");
            hp.ialm.kappa_init = a.value("kappa_init", hp.ialm.kappa_init);
            hp.ialm.rho = a.value("rho", hp.ialm.rho);
            hp.ialm.kappa_max = a.value("kappa_max", hp.ialm.kappa_max);
            hp.ialm.epsilon = a.value("epsilon", hp.ialm.epsilon);
            hp.ialm.max_iters = a.value("max_iters", hp.ialm.max_iters);
        }
        if (j.contains("lasso")) {
            const json& l = j.at("lasso");
            hp.lasso.max_sweeps = l.value("max_sweeps", hp.lasso.max_sweeps);
            hp.lasso.tolerance = l.value("tolerance", hp.lasso.tolerance);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("hyperparameters: ") + e.what());
    }
    hp.validate();
    return hp;
}

std::string serialize_model(const RstrModel& model) {
    json j = {{"format", kModelFormat},
              {"method", "rstr"},
              {"kernel", kernel_to_json(model.kernel)},
              {"class_names", model.class_names},
              {"training_hash", hex64(model.training_hash())},
              {"num_source", model.train_source->size()},
              {"num_target", model.train_target->size()},
              {"P", matrix_to_json(model.P)},
              {"w", std::vector<double>(model.w.data(), model.w.data() + model.w.size())},
              {"objective_trace", model.objective_trace},
              {"converged", model.converged}};
    return j.dump(1) + "\n";
}

std::string serialize_model(const BaselineModel& model) {
    json j = {{"format", kModelFormat},
              {"method", "baseline"},
              {"class_names", model.class_names},
              {"ridge", model.ridge},
              {"num_blocks", model.num_blocks},
              {"C", matrix_to_json(model.C)}};
    return j.dump(1) + "\n";
}

std::string model_method(const std::string& text) {
    const json j = parse_envelope(text);
    const std::string method = j.value("method", "");
    if (method != "rstr" && method != "baseline") throw DataError("model: unknown method '" + method + "'");
    return method;
}

RstrModel deserialize_rstr_model(const std::string& text, const BlockedFeatureSet& source,
                                 const BlockedFeatureSet& target) {
    const json j = parse_envelope(text);
    if (j.value("method", "") != "rstr") throw DataError("model: artifact is not an RSTR model");
    RstrModel model;
    try {
        model.kernel = kernel_from_json(j.at("kernel"));
        model.class_names = j.at("class_names").get<std::vector<std::string>>();
        model.P = matrix_from_json(j.at("P"));
        const auto w = j.at("w").get<std::vector<double>>();
        model.w = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
        model.objective_trace = j.at("objective_trace").get<std::vector<double>>();
        model.converged = j.at("converged").get<bool>();
    } catch (const json::exception& e) {
        throw DataError(std::string("model: malformed RSTR artifact: ") + e.what());
    }
    model.train_source = std::make_shared<const BlockedFeatureSet>(source.with_tag(DomainTag::source));
    model.train_target = std::make_shared<const BlockedFeatureSet>(target.with_tag(DomainTag::target));
    const std::string expected = j.value("training_hash", "");
    if (hex64(model.training_hash()) != expected) {
        throw DataError("model: training features do not match the artifact (hash " +
                        hex64(model.training_hash()) + " vs " + expected + ")");
    }
    if (static_cast<std::size_t>(model.P.rows()) != source.size() + target.size() ||
        static_cast<std::size_t>(model.w.size()) != source.num_blocks() ||
        static_cast<std::size_t>(model.P.cols()) != model.class_names.size()) {
        throw DataError("model: artifact dimensions are inconsistent with the training features");
    }
    return model;
}

BaselineModel deserialize_baseline_model(const std::string& text) {
    const json j = parse_envelope(text);
    if (j.value("method", "") != "baseline") throw DataError("model: artifact is not a baseline model");
    BaselineModel model;
    try {
        model.class_names = j.at("class_names").get<std::vector<std::string>>();
        model.ridge = j.at("ridge").get<double>();
        model.num_blocks = j.value("num_blocks", std::size_t{0});
        model.C = matrix_from_json(j.at("C"));
    } catch (const json::exception& e) {
        throw DataError(std::string("model: malformed baseline artifact: ") + e.what());
    }
    if (static_cast<std::size_t>(model.C.cols()) != model.class_names.size()) {
        throw DataError("model: baseline coefficient columns do not match class count");
    }
    return model;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw DataError("failed writing '" + path + "'");
}

}  // namespace rstr
