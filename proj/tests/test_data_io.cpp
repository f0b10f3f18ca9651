#include "doctest.h"

#include "rstr/data_io.hpp"
#include "rstr/error.hpp"
#include "rstr/synthetic.hpp"
#include "rstr/verification/oracles.hpp"
#include "test_util.hpp"

#include <filesystem>
#include <sstream>

using namespace rstr;

namespace {

std::string error_of(const std::string& text) {
    std::istringstream in(text);
    try {
        read_features(in, DomainTag::source, "f");
    } catch (const DataError& e) {
        return e.what();
    }
    return "";
}

std::filesystem::path temp_dir() {
    auto p = std::filesystem::temp_directory_path() / "rstr_test_data_io";
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

TEST_SUITE("data-io") {

TEST_CASE("round trip through a file") {
    std::mt19937_64 rng(1);
    const auto set = test::random_set(rng, 3, 4, 7, DomainTag::source);
    const LabelMatrix labels = test::cyclic_labels(7);
    const auto path = (temp_dir() / "round.features").string();
    save_features(path, set, &labels, labels.class_names());
    DatasetManifest m;
    m.dataset_id = "X";
    m.feature_file = path;
    m.K = 3;
    m.d = 4;
    m.N = 7;
    m.class_counts = {{"c0", 3}, {"c1", 2}, {"c2", 2}};
    const LoadedFeatures back = load_features(m, DomainTag::source);
    CHECK(back.features == set);
    REQUIRE(back.labels.has_value());
    CHECK(*back.labels == labels);

    SUBCASE("manifest cross-checks") {
        DatasetManifest bad = m;
        bad.K = 2;
        CHECK_THROWS_AS(load_features(bad, DomainTag::source), DataError);
        bad = m;
        bad.class_counts = {{"c0", 4}};
        CHECK_THROWS_AS(load_features(bad, DomainTag::source), DataError);
        bad = m;
        bad.feature_file = (temp_dir() / "missing.features").string();
        CHECK_THROWS_AS(load_features(bad, DomainTag::source), DataError);
    }
}

TEST_CASE("unlabeled files") {
    std::mt19937_64 rng(2);
    const auto set = test::random_set(rng, 2, 2, 3, DomainTag::target);
    std::ostringstream out;
    write_features(out, set, nullptr);
    std::istringstream in(out.str());
    const LoadedFeatures back = read_features(in, DomainTag::target);
    CHECK(back.features == set);
    CHECK_FALSE(back.labels.has_value());
}

TEST_CASE("malformed files name the problem") {
    CHECK(error_of("#cdmer-features v1 K=1 d=1 N=0 classes=a,b\n").find("empty dataset") != std::string::npos);
    const std::string row = error_of("#cdmer-features v1 K=2 d=3 N=2 classes=a,b\na 1 2 3 4 5 6\nb 1 2 3 4 5\n");
    CHECK(row.find("row 2") != std::string::npos);
    CHECK(row.find("expected") != std::string::npos);
    CHECK(error_of("").find("missing header") != std::string::npos);
    CHECK(error_of("#cdmer-features v1 K=x d=1 N=1 classes=a,b\n1\n").find("malformed header") != std::string::npos);
    CHECK(error_of("#cdmer-features v1 K=1 d=1 N=1 classes=a,a\na 1\n").find("duplicate") != std::string::npos);
    CHECK(error_of("#cdmer-features v1 K=1 d=1 N=1 classes=a,b\na nan\n").find("non-finite") != std::string::npos);
    CHECK(error_of("#cdmer-features v1 K=1 d=1 N=1 classes=a,b\na 1e999\n") != "");
    CHECK(error_of("#cdmer-features v1 K=1 d=1 N=2 classes=a,b\n1\na 2\n").find("row 2") != std::string::npos);
    CHECK(error_of("#cdmer-features v1 K=1 d=1 N=1 classes=a\na 1\n").find("two classes") != std::string::npos);
}

TEST_CASE("builtin protocol snapshot") {
    const auto& tasks = builtin_protocol();
    const auto& want = oracle::published_protocol();
    REQUIRE(tasks.size() == 12);
    REQUIRE(want.size() == 12);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        CHECK(to_string(tasks[i].type) == want[i].type);
        CHECK(tasks[i].task_id + ": " + tasks[i].source_id + " -> " + tasks[i].target_id == want[i].task);
        CHECK(dataset_display_name(tasks[i].source_id) == want[i].source_db);
        CHECK(dataset_display_name(tasks[i].target_id) == want[i].target_db);
        if (tasks[i].type == TaskType::type_ii) CHECK((tasks[i].source_id == "C" || tasks[i].target_id == "C"));
    }
    CHECK(tasks[0].source_id == "H");
    CHECK(tasks[0].target_id == "V");
    CHECK_NOTHROW(validate_protocol(tasks));
    std::vector<TaskSpec> dup = {tasks[0], tasks[0]};
    CHECK_THROWS_AS(validate_protocol(dup), ConfigError);
    CHECK_THROWS_AS(validate_protocol({{"x", "H", "H", TaskType::type_i}}), ConfigError);
}

TEST_CASE("builtin class constitutions") {
    std::map<std::string, std::size_t> total;
    for (const auto& m : builtin_manifests()) {
        std::size_t n = 0;
        for (const auto& [name, count] : m.class_counts) n += count;
        total[m.dataset_id] = n;
        CHECK(m.N == n);
    }
    CHECK(total["H"] == 164);
    CHECK(total["V"] == 71);
    CHECK(total["N"] == 71);
    CHECK(total["C"] == 130);
}

}

TEST_SUITE("synthetic") {

TEST_CASE("determinism") {
    SyntheticShiftConfig cfg;
    cfg.seed = 42;
    const SyntheticTask a = generate_synthetic(cfg);
    const SyntheticTask b = generate_synthetic(cfg);
    CHECK(a.source.features == b.source.features);
    CHECK(a.target.features == b.target.features);
    CHECK(a.source.labels == b.source.labels);
    cfg.seed = 43;
    CHECK_FALSE(generate_synthetic(cfg).source.features == a.source.features);
    CHECK(generate_standins(cfg).at("H").features == generate_standins(cfg).at("H").features);
}

TEST_CASE("rng") {
    SynthRng r(1), s(1);
    for (int i = 0; i < 100; ++i) {
        const double u = r.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        CHECK(u == s.uniform());
    }
    double sum = 0.0, sq = 0.0;
    SynthRng n(9);
    for (int i = 0; i < 20000; ++i) {
        const double x = n.normal();
        sum += x;
        sq += x * x;
    }
    CHECK(std::abs(sum / 20000) < 0.05);
    CHECK(std::abs(sq / 20000 - 1.0) < 0.05);
    CHECK(n.unit_vector(5).norm() == doctest::Approx(1.0));
}

TEST_CASE("no shift means matched distributions") {
    SyntheticShiftConfig cfg;
    cfg.shift_magnitude = 0.0;
    cfg.n_source = cfg.n_target = 2000;
    const SyntheticTask t = generate_synthetic(cfg);
    for (std::size_t i = 0; i < cfg.K; ++i) {
        const double gap = (t.source.features.block(i).rowwise().mean() - t.target.features.block(i).rowwise().mean()).norm();
        CHECK(gap < 0.1 * cfg.class_separation);
    }
}

TEST_CASE("class means sit class_separation apart") {
    SyntheticShiftConfig cfg;
    cfg.noise_std = 0.0;
    cfg.shift_magnitude = 0.0;
    cfg.n_source = cfg.n_target = 3;
    const SyntheticTask t = generate_synthetic(cfg);
    const Matrix& b = t.source.features.block(0);
    CHECK((b.col(0) - b.col(1)).norm() == doctest::Approx(cfg.class_separation));
    CHECK((b.col(1) - b.col(2)).norm() == doctest::Approx(cfg.class_separation));
    CHECK(t.source.features.block(3).norm() == 0.0);
}

TEST_CASE("no separation is chance level") {
    // Scored on fresh source-distribution samples so the check does not just
    // measure ridge overfitting.
    SyntheticShiftConfig cfg;
    cfg.class_separation = 0.0;
    cfg.shift_magnitude = 0.0;
    cfg.n_source = cfg.n_target = 300;
    cfg.K = 2;
    cfg.d = 2;
    cfg.informative_blocks = {0};
    const SyntheticTask t = generate_synthetic(cfg);
    const std::size_t correct = [&] {
        Matrix X = t.source.features.stacked();
        Matrix L = t.source.labels.onehot();
        Matrix C = (X * X.transpose() + 1e-6 * Matrix::Identity(X.rows(), X.rows())).ldlt().solve(X * L.transpose());
        Matrix s = C.transpose() * t.target.features.stacked();
        std::size_t ok = 0;
        for (Eigen::Index j = 0; j < s.cols(); ++j)
            ok += argmax_lowest(s.col(j)) == t.target.labels.indices()[static_cast<std::size_t>(j)];
        return ok;
    }();
    CHECK(std::abs(static_cast<double>(correct) / 300.0 - 1.0 / 3.0) <= 0.1);
}

TEST_CASE("stand-ins follow the builtin constitutions") {
    const auto sets = generate_standins(SyntheticShiftConfig{});
    for (const auto& m : builtin_manifests()) {
        const auto& s = sets.at(m.dataset_id);
        CHECK(s.features.size() == m.N);
        std::vector<std::size_t> counts(s.labels.num_classes(), 0);
        for (auto y : s.labels.indices()) ++counts[y];
        for (std::size_t k = 0; k < m.class_counts.size(); ++k) {
            CHECK(s.labels.class_names()[k] == m.class_counts[k].first);
            CHECK(counts[k] == m.class_counts[k].second);
        }
    }
}

TEST_CASE("config validation") {
    SyntheticShiftConfig cfg;
    cfg.informative_blocks = {9};
    CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
    cfg = {};
    cfg.classes = 1;
    CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
    cfg = {};
    CHECK(cfg.noise_blocks() == std::vector<std::size_t>{2, 3, 4, 5});
}

}
