#include "rstr/verification/acceptance.hpp"

#include "rstr/baseline.hpp"
#include "rstr/data_io.hpp"
#include "rstr/error.hpp"
#include "rstr/harness.hpp"
#include "rstr/metrics.hpp"
#include "rstr/model.hpp"
#include "rstr/optimizer.hpp"
#include "rstr/parallel.hpp"
#include "rstr/synthetic.hpp"
#include "rstr/verification/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <regex>
#include <sstream>

namespace rstr::verify {

namespace {

// Tolerances and workload sizes.
constexpr int kSoftThresholdPairs = 10000;
constexpr int kQStepInstances = 20;
constexpr double kQStepTol = 1e-6;
constexpr int kIalmInstances = 10;
constexpr double kIalmTol = 1e-5;
constexpr int kLassoInstances = 50;
constexpr double kLassoKktTol = 1e-5;
constexpr int kLassoGridInstances = 10;
constexpr double kLassoGridTol = 1e-6;
constexpr int kSimplexVectors = 1000;
constexpr int kSimplexGridVectors = 50;
constexpr double kSimplexTol = 1e-12;
constexpr double kSimplexGridTol = 2e-3;
constexpr int kMonotoneRuns = 5;
constexpr double kMonotoneSlack = 1e-8;
constexpr int kBenefitSeeds = 20;
constexpr double kBenefitMargin = 0.05;
constexpr int kSelectionMinSeeds = 15;
constexpr double kNoShiftMmdTol = 1e-8;
constexpr double kNoShiftAccuracyPoints = 5.0;
constexpr int kMetricFixtures = 100;

// Settings of the synthetic end-to-end checks. gamma = 10 sits above the
// published tau grid; at this data scale the grid values leave the mean-gap
// term too weak to matter.
RstrHyperparams synthetic_hyperparams(double lambda) {
    RstrHyperparams hp;
    hp.lambda = lambda;
    hp.mu = 1.0;
    hp.gamma = 10.0;
    return hp;
}

std::mt19937_64 make_rng(const Options& o, std::uint64_t salt) {
    std::seed_seq seq{static_cast<std::uint32_t>(o.seed), static_cast<std::uint32_t>(o.seed >> 32),
                      static_cast<std::uint32_t>(salt)};
    return std::mt19937_64(seq);
}

Matrix gaussian_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double sd = 1.0) {
    std::normal_distribution<double> nd(0.0, sd);
    Matrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = nd(rng);
    return m;
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double inf_norm(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

std::vector<std::size_t> shuffled_labels(std::mt19937_64& rng, std::size_t n, std::size_t c) {
    std::vector<std::size_t> y(n);
    for (std::size_t j = 0; j < n; ++j) y[j] = j % c;
    std::shuffle(y.begin(), y.end(), rng);
    return y;
}

CheckResult make(bool ok, std::string detail) {
    CheckResult r;
    r.passed = ok;
    r.detail = std::move(detail);
    return r;
}

// ---------------------------------------------------------------------------

CheckResult soft_threshold_check(const Options& o) {
    auto rng = make_rng(o, 1);
    std::uniform_real_distribution<double> ua(-5.0, 5.0);
    std::uniform_real_distribution<double> uz(0.0, 3.0);
    int mismatches = 0;
    Matrix A(100, 100);
    for (int i = 0; i < kSoftThresholdPairs; ++i) {
        double a = ua(rng);
        const double z = uz(rng);
        // Every tenth pair sits exactly on a kink.
        if (i % 10 == 0) a = (i % 20 == 0) ? z : -z;
        if (soft_threshold(a, z) != oracle::soft_threshold(a, z)) ++mismatches;
        A(i % 100, i / 100) = a;
    }
    const double z = 1.25;
    const Matrix S = soft_threshold(A, z);
    for (Eigen::Index j = 0; j < A.cols(); ++j)
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            if (S(i, j) != oracle::soft_threshold(A(i, j), z)) ++mismatches;
    return make(mismatches == 0, std::to_string(mismatches) + " mismatches over " +
                                     std::to_string(kSoftThresholdPairs) + " pairs + 10000 matrix entries");
}

PSubproblem random_subproblem(std::mt19937_64& rng, double mu, double gamma) {
    const std::size_t ns = 6, nt = 6, c = 3, K = 3, d = 4;
    std::vector<Matrix> sb, tb;
    for (std::size_t i = 0; i < K; ++i) {
        sb.push_back(gaussian_matrix(rng, d, ns));
        tb.push_back(gaussian_matrix(rng, d, nt) + Matrix::Constant(d, nt, 0.5));
    }
    const BlockedFeatureSet src(sb, DomainTag::source);
    const BlockedFeatureSet tgt(tb, DomainTag::target);
    const KernelSet ks = build_kernel_set(src, tgt, KernelConfig::gaussian());
    std::uniform_real_distribution<double> uw(0.1, 1.0);
    Vector w(K);
    for (std::size_t i = 0; i < K; ++i) w(static_cast<Eigen::Index>(i)) = uw(rng);
    const LabelMatrix L(shuffled_labels(rng, ns, c), {"a", "b", "c"});
    return make_p_subproblem(ks, w, L.onehot(), mu, gamma);
}

CheckResult q_step_check(const Options& o) {
    auto rng = make_rng(o, 2);
    std::uniform_real_distribution<double> ug(0.0, 2.0);
    std::uniform_real_distribution<double> uk(0.05, 5.0);
    double worst = 0.0;
    for (int t = 0; t < kQStepInstances; ++t) {
        const PSubproblem p = random_subproblem(rng, 0.5, ug(rng));
        const Eigen::Index n = p.basis_size(), c = p.num_classes();
        const Matrix P = gaussian_matrix(rng, n, c);
        const Matrix T = gaussian_matrix(rng, n, c);
        const double kappa = uk(rng);
        const Matrix Q = solve_q(p, P, T, kappa);
        const Matrix g = oracle::q_step_gradient(p.Ks_tilde, p.kst_tilde, p.labels, p.gamma, P, T, kappa, Q);
        const Matrix probe = gaussian_matrix(rng, n, c);
        const Matrix g0 = oracle::q_step_gradient(p.Ks_tilde, p.kst_tilde, p.labels, p.gamma, P, T, kappa, probe);
        worst = std::max(worst, inf_norm(g) / inf_norm(g0));
    }
    return make(worst <= kQStepTol, "max |grad at Q| / |grad at random point| = " + fmt("%.3g", worst));
}

CheckResult ialm_check(const Options& o) {
    auto rng = make_rng(o, 3);
    double worst = 0.0;
    int nonconverged = 0;
    for (int t = 0; t < kIalmInstances; ++t) {
        PSubproblem p;
        p.Ks_tilde = gaussian_matrix(rng, 12, 6);
        p.kst_tilde = Vector::Zero(12);
        p.labels = LabelMatrix(shuffled_labels(rng, 6, 3), {"a", "b", "c"}).onehot();
        p.mu = 0.0;
        p.gamma = 0.0;
        const PSolveResult r = solve_p_subproblem(p, IalmParams{}, Matrix::Zero(12, 3));
        if (!r.converged) ++nonconverged;
        const Matrix ref = oracle::least_squares_coefficients(p.Ks_tilde, p.labels);
        worst = std::max(worst, inf_norm(r.P - ref));
    }
    return make(worst <= kIalmTol && nonconverged == 0,
                "max |P - P_ls| = " + fmt("%.3g", worst) + ", nonconverged " + std::to_string(nonconverged));
}

CheckResult lasso_check(const Options& o) {
    auto rng = make_rng(o, 4);
    std::uniform_int_distribution<int> uk(1, 20);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double worst_kkt = 0.0;
    for (int t = 0; t < kLassoInstances; ++t) {
        const int k = uk(rng);
        const int m = std::max(2, static_cast<int>(std::lround((0.5 + 1.5 * u01(rng)) * k)));
        LassoProblem lp;
        lp.D = gaussian_matrix(rng, m, k);
        Vector wt = gaussian_matrix(rng, k, 1).cwiseAbs();
        lp.y = lp.D * wt + gaussian_matrix(rng, m, 1, 0.3);
        lp.lambda = u01(rng) * (2.0 * lp.D.transpose() * lp.y).cwiseAbs().maxCoeff();
        const LassoResult r = solve_nonneg_lasso(lp, Vector::Zero(k));
        worst_kkt = std::max(worst_kkt, oracle::lasso_kkt(lp.y, lp.D, lp.lambda, r.w));
    }
    // Two-variable instances built so the minimiser lies exactly on the grid.
    double worst_gap = 0.0;
    std::uniform_int_distribution<int> ucell(0, 5000);
    for (int t = 0; t < kLassoGridInstances; ++t) {
        LassoProblem lp;
        lp.D = gaussian_matrix(rng, 6, 2, 0.5);
        lp.lambda = 0.2 + u01(rng);
        Vector ws(2);
        ws << 1e-3 * ucell(rng), (t % 3 == 0) ? 0.0 : 1e-3 * ucell(rng);
        // Optimality holds at ws when D'r = v with v_i = lambda/2 on the active
        // set and v_i <= lambda/2 elsewhere, for r = y - D ws.
        Vector v(2);
        for (int i = 0; i < 2; ++i) v(i) = ws(i) > 0.0 ? lp.lambda / 2.0 : lp.lambda / 2.0 - 0.3;
        const Matrix G = lp.D.transpose() * lp.D;
        const Vector r = lp.D * G.ldlt().solve(v);
        lp.y = lp.D * ws + r;
        const LassoResult res = solve_nonneg_lasso(lp, Vector::Zero(2));
        const auto grid = oracle::lasso_grid_search(lp.y, lp.D, lp.lambda, 0.0, 5.0, 1e-3);
        const double f = oracle::lasso_objective(lp.y, lp.D, lp.lambda, res.w);
        worst_gap = std::max(worst_gap, std::abs(f - grid.value));
    }
    return make(worst_kkt <= kLassoKktTol && worst_gap <= kLassoGridTol,
                "max KKT = " + fmt("%.3g", worst_kkt) + ", max |f - f_grid| = " + fmt("%.3g", worst_gap));
}

CheckResult simplex_check(const Options& o) {
    auto rng = make_rng(o, 5);
    std::uniform_int_distribution<int> uc(2, 10);
    std::uniform_int_distribution<int> us(0, 2);
    const double scales[] = {0.1, 1.0, 10.0};
    int failures = 0;
    double worst = 0.0;
    for (int t = 0; t < kSimplexVectors; ++t) {
        const int c = uc(rng);
        const Vector v = gaussian_matrix(rng, c, 1, scales[us(rng)]);
        const Vector l = project_simplex(v);
        const double neg = std::max(0.0, -l.minCoeff());
        const double sum_err = std::abs(l.sum() - 1.0);
        const double idem = inf_norm(project_simplex(l) - l);
        std::vector<int> perm(static_cast<std::size_t>(c));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Vector pv(c), pl(c);
        for (int i = 0; i < c; ++i) {
            pv(i) = v(perm[static_cast<std::size_t>(i)]);
            pl(i) = l(perm[static_cast<std::size_t>(i)]);
        }
        const double equiv = inf_norm(project_simplex(pv) - pl);
        const bool argmax_ok = argmax_lowest(l) == argmax_lowest(v);
        worst = std::max({worst, sum_err, idem, equiv});
        if (neg > 0.0 || sum_err > kSimplexTol || idem > kSimplexTol || equiv > kSimplexTol || !argmax_ok)
            ++failures;
    }
    double grid_worst = 0.0;
    for (int t = 0; t < kSimplexGridVectors; ++t) {
        const Vector v = gaussian_matrix(rng, 3, 1, 0.7);
        grid_worst = std::max(grid_worst, inf_norm(project_simplex(v) - oracle::simplex_grid_search(v, 1e-3)));
    }
    return make(failures == 0 && grid_worst <= kSimplexGridTol,
                std::to_string(failures) + " property failures, max deviation " + fmt("%.3g", worst) +
                    ", grid gap " + fmt("%.3g", grid_worst));
}

CheckResult monotonicity_check(const Options& o) {
    int bad = 0;
    double worst_rise = 0.0;
    std::size_t max_iters = 0;
    std::vector<std::string> notes(kMonotoneRuns);
    std::vector<double> rises(kMonotoneRuns, 0.0);
    std::vector<std::size_t> iters(kMonotoneRuns, 0);
    std::vector<int> ok(kMonotoneRuns, 0);
    parallel_for(kMonotoneRuns, o.jobs, [&](std::size_t s) {
        SyntheticShiftConfig cfg;
        cfg.seed = o.seed + s;
        cfg.n_source = cfg.n_target = 60;
        const SyntheticTask task = generate_synthetic(cfg);
        const RstrModel m = train(task.source.features, task.source.labels, task.target.features,
                                  synthetic_hyperparams(1.0));
        double rise = 0.0;
        // Interleave the half-step values: after P-step k, then after outer iteration k.
        for (std::size_t k = 0; k < m.objective_trace.size(); ++k) {
            if (k > 0) rise = std::max(rise, m.p_step_trace[k] - m.objective_trace[k - 1]);
            rise = std::max(rise, m.objective_trace[k] - m.p_step_trace[k]);
        }
        rises[s] = rise;
        iters[s] = m.objective_trace.size();
        ok[s] = m.converged && rise <= kMonotoneSlack && iters[s] <= 50;
    });
    for (int s = 0; s < kMonotoneRuns; ++s) {
        bad += !ok[static_cast<std::size_t>(s)];
        worst_rise = std::max(worst_rise, rises[static_cast<std::size_t>(s)]);
        max_iters = std::max(max_iters, iters[static_cast<std::size_t>(s)]);
    }
    return make(bad == 0, std::to_string(kMonotoneRuns - bad) + "/" + std::to_string(kMonotoneRuns) +
                              " runs ok, max rise " + fmt("%.3g", worst_rise) + ", max outer iterations " +
                              std::to_string(max_iters));
}

struct BenefitRun {
    double baseline_f1 = 0.0;
    double rstr_f1 = 0.0;
    double informative_w = 0.0;
    double noise_w = 0.0;
};

std::vector<BenefitRun> benefit_runs(const Options& o) {
    std::vector<BenefitRun> runs(kBenefitSeeds);
    const std::vector<double> lambdas = SweepConfig::defaults().lambda_grid;
    parallel_for(kBenefitSeeds, o.jobs, [&](std::size_t s) {
        SyntheticShiftConfig cfg;
        cfg.seed = o.seed + 1000 + s;
        const SyntheticTask task = generate_synthetic(cfg);
        const auto& truth = task.target.labels.indices();
        const std::size_t c = cfg.classes;
        BenefitRun run;
        const BaselineModel b = train_baseline(task.source.features, task.source.labels);
        run.baseline_f1 = mean_f1(confusion(predict_baseline(b, task.target.features).hard_labels, truth, c));
        std::vector<std::pair<double, double>> scores;
        std::vector<Vector> weights;
        for (double lambda : lambdas) {
            const RstrModel m = train(task.source.features, task.source.labels, task.target.features,
                                      synthetic_hyperparams(lambda));
            const ConfusionMatrix cm = confusion(predict(m, task.target.features).hard_labels, truth, c);
            scores.emplace_back(mean_f1(cm), accuracy(cm));
            weights.push_back(m.w);
        }
        const std::size_t best = select_best(scores);
        run.rstr_f1 = scores[best].first;
        const Vector& w = weights[best];
        for (std::size_t i : cfg.informative_blocks) run.informative_w += w(static_cast<Eigen::Index>(i));
        run.informative_w /= static_cast<double>(cfg.informative_blocks.size());
        const auto noise = cfg.noise_blocks();
        for (std::size_t i : noise) run.noise_w += w(static_cast<Eigen::Index>(i));
        run.noise_w /= static_cast<double>(noise.size());
        runs[s] = run;
    });
    return runs;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

CheckResult benefit_check(const Options& o) {
    const auto runs = benefit_runs(o);
    std::vector<double> gaps, rs, bs;
    int selective = 0;
    for (const auto& r : runs) {
        gaps.push_back(r.rstr_f1 - r.baseline_f1);
        rs.push_back(r.rstr_f1);
        bs.push_back(r.baseline_f1);
        selective += r.informative_w > r.noise_w;
    }
    const double med_gap = median(gaps);
    const double med_diff = median(rs) - median(bs);
    CheckResult res = make(med_gap > 0.0 && med_diff >= kBenefitMargin,
                           "median gap " + fmt("%.4f", med_gap) + ", median RSTR " + fmt("%.4f", median(rs)) +
                               " vs baseline " + fmt("%.4f", median(bs)) + " (diff " + fmt("%.4f", med_diff) +
                               ")");
    // Region selection reuses these runs; stash the count in the detail tail.
    res.detail += "|" + std::to_string(selective);
    return res;
}

CheckResult no_shift_check(const Options& o) {
    SyntheticShiftConfig cfg;
    cfg.seed = o.seed + 2000;
    cfg.shift_magnitude = 0.0;
    const SyntheticTask task = generate_synthetic(cfg);
    const BlockedFeatureSet target = task.source.features.with_tag(DomainTag::target);
    const auto& truth = task.source.labels.indices();
    const RstrModel m = train(task.source.features, task.source.labels, target, synthetic_hyperparams(1.0));
    const KernelSet ks = build_kernel_set(*m.train_source, *m.train_target, m.kernel);
    const double rm = relaxed_mmd(m.P, m.w, ks);
    const double bound = kNoShiftMmdTol * task.source.labels.onehot().squaredNorm();
    const double acc_r = accuracy(confusion(predict(m, target).hard_labels, truth, cfg.classes));
    const BaselineModel b = train_baseline(task.source.features, task.source.labels);
    const double acc_b = accuracy(confusion(predict_baseline(b, target).hard_labels, truth, cfg.classes));

    // Distribution-level diagnostic: independent draws without a shift.
    SyntheticShiftConfig big = cfg;
    big.n_source = big.n_target = 2000;
    const SyntheticTask large = generate_synthetic(big);
    double worst_mmd = 0.0;
    for (std::size_t i = 0; i < big.K; ++i)
        worst_mmd = std::max(worst_mmd, mmd(large.source.features.block(i), large.target.features.block(i),
                                            KernelConfig::linear()));
    const bool ok = rm <= bound && std::abs(acc_r - acc_b) <= kNoShiftAccuracyPoints &&
                    worst_mmd < 0.1 * cfg.class_separation;
    return make(ok, "relaxed mmd " + fmt("%.3g", rm) + " (bound " + fmt("%.3g", bound) + "), accuracy " +
                        fmt("%.2f", acc_r) + " vs baseline " + fmt("%.2f", acc_b) + ", max block mmd " +
                        fmt("%.4f", worst_mmd));
}

CheckResult metrics_check(const Options& o) {
    auto rng = make_rng(o, 10);
    std::uniform_int_distribution<int> uc(2, 6);
    std::uniform_int_distribution<int> un(1, 200);
    int mismatches = 0;
    for (int t = 0; t < kMetricFixtures; ++t) {
        const std::size_t c = static_cast<std::size_t>(uc(rng));
        const int n = un(rng);
        std::uniform_int_distribution<std::size_t> ul(0, c - 1);
        std::vector<std::size_t> p(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            y[static_cast<std::size_t>(j)] = ul(rng);
            // Correct about half the time so every regime appears.
            p[static_cast<std::size_t>(j)] = (ul(rng) % 2 == 0) ? y[static_cast<std::size_t>(j)] : ul(rng);
        }
        const ConfusionMatrix cm = confusion(p, y, c);
        if (mean_f1(cm) != oracle::mean_f1(p, y, c)) ++mismatches;
        if (accuracy(cm) != oracle::accuracy(p, y)) ++mismatches;
    }
    // [[5,5],[5,5]]: p = r = 0.5 for both classes.
    ConfusionMatrix even{{{5, 5}, {5, 5}}};
    const bool even_ok = std::abs(mean_f1(even) - 0.5) <= 1e-15 && accuracy(even) == 50.0;
    // Class 2 is neither predicted nor present: F1 = (0.8 + 0.8 + 0) / 3 = 8/15.
    ConfusionMatrix absent{{{4, 1, 0}, {1, 4, 0}, {0, 0, 0}}};
    const bool absent_ok = std::abs(mean_f1(absent) - 8.0 / 15.0) <= 1e-15 && accuracy(absent) == 80.0;
    ConfusionMatrix diag{{{3, 0, 0}, {0, 2, 0}, {0, 0, 5}}};
    const bool diag_ok = mean_f1(diag) == 1.0 && accuracy(diag) == 100.0;
    return make(mismatches == 0 && even_ok && absent_ok && diag_ok,
                std::to_string(mismatches) + " mismatches over " + std::to_string(kMetricFixtures) +
                    " fixtures; hand fixtures " + (even_ok && absent_ok && diag_ok ? "ok" : "FAILED"));
}

CheckResult protocol_check(const Options& o) {
    const auto& want = oracle::published_protocol();
    const auto& got = builtin_protocol();
    bool table_ok = want.size() == got.size();
    for (std::size_t i = 0; table_ok && i < got.size(); ++i) {
        const auto& t = got[i];
        table_ok = to_string(t.type) == want[i].type &&
                   t.task_id + ": " + t.source_id + " -> " + t.target_id == want[i].task &&
                   dataset_display_name(t.source_id) == want[i].source_db &&
                   dataset_display_name(t.target_id) == want[i].target_db;
    }

    const std::regex cell_re(R"(^\d\.\d{4} / \d{1,3}\.\d{2}$)");
    const bool cells_ok = format_cell(0.73812, 73.98) == "0.7381 / 73.98" &&
                          format_cell(1.0, 100.0) == "1.0000 / 100.00" &&
                          format_cell(0.0, 5.0) == "0.0000 / 5.00";

    RunConfig cfg;
    cfg.synthetic = SyntheticShiftConfig{};
    cfg.synthetic->seed = o.seed;
    cfg.seed = o.seed;
    cfg.hyperparams = synthetic_hyperparams(1.0);
    cfg.jobs = o.jobs;
    const ProtocolReport a = run_protocol(cfg);
    const ProtocolReport b = run_protocol(cfg);
    const std::string tsv_a = render_report(a, ReportFormat::tsv);
    const std::string tsv_b = render_report(b, ReportFormat::tsv);
    const std::string json_a = render_report(a, ReportFormat::json);
    const std::string json_b = render_report(b, ReportFormat::json);
    const bool rerun_ok = tsv_a == tsv_b && json_a == json_b;
    bool report_cells_ok = !a.partial && a.results.size() == 24;
    for (const auto& r : a.results) report_cells_ok = report_cells_ok && std::regex_match(format_cell(r.mean_f1, r.accuracy), cell_re);
    for (const auto& avg : averages(a)) report_cells_ok = report_cells_ok && std::regex_match(format_cell(avg.mean_f1, avg.accuracy), cell_re);

    std::string detail = std::string("table ") + (table_ok ? "ok" : "MISMATCH") + ", cells " +
                         (cells_ok && report_cells_ok ? "ok" : "BAD") + ", rerun " +
                         (rerun_ok ? "byte-identical" : "DIFFERS");
    for (const auto& avg : averages(a)) detail += ", " + avg.method + " avg " + format_cell(avg.mean_f1, avg.accuracy);
    return make(table_ok && cells_ok && report_cells_ok && rerun_ok, detail);
}

struct BadFixture {
    const char* label;
    const char* text;
    const char* expect;
};

CheckResult loader_check(const Options& o) {
    const BadFixture corpus[] = {
        {"empty file", "", "missing header"},
        {"wrong magic", "#features v2 K=1 d=2 N=1 classes=a,b\n1 2\n", "malformed header"},
        {"zero samples", "#cdmer-features v1 K=1 d=2 N=0 classes=a,b\n", "empty dataset"},
        {"short row", "#cdmer-features v1 K=1 d=2 N=2 classes=a,b\na 1 2\nb 1\n", "row 2"},
        {"bad number", "#cdmer-features v1 K=1 d=2 N=1 classes=a,b\na 1 x\n", "cannot parse"},
        {"non-finite", "#cdmer-features v1 K=1 d=2 N=1 classes=a,b\na 1 inf\n", "non-finite"},
        {"unknown class", "#cdmer-features v1 K=1 d=2 N=1 classes=a,b\nz 1 2\n", "unknown class"},
        {"mixed labels", "#cdmer-features v1 K=1 d=2 N=2 classes=a,b\na 1 2\n3 4\n", "row 2"},
        {"missing rows", "#cdmer-features v1 K=1 d=2 N=3 classes=a,b\na 1 2\n", "N=3"},
        {"extra rows", "#cdmer-features v1 K=1 d=2 N=1 classes=a,b\na 1 2\nb 3 4\n", "more than"},
    };
    int passed = 0, total = 0;
    std::string first_failure;
    for (const auto& f : corpus) {
        ++total;
        std::istringstream in(f.text);
        try {
            read_features(in, DomainTag::source, f.label);
            if (first_failure.empty()) first_failure = std::string(f.label) + ": accepted";
        } catch (const DataError& e) {
            if (std::string(e.what()).find(f.expect) != std::string::npos) ++passed;
            else if (first_failure.empty()) first_failure = std::string(f.label) + ": " + e.what();
        }
    }
    std::string detail = std::to_string(passed) + "/" + std::to_string(total) + " malformed inputs rejected";
    if (!first_failure.empty()) detail += " (" + first_failure + ")";
    if (o.fixture) {
        std::ifstream in(*o.fixture);
        if (!in) {
            detail += "; fixture " + *o.fixture + ": cannot open";
        } else {
            try {
                const LoadedFeatures lf = read_features(in, DomainTag::source, *o.fixture);
                detail += "; fixture loaded: N=" + std::to_string(lf.features.size()) + " K=" +
                          std::to_string(lf.features.num_blocks()) + " d=" + std::to_string(lf.features.block_dim());
            } catch (const Error& e) {
                detail += "; fixture rejected: " + std::string(e.what());
            }
        }
    }
    return make(passed == total, detail);
}

}  // namespace

const std::vector<Check>& checks() {
    static const std::vector<Check> all = [] {
        std::vector<Check> v = {
            {"C1", "soft-threshold oracle", 1.0, soft_threshold_check},
            {"C2", "q-step stationarity", 5.0, q_step_check},
            {"C3", "ialm vs least squares", 10.0, ialm_check},
            {"C4", "non-negative lasso kkt", 30.0, lasso_check},
            {"C5", "simplex projection", 5.0, simplex_check},
            {"C6", "block-coordinate monotonicity", 60.0, monotonicity_check},
            {"C7", "adaptation benefit", 600.0, {}},
            {"C8", "region selection", 0.0, {}},
            {"C9", "no-shift sanity", 60.0, no_shift_check},
            {"C10", "metrics oracle", 1.0, metrics_check},
            {"C11", "protocol fidelity", 305.0, protocol_check},
            {"L1", "loader validation", 5.0, loader_check},
        };
        return v;
    }();
    return all;
}

CheckResult run_check(const Check& check, const Options& options) {
    CheckResult r;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        r = check.run(options);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.id = check.id;
    r.name = check.name;
    r.budget_seconds = check.budget_seconds;
    if (r.seconds > r.budget_seconds && r.budget_seconds > 0.0) {
        r.passed = false;
        r.detail += "; over the runtime budget";
    }
    return r;
}

namespace {

// C7 and C8 share one set of training runs.
std::pair<CheckResult, CheckResult> run_benefit_pair(const Options& options) {
    const auto& all = checks();
    const Check& c7 = all[6];
    Check timed = c7;
    timed.run = benefit_check;
    CheckResult r7 = run_check(timed, options);
    CheckResult r8;
    r8.id = all[7].id;
    r8.name = all[7].name;
    const auto bar = r7.detail.rfind('|');
    if (bar == std::string::npos) {
        r8.passed = false;
        r8.detail = "not run: " + r7.detail;
    } else {
        const int selective = std::stoi(r7.detail.substr(bar + 1));
        r7.detail.erase(bar);
        r8.passed = selective >= kSelectionMinSeeds;
        r8.detail = "informative > noise weight in " + std::to_string(selective) + "/" +
                    std::to_string(kBenefitSeeds) + " seeds (need " + std::to_string(kSelectionMinSeeds) + ")";
    }
    r8.seconds = 0.0;
    r8.budget_seconds = 0.0;
    return {r7, r8};
}

}  // namespace

std::vector<CheckResult> run_all(const Options& options,
                                 const std::function<void(const CheckResult&)>& on_result) {
    std::vector<CheckResult> out;
    auto emit = [&](CheckResult r) {
        if (on_result) on_result(r);
        out.push_back(std::move(r));
    };
    for (const Check& c : checks()) {
        if (c.id == "C7") {
            auto [r7, r8] = run_benefit_pair(options);
            emit(r7);
            emit(r8);
        } else if (c.id != "C8") {
            emit(run_check(c, options));
        }
    }
    return out;
}

std::string format_line(const CheckResult& r) {
    std::string line = (r.passed ? "PASS " : "FAIL ") + r.id + " " + r.name + " (";
    line += fmt("%.1fs", r.seconds);
    if (r.budget_seconds > 0.0) line += " / " + fmt("%.0fs", r.budget_seconds);
    line += "): " + r.detail;
    return line;
}

}  // namespace rstr::verify
