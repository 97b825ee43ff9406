// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "cli.hpp"
#include "resgntk/experiments.hpp"
#include "resgntk/gntk.hpp"
#include "resgntk/oracle.hpp"
#include "resgntk/pipeline.hpp"
#include "resgntk/svm.hpp"
#include "resgntk/synthetic.hpp"
#include "test_support.hpp"

using namespace resgntk;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

KernelConfig kcfg(int layers, Variant v = Variant::residual, bool jk = true) {
    KernelConfig c;
    c.layers = layers;
    c.variant = v;
    c.jumping_knowledge = jk;
    return c;
}

double mean(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------

Outcome closed_form_vs_monte_carlo() {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> var(0.0, 4.0), corr(-1.0, 1.0);
    int bad = 0;
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
        double a = 0, b = 0;
        while (a == 0) a = 4.0 - var(rng);  // (0, 4]
        while (b == 0) b = 4.0 - var(rng);
        const double rho = corr(rng) * std::sqrt(a * b);
        const auto cf = relu_expectations(a, b, rho);
        const auto mc = oracle::mc_gaussian_expectation(a, b, rho, 1'000'000, synthetic::mix_seed(7, i));
        const double z1 = std::abs(cf.e_sigma - mc.e_sigma) / mc.se_sigma;
        const double z2 = std::abs(cf.e_sigma_dot - mc.e_sigma_dot) / mc.se_sigma_dot;
        worst = std::max({worst, z1, z2});
        bad += (z1 > 3) + (z2 > 3);
    }
    return {bad == 0, fmt("20 triples, %d outputs beyond 3 SE, worst %.2f SE", bad, worst)};
}

Outcome hand_values() {
    const auto node = testing::isolated_node(testing::rows({{1, 1}}));
    const auto res = kernel_trace(node, node, kcfg(2));
    const auto van = kernel_trace(node, node, kcfg(2, Variant::vanilla));
    const double jk = gntk_pair(node, node, kcfg(2))(0, 0);
    const auto path = testing::path_graph(2, testing::rows({{1, 0}, {0, 1}}));
    const Matrix s = sigma_init(path, path);
    const bool ok = std::abs(res.theta[0](0, 0) - 2) <= 1e-12 && std::abs(res.theta[1](0, 0) - 4) <= 1e-12 &&
                    std::abs(jk - 6) <= 1e-12 && std::abs(van.theta[1](0, 0) - 2) <= 1e-12 && s(0, 0) == 0.75 &&
                    s(1, 1) == 0.75 && s(0, 1) == 0.25 && s(1, 0) == 0.25;
    return {ok, fmt("theta1=%.15g theta2=%.15g jk=%.15g vanilla theta2=%.15g path sigma1=[%g %g; %g %g]",
                    res.theta[0](0, 0), res.theta[1](0, 0), jk, van.theta[1](0, 0), s(0, 0), s(0, 1), s(1, 0), s(1, 1))};
}

Outcome finite_width() {
    std::mt19937_64 rng(303);
    Matrix x = testing::random_features(3, 4, rng);
    for (Eigen::Index i = 0; i < 3; ++i) x.row(i).normalize();
    const auto path = testing::path_graph(3, x);
    const auto c = kcfg(2, Variant::residual, false);
    const Matrix theta = gntk_pair(path, path, c);
    const auto trace = kernel_trace(path, path, c);

    const double ntk_err =
        oracle::relative_frobenius_error(oracle::empirical_ntk(path, path, c, 1024, 200, 1), theta);
    const double cov_err = oracle::relative_frobenius_error(
        oracle::empirical_layer_covariance(path, path, c, 1024, 200, 2)[1], trace.sigma[1]);

    // Paired comparison: same seed for both widths, 20 seeds, 50 draws each.
    const int seeds = 20;
    int wins = 0;
    std::vector<double> small, large;
    for (int s = 0; s < seeds; ++s) {
        const auto seed = synthetic::mix_seed(404, s);
        const double e256 = oracle::relative_frobenius_error(oracle::empirical_ntk(path, path, c, 256, 50, seed), theta);
        const double e4096 =
            oracle::relative_frobenius_error(oracle::empirical_ntk(path, path, c, 4096, 50, seed), theta);
        small.push_back(e256);
        large.push_back(e4096);
        wins += e4096 < e256;
    }
    // One-sided sign test at 5%: P(Binomial(20, 1/2) >= 15) = 0.021.
    const bool trend = wins >= 15 && mean(large) < mean(small);
    const bool ok = ntk_err <= 0.10 && cov_err <= 0.05 && trend;
    return {ok, fmt("ntk err %.4f (<=0.10), sigma2 err %.4f (<=0.05), width 4096 beat 256 in %d/%d seeds, "
                    "mean err %.4f vs %.4f",
                    ntk_err, cov_err, wins, seeds, mean(large), mean(small))};
}

Dataset er_dataset() {
    Dataset ds;
    for (int i = 0; i < 10; ++i) {
        ds.graphs.push_back(synthetic::erdos_renyi("er" + std::to_string(i), 20, 0.3, 8, synthetic::mix_seed(505, i)));
    }
    return ds;
}

Outcome kernel_validity() {
    const auto k = assemble_train_kernel(er_dataset(), kcfg(4));
    const bool symmetric = k.values == k.values.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(k.values), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    const double bound = -1e-8 * k.values.trace() / static_cast<double>(k.values.rows());
    return {symmetric && lmin >= bound && k.values.rows() == 200,
            fmt("%ldx%ld, bitwise symmetric=%s, min eigenvalue %.3e (bound %.3e)", static_cast<long>(k.values.rows()),
                static_cast<long>(k.values.cols()), symmetric ? "yes" : "no", lmin, bound)};
}

Outcome svm_checks() {
    const Matrix id = Matrix::Identity(2, 2);
    const std::vector<int> y2{1, -1};
    const auto m = train_binary(id, y2, {});
    const bool analytic = std::abs(m.dual_coefs[0] - 1) <= 1e-6 && std::abs(m.dual_coefs[1] + 1) <= 1e-6 &&
                          std::abs(m.bias) <= 1e-6;

    std::mt19937_64 rng(606);
    std::size_t decreases = 0, kkt_violations = 0, unconverged = 0;
    for (int p = 0; p < 50; ++p) {
        const std::size_t n = 40;
        const Matrix f = testing::random_features(n, 1 + rng() % 20, rng);
        const Matrix k = f * f.transpose();
        std::vector<int> y(n);
        for (auto& v : y) v = rng() % 2 ? 1 : -1;
        y[0] = 1, y[1] = -1;
        SvmConfig cfg;
        double prev = -1e300;
        const auto model = train_binary(k, y, cfg, [&](std::size_t, double w) {
            if (w < prev - 1e-12 * std::max(1.0, std::abs(w))) ++decreases;
            prev = w;
        });
        unconverged += !model.converged;
        double eq = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const Vector row = k.row(static_cast<Eigen::Index>(i)).transpose();
            const double margin = y[i] * model.decision({row.data(), n});
            const double alpha = model.dual_coefs[i] * y[i];
            eq += model.dual_coefs[i];
            bool ok = alpha >= 0 && alpha <= cfg.c;
            if (alpha == 0) ok = ok && margin >= 1 - cfg.tol;
            else if (alpha == cfg.c) ok = ok && margin <= 1 + cfg.tol;
            else ok = ok && std::abs(margin - 1) <= cfg.tol;
            kkt_violations += !ok;
        }
        kkt_violations += std::abs(eq) > 1e-9 * cfg.c * n;
    }
    return {analytic && decreases == 0 && kkt_violations == 0 && unconverged == 0,
            fmt("identity alpha=[%.9f, %.9f] b=%.2e; 50 problems: %zu objective decreases, %zu KKT violations, "
                "%zu unconverged",
                m.dual_coefs[0], -m.dual_coefs[1], m.bias, decreases, kkt_violations, unconverged)};
}

// ---- synthetic inductive task ----

struct Task {
    Dataset train;
    LabeledGraph test;
};

Task synthetic_task(std::uint64_t seed) {
    synthetic::PlantedPartitionSpec spec;  // n=60, 2 blocks, 0.3 / 0.05, d=8, shift 1
    Dataset all;
    for (int i = 0; i < 6; ++i) {
        all.graphs.push_back(synthetic::planted_partition("s" + std::to_string(i), spec, synthetic::mix_seed(seed, i)));
    }
    LabeledGraph test = all.graphs.back();
    all.graphs.pop_back();
    return {std::move(all), std::move(test)};
}

Matrix stacked_features(const Dataset& ds) {
    Matrix x(static_cast<Eigen::Index>(ds.total_nodes()), static_cast<Eigen::Index>(ds.feature_dim()));
    Eigen::Index r = 0;
    for (const auto& g : ds.graphs) {
        x.middleRows(r, g.features().rows()) = g.features();
        r += g.features().rows();
    }
    return x;
}

double feature_only_accuracy(const Task& t) {
    const Matrix x = stacked_features(t.train);
    const auto model = train_multiclass(x * x.transpose(), concatenated_labels(t.train), {});
    return evaluate(predict(t.test.features() * x.transpose(), model), *t.test.labels());
}

Outcome end_to_end() {
    std::vector<double> gntk_acc, base_acc;
    for (int s = 0; s < 10; ++s) {
        const auto t = synthetic_task(synthetic::mix_seed(707, s));
        base_acc.push_back(feature_only_accuracy(t));
        gntk_acc.push_back(holdout_accuracy(t.train, t.test, kcfg(2), {}));
    }
    const double base = mean(base_acc), acc = mean(gntk_acc);
    const bool solvable = base > 0.85;
    return {solvable && acc >= 0.9,
            fmt("feature-only baseline %.4f (gate > 0.85: %s); residual GNTK L=2 mean accuracy %.4f (>= 0.9)", base,
                solvable ? "met" : "NOT met", acc)};
}

Outcome depth_trend() {
    const std::vector<int> depths{2, 4, 6, 8};
    const std::vector<Variant> variants{Variant::residual, Variant::vanilla};
    std::vector<double> res(depths.size(), 0.0), van(depths.size(), 0.0);
    for (int s = 0; s < 10; ++s) {
        const auto t = synthetic_task(synthetic::mix_seed(707, s));
        const auto rows = sweep_layers(t.train, t.test, depths, variants, kcfg(2), {});
        for (const auto& r : rows) {
            const auto i = static_cast<std::size_t>(std::find(depths.begin(), depths.end(), r.layers) - depths.begin());
            (r.variant == Variant::residual ? res : van)[i] += r.accuracy / 10.0;
        }
    }
    bool ok = res.back() >= res.front() - 0.05;
    std::string detail;
    for (std::size_t i = 0; i < depths.size(); ++i) {
        ok = ok && res[i] >= van[i];
        detail += fmt("L=%d res %.4f van %.4f; ", depths[i], res[i], van[i]);
    }
    detail += fmt("L=8 vs L=2 drop %.4f (<= 0.05)", res.front() - res.back());
    return {ok, detail};
}

Outcome scalability() {
    synthetic::PlantedPartitionSpec spec;
    spec.nodes = 1200;
    spec.p_in = 0.015;
    spec.p_out = 0.0025;
    const auto big = synthetic::planted_partition("big", spec, 808);
    const auto parts = partition(big, 20, 1);
    Dataset train{parts};
    // The unseen graph: an independent draw of the same size, so accuracy is measured on 1200 nodes.
    const auto test = synthetic::planted_partition("unseen", spec, 809);

    const std::vector<std::size_t> ms{1, 2, 5, 10, 20};
    const auto rows = subset_trials(train, test, ms, 10, 810, kcfg(2), {});
    bool monotone = true;
    std::string detail;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0) monotone = monotone && rows[i].mean_accuracy >= rows[i - 1].mean_accuracy;
        detail += fmt("m=%zu %.4f+-%.4f; ", rows[i].m, rows[i].mean_accuracy, rows[i].std_accuracy);
    }
    const bool std_drop = rows[1].std_accuracy < rows[0].std_accuracy;
    detail += fmt("mean non-decreasing: %s, std(m=2) < std(m=1): %s", monotone ? "yes" : "no", std_drop ? "yes" : "no");
    return {monotone && std_drop, detail};
}

// ---- determinism through the command-line front end ----

int cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    if (code != 0) std::cerr << err.str();
    return code;
}

std::vector<ManifestEntry> save_all(const Dataset& ds, const fs::path& dir) {
    std::vector<ManifestEntry> entries;
    for (const auto& g : ds.graphs) entries.push_back(save_graph(g, dir / g.name()));
    return entries;
}

Outcome determinism() {
    const auto dir = testing::temp_dir("acceptance_det");
    write_manifest(save_all(er_dataset(), dir / "er"), dir / "er" / "manifest.json");
    const auto task = synthetic_task(synthetic::mix_seed(707, 0));
    write_manifest(save_all(task.train, dir / "syn"), dir / "syn" / "manifest.json");
    Dataset test_ds{{task.test}};
    write_manifest(save_all(test_ds, dir / "held"), dir / "held" / "manifest.json");

    std::vector<std::string> mismatches;
    int failures = 0;
    for (const std::string t : {"1", "8"}) {
        const auto out = dir / ("t" + t);
        fs::create_directories(out);
        failures += cli({"kernel", "--train", (dir / "er" / "manifest.json").string(), "--layers", "4", "--out",
                         (out / "er.kernel").string(), "--threads", t}) != 0;
        failures += cli({"train", "--train", (dir / "syn" / "manifest.json").string(), "--layers", "2", "--model-out",
                         (out / "model.json").string(), "--kernel-out", (out / "train.kernel").string(), "--threads",
                         t}) != 0;
        failures += cli({"predict", "--train", (dir / "syn" / "manifest.json").string(), "--model",
                         (out / "model.json").string(), "--test", (dir / "held" / "manifest.json").string(), "--out",
                         (out / "pred.txt").string(), "--kernel-out", (out / "test.kernel").string(), "--threads",
                         t}) != 0;
    }
    std::size_t compared = 0;
    if (failures == 0) {
        for (const char* f : {"er.kernel", "train.kernel", "model.json", "test.kernel", "pred.txt"}) {
            ++compared;
            if (read_text_file(dir / "t1" / f) != read_text_file(dir / "t8" / f)) mismatches.emplace_back(f);
        }
    }
    fs::remove_all(dir);
    std::string detail = fmt("%zu files compared between --threads 1 and 8, %zu differ, %d command failures", compared,
                             mismatches.size(), failures);
    for (const auto& m : mismatches) detail += " " + m;
    return {failures == 0 && mismatches.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"closed-form expectations vs Monte Carlo", closed_form_vs_monte_carlo},
        {"hand-computed kernel values", hand_values},
        {"finite-width convergence", finite_width},
        {"kernel validity (symmetry, PSD)", kernel_validity},
        {"SVM analytic, monotone objective, KKT", svm_checks},
        {"end-to-end synthetic inductive task", end_to_end},
        {"depth trend residual vs vanilla", depth_trend},
        {"scalability over partition subsets", scalability},
        {"determinism across thread counts", determinism},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << " (" << fmt("%.1f", secs)
                  << " s): " << o.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
