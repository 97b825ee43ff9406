#include "resgntk/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "resgntk/errors.hpp"
#include "resgntk/synthetic.hpp"

namespace resgntk {

namespace {

const std::vector<ClassId>& truth_of(const LabeledGraph& g) {
    if (!g.labels()) throw ArgumentError("evaluation graph '" + g.name() + "' has no labels");
    return *g.labels();
}

}  // namespace

double holdout_accuracy(const Dataset& train, const LabeledGraph& test, const KernelConfig& kernel_config,
                        const SvmConfig& svm_config, const PipelineOptions& options) {
    const auto& truth = truth_of(test);
    const auto fitted = fit(train, kernel_config, svm_config, options);
    const auto predicted = infer(test.without_labels(), train, fitted.model, kernel_config, options);
    return evaluate(predicted, truth);
}

std::vector<SweepRow> sweep_layers(const Dataset& train, const LabeledGraph& test, std::span<const int> layers,
                                   std::span<const Variant> variants, const KernelConfig& base,
                                   const SvmConfig& svm_config, const PipelineOptions& options) {
    std::vector<SweepRow> rows;
    for (int l : layers) {
        for (Variant v : variants) {
            KernelConfig cfg = base;
            cfg.layers = l;
            cfg.variant = v;
            rows.push_back({l, v, holdout_accuracy(train, test, cfg, svm_config, options)});
        }
    }
    return rows;
}

std::vector<SubsetRow> subset_trials(const Dataset& train, const LabeledGraph& test, std::span<const std::size_t> ms,
                                     std::size_t trials, std::uint64_t seed, const KernelConfig& kernel_config,
                                     const SvmConfig& svm_config, const PipelineOptions& options) {
    if (trials == 0) throw ArgumentError("subset trials must be positive");
    const auto& truth = truth_of(test);
    const auto full = assemble_train_kernel(train, kernel_config, options);
    const auto cross = assemble_test_kernel(test.without_labels(), train, kernel_config, options);

    std::vector<SubsetRow> rows;
    for (std::size_t m : ms) {
        SubsetRow row;
        row.m = m;
        for (std::size_t t = 0; t < trials; ++t) {
            const auto chosen = choose_partitions(train.graphs.size(), m, synthetic::mix_seed(seed, m * 1000003 + t));
            const Dataset sub = train.subset(chosen);
            const auto labels = concatenated_labels(sub);
            const std::set<ClassId> distinct(labels.begin(), labels.end());
            std::vector<ClassId> predicted;
            if (distinct.size() < 2) {
                predicted.assign(truth.size(), labels.front());
            } else {
                const auto k = select_blocks(full, chosen, true);
                const auto k0 = select_blocks(cross, chosen, false);
                const auto model = fit_kernel(k, labels, svm_config, options.par);
                predicted = predict(k0.values, model.svm);
            }
            row.accuracies.push_back(evaluate(predicted, truth));
        }
        double sum = 0.0;
        for (double a : row.accuracies) sum += a;
        row.mean_accuracy = sum / static_cast<double>(trials);
        double sq = 0.0;
        for (double a : row.accuracies) sq += (a - row.mean_accuracy) * (a - row.mean_accuracy);
        row.std_accuracy = trials > 1 ? std::sqrt(sq / static_cast<double>(trials - 1)) : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

double select_c(const Dataset& train, const Dataset& validation, std::span<const double> grid,
                const KernelConfig& kernel_config, const SvmConfig& svm_config, const PipelineOptions& options) {
    if (grid.empty()) throw ArgumentError("C grid is empty");
    if (validation.graphs.empty()) throw ArgumentError("validation dataset has no graphs");
    const auto k = assemble_train_kernel(train, kernel_config, options);
    const auto labels = concatenated_labels(train);
    std::vector<BlockKernelMatrix> crosses;
    for (const auto& g : validation.graphs) {
        truth_of(g);
        crosses.push_back(assemble_test_kernel(g.without_labels(), train, kernel_config, options));
    }
    double best_c = grid.front();
    double best_acc = -1.0;
    std::vector<double> sorted(grid.begin(), grid.end());
    std::sort(sorted.begin(), sorted.end());
    for (double c : sorted) {
        SvmConfig cfg = svm_config;
        cfg.c = c;
        const auto model = fit_kernel(k, labels, cfg, options.par);
        double acc = 0.0;
        for (std::size_t i = 0; i < validation.graphs.size(); ++i) {
            acc += evaluate(predict(crosses[i].values, model.svm), *validation.graphs[i].labels());
        }
        acc /= static_cast<double>(validation.graphs.size());
        if (acc > best_acc) {
            best_acc = acc;
            best_c = c;
        }
    }
    return best_c;
}

}  // namespace resgntk
