#pragma once

#include <vector>

#include "resgntk/pipeline.hpp"

namespace resgntk {

/// Train on `train`, predict the labeled graph `test`, return accuracy.
double holdout_accuracy(const Dataset& train, const LabeledGraph& test, const KernelConfig& kernel_config,
                        const SvmConfig& svm_config, const PipelineOptions& options = {});

struct SweepRow {
    int layers = 0;
    Variant variant = Variant::residual;
    double accuracy = 0.0;
};

/// Accuracy for every (depth, variant) combination; other kernel settings come from `base`.
std::vector<SweepRow> sweep_layers(const Dataset& train, const LabeledGraph& test, std::span<const int> layers,
                                   std::span<const Variant> variants, const KernelConfig& base,
                                   const SvmConfig& svm_config, const PipelineOptions& options = {});

struct SubsetRow {
    std::size_t m = 0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;  // sample standard deviation over trials
    std::vector<double> accuracies;
};

/// For each m, `trials` random choices of m training graphs; each trial trains on the
/// chosen graphs and predicts `test`. The full kernel is computed once and sliced.
/// A subset containing a single class yields the constant classifier for that class.
std::vector<SubsetRow> subset_trials(const Dataset& train, const LabeledGraph& test, std::span<const std::size_t> ms,
                                     std::size_t trials, std::uint64_t seed, const KernelConfig& kernel_config,
                                     const SvmConfig& svm_config, const PipelineOptions& options = {});

/// Picks C from `grid` by mean accuracy on the labeled validation graphs (ties: smaller C).
double select_c(const Dataset& train, const Dataset& validation, std::span<const double> grid,
                const KernelConfig& kernel_config, const SvmConfig& svm_config, const PipelineOptions& options = {});

}  // namespace resgntk
