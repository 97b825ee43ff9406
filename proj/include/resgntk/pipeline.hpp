#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "resgntk/graph.hpp"
#include "resgntk/kernel_matrix.hpp"
#include "resgntk/parallel.hpp"
#include "resgntk/svm.hpp"

namespace resgntk {

/// On-disk store of assembled kernels keyed by (graph contents, config).
class KernelCache {
public:
    explicit KernelCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

    std::filesystem::path path_for(std::span<const LabeledGraph> rows, std::span<const LabeledGraph> cols,
                                   const KernelConfig& config) const;
    std::optional<BlockKernelMatrix> load(const std::filesystem::path& path) const;
    void store(const std::filesystem::path& path, const BlockKernelMatrix& k) const;

private:
    std::filesystem::path dir_;
};

struct PipelineOptions {
    Parallelism par;
    const KernelCache* cache = nullptr;
};

/// Square block kernel over every node of every training graph, in dataset order.
BlockKernelMatrix assemble_train_kernel(const Dataset& dataset, const KernelConfig& config,
                                        const PipelineOptions& options = {});

/// Kernel rows for every node of g0 against every training node.
BlockKernelMatrix assemble_test_kernel(const LabeledGraph& g0, const Dataset& dataset, const KernelConfig& config,
                                       const PipelineOptions& options = {});

/// Classifier plus the bookkeeping needed to check it is applied consistently.
struct TrainedModel {
    MulticlassSvmModel svm;
    KernelConfig kernel;
    std::vector<std::string> graph_names;
    std::vector<std::size_t> node_counts;
};

struct FitResult {
    TrainedModel model;
    BlockKernelMatrix kernel;
};

/// Training labels in block order.
std::vector<ClassId> concatenated_labels(const Dataset& dataset);

FitResult fit(const Dataset& dataset, const KernelConfig& kernel_config, const SvmConfig& svm_config,
              const PipelineOptions& options = {});

/// Trains on a precomputed kernel (e.g. a slice of a larger one).
TrainedModel fit_kernel(const BlockKernelMatrix& kernel, std::span<const ClassId> labels, const SvmConfig& svm_config,
                        Parallelism par = {});

/// Throws ConsistencyError if `model` was not trained under `config` on `dataset`.
void check_model_consistency(const TrainedModel& model, const Dataset& dataset, const KernelConfig& config);

std::vector<ClassId> infer(const LabeledGraph& g0, const Dataset& dataset, const TrainedModel& model,
                           const KernelConfig& config, const PipelineOptions& options = {});

struct EvaluationReport {
    double accuracy = 0.0;
    std::map<ClassId, double> per_class_accuracy;  // recall of each true class
    std::size_t n_test = 0;
};

double evaluate(std::span<const ClassId> predicted, std::span<const ClassId> truth);
EvaluationReport evaluation_report(std::span<const ClassId> predicted, std::span<const ClassId> truth);

/// m distinct indices out of [0, total), drawn uniformly with `seed`, returned ascending.
std::vector<std::size_t> choose_partitions(std::size_t total, std::size_t m, std::uint64_t seed);

// ---- file formats ----

std::string format_model(const TrainedModel& model);
TrainedModel parse_model(std::string_view json);
void write_model_file(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel read_model_file(const std::filesystem::path& path);

/// "#graph <name> #nodes <n>" header followed by one class id per line.
std::string format_predictions(const std::string& graph_name, std::span<const ClassId> labels);

/// Reads either a prediction file or a plain label file ('#' lines ignored).
std::vector<ClassId> read_label_like_file(const std::filesystem::path& path);

std::string format_report(const EvaluationReport& report, const std::optional<KernelConfig>& config);

}  // namespace resgntk
