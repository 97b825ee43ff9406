#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "resgntk/parallel.hpp"
#include "resgntk/types.hpp"

namespace resgntk {

struct SvmConfig {
    double c = 1.0;
    double tol = 1e-3;
    /// Consecutive updates without objective progress before giving up. 0 = 10 * n.
    std::size_t max_passes = 0;

    void validate() const;
    bool operator==(const SvmConfig&) const = default;
};

/// Soft-margin binary SVM trained on a precomputed Gram matrix.
/// Decision value for a row k of a cross Gram: sum_i dual_coefs[i] * K(k, i) + bias.
struct BinaryModel {
    std::vector<double> dual_coefs;  // alpha_i * y_i, dense over training indices
    double bias = 0.0;
    std::vector<std::size_t> support_indices;
    SvmConfig config;
    bool converged = true;
    std::size_t iterations = 0;

    double decision(std::span<const double> kernel_row) const;
};

/// Optional per-iteration hook receiving the dual objective W(alpha) after each update.
using ObjectiveTrace = std::function<void(std::size_t iteration, double objective)>;

/// SMO with maximal-violating-pair selection. `labels` must be +1/-1 with both present.
/// The Gram is used as given; see repair_gram() for PSD jitter.
BinaryModel train_binary(const Matrix& gram, std::span<const int> labels, const SvmConfig& config,
                         const ObjectiveTrace& trace = {});

/// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij of a model.
double dual_objective(const Matrix& gram, std::span<const int> labels, const BinaryModel& model);

/// If the smallest eigenvalue is below -1e-8 * trace / n, returns a copy with |lambda_min|
/// added to the diagonal (and reports the jitter). Otherwise returns nullopt.
struct GramRepair {
    Matrix gram;
    double jitter = 0.0;
};
std::optional<GramRepair> repair_gram(const Matrix& gram);

/// One-vs-rest collection of binary models.
struct MulticlassSvmModel {
    std::vector<ClassId> classes;         // ascending
    std::vector<BinaryModel> models;      // models[k] separates classes[k] from the rest
    std::size_t training_nodes = 0;
    double diagonal_jitter = 0.0;
    SvmConfig config;

    bool converged() const;
};

MulticlassSvmModel train_multiclass(const Matrix& gram, std::span<const ClassId> labels, const SvmConfig& config,
                                    Parallelism par = {});

/// Per-row decision values (t x classes).
Matrix decision_values(const Matrix& cross_gram, const MulticlassSvmModel& model);

/// Argmax of the one-vs-rest decision values; ties go to the lowest class id.
std::vector<ClassId> predict(const Matrix& cross_gram, const MulticlassSvmModel& model);

}  // namespace resgntk
