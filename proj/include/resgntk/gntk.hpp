#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "resgntk/graph.hpp"
#include "resgntk/parallel.hpp"
#include "resgntk/types.hpp"

namespace resgntk {

enum class Variant { residual, vanilla };

std::string to_string(Variant v);
Variant parse_variant(std::string_view name);

/// Kernel hyperparameters. The activation is always ReLU.
struct KernelConfig {
    int layers = 2;
    Variant variant = Variant::residual;
    bool jumping_knowledge = true;
    bool normalize = false;

    void validate() const;
    bool operator==(const KernelConfig&) const = default;
};

std::string describe(const KernelConfig& config);

/// Gaussian expectations of ReLU under a centered bivariate normal with
/// variances (a, b) and covariance rho.
struct ReluExpectation {
    double e_sigma = 0;      // E[relu(z1) relu(z2)]
    double e_sigma_dot = 0;  // E[step(z1) step(z2)]
};

/// Arc-cosine closed form. Throws CovarianceError if rho^2 exceeds ab beyond rounding.
ReluExpectation relu_expectations(double a, double b, double rho);

/// Layer-one covariance between every node of g and every node of gp.
Matrix sigma_init(const LabeledGraph& g, const LabeledGraph& gp);

/// Full recursion state for one graph pair after `layer` layers.
struct PairKernelState {
    Matrix cross_sigma;    // n x n'
    Matrix self_sigma_g;   // n x n
    Matrix self_sigma_gp;  // n' x n'
    Matrix cross_theta;    // n x n'
    Matrix accumulated;    // running sum of cross_theta over layers
    int layer = 1;
};

PairKernelState initial_state(const LabeledGraph& g, const LabeledGraph& gp);

/// Advances every matrix in `state` by one layer.
PairKernelState layer_step(const PairKernelState& state, const KernelConfig& config, const LabeledGraph& g,
                           const LabeledGraph& gp, Parallelism par = {});

/// Per-graph quantities needed by every pair involving the graph: the diagonal of the
/// within-graph covariance at each layer, and the diagonal of the final within-graph
/// kernel (used for normalization). Computed once per graph and reused across pairs.
struct GraphProfile {
    std::vector<Vector> sigma_diag;  // index l-1 holds diag Sigma^(l)(G,G), l = 1..L
    Vector theta_diag;
};

GraphProfile graph_profile(const LabeledGraph& g, const KernelConfig& config, Parallelism par = {});

/// Node-level kernel matrix between g and gp (n x n').
Matrix gntk_pair(const LabeledGraph& g, const LabeledGraph& gp, const KernelConfig& config, Parallelism par = {});
Matrix gntk_pair(const LabeledGraph& g, const GraphProfile& profile_g, const LabeledGraph& gp,
                 const GraphProfile& profile_gp, const KernelConfig& config, Parallelism par = {});

/// Per-layer cross matrices Sigma^(l) and Theta^(l), l = 1..L (not accumulated, not normalized).
struct KernelTrace {
    std::vector<Matrix> sigma;
    std::vector<Matrix> theta;
};

KernelTrace kernel_trace(const LabeledGraph& g, const LabeledGraph& gp, const KernelConfig& config,
                         Parallelism par = {});

}  // namespace resgntk
