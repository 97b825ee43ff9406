#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "resgntk/gntk.hpp"
#include "resgntk/graph.hpp"
#include "resgntk/parallel.hpp"
#include "resgntk/types.hpp"

// Independent reference computations for the kernel recursion: Monte-Carlo Gaussian
// expectations and explicit finite-width networks. Nothing here calls into the kernel
// recursion itself.
namespace resgntk::oracle {

struct McExpectation {
    double e_sigma = 0;
    double e_sigma_dot = 0;
    double se_sigma = 0;
    double se_sigma_dot = 0;
};

/// Sample means of relu(z1)relu(z2) and step(z1)step(z2) for (z1, z2) ~ N(0, [[a, rho], [rho, b]]).
McExpectation mc_gaussian_expectation(double a, double b, double rho, std::size_t samples, std::uint64_t seed);

/// Finite-width GNN with residual layers
///   h^(l+1)_u = (c_u W1 sum_{v in N(u)} z_v + W2 z_u) / sqrt(d_l),  z^(l) = relu(h^(l)),  z^(0) = x,
/// (W2 absent above the input layer for the vanilla variant) and i.i.d. standard normal weights.
/// Widths are d, width, ..., width, out_width.
class FiniteWidthGnn {
public:
    FiniteWidthGnn(std::size_t input_dim, std::size_t width, int layers, Variant variant, std::size_t out_width,
                   std::uint64_t seed);

    struct Forward {
        std::vector<Matrix> post;  // z^(l), l = 0..L-1   (n x d_l)
        std::vector<Matrix> agg;   // c_u sum_{N(u)} z^(l)_v, l = 0..L-1
        std::vector<Matrix> pre;   // h^(l), l = 1..L     (n x d_l), stored at index l-1
    };

    Forward forward(const LabeledGraph& g) const;

    /// Gradient of the scalar output h^(L)_u with respect to every parameter, in
    /// parameters() order. Requires out_width == 1.
    Vector gradient(const LabeledGraph& g, const Forward& fwd, NodeIndex u) const;

    Vector parameters() const;
    void set_parameters(const Vector& theta);
    std::size_t parameter_count() const;
    int layers() const noexcept { return layers_; }
    std::size_t width(int l) const { return widths_.at(static_cast<std::size_t>(l)); }

private:
    // The input layer always carries the self path: both kernel variants share Sigma^(1).
    bool has_skip(int l) const noexcept { return l == 0 || variant_ == Variant::residual; }

    int layers_;
    Variant variant_;
    std::vector<std::size_t> widths_;
    std::vector<Matrix> w1_;  // d_{l+1} x d_l
    std::vector<Matrix> w2_;
};

/// Per-layer empirical pre-activation covariance between nodes of g and gp, averaged over
/// hidden channels and weight draws. Index l-1 holds layer l.
std::vector<Matrix> empirical_layer_covariance(const LabeledGraph& g, const LabeledGraph& gp,
                                               const KernelConfig& config, std::size_t width,
                                               std::size_t n_samples, std::uint64_t seed, Parallelism par = {});

/// Mean parameter-gradient inner product of the scalar outputs, estimating Theta^(L).
/// Rejects jumping-knowledge configs.
Matrix empirical_ntk(const LabeledGraph& g, const LabeledGraph& gp, const KernelConfig& config, std::size_t width,
                     std::size_t n_samples, std::uint64_t seed, Parallelism par = {});

double relative_frobenius_error(const Matrix& estimate, const Matrix& target);

struct ComparisonReport {
    std::string target_source;
    std::size_t width = 0;
    std::size_t samples = 0;
    double frobenius_rel_error = 0;
    double per_entry_max_error = 0;
};

ComparisonReport compare(const Matrix& estimate, const Matrix& target, std::string target_source,
                         std::size_t width, std::size_t samples);
std::string format_report(const ComparisonReport& report);

}  // namespace resgntk::oracle
