#include "resgntk/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "resgntk/errors.hpp"

namespace resgntk::synthetic {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

LabeledGraph erdos_renyi(std::string name, std::size_t n, double p, std::size_t dim, std::uint64_t seed) {
    if (p < 0.0 || p > 1.0) throw ArgumentError("edge probability must lie in [0, 1]");
    std::mt19937_64 rng(mix_seed(seed, 0));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Edge> edges;
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            if (unif(rng) < p) edges.emplace_back(u, v);
        }
    }
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    std::vector<ClassId> labels(n);
    for (auto& c : labels) c = static_cast<ClassId>(rng() & 1U);
    return LabeledGraph(std::move(name), n, std::move(edges), std::move(x), std::move(labels));
}

LabeledGraph planted_partition(std::string name, const PlantedPartitionSpec& spec, std::uint64_t seed) {
    if (spec.blocks == 0) throw ArgumentError("planted partition needs at least one block");
    if (spec.dim == 0) throw ArgumentError("feature dimension must be positive");
    std::mt19937_64 rng(mix_seed(seed, 1));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    const std::size_t n = spec.nodes;
    std::vector<ClassId> labels(n);
    for (std::size_t u = 0; u < n; ++u) labels[u] = static_cast<ClassId>(u % spec.blocks);
    std::shuffle(labels.begin(), labels.end(), rng);

    std::vector<Edge> edges;
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            const double p = labels[u] == labels[v] ? spec.p_in : spec.p_out;
            if (unif(rng) < p) edges.emplace_back(u, v);
        }
    }
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec.dim));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    for (std::size_t u = 0; u < n; ++u) {
        x(static_cast<Eigen::Index>(u), 0) += labels[u] % 2 == 0 ? spec.mean_shift : -spec.mean_shift;
    }
    return LabeledGraph(std::move(name), n, std::move(edges), std::move(x), std::move(labels));
}

}  // namespace resgntk::synthetic
