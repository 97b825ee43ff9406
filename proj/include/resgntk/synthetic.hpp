#pragma once

#include <cstdint>
#include <string>

#include "resgntk/graph.hpp"

namespace resgntk::synthetic {

/// G(n, p) with standard normal features and uniformly random binary labels.
LabeledGraph erdos_renyi(std::string name, std::size_t n, double p, std::size_t dim, std::uint64_t seed);

struct PlantedPartitionSpec {
    std::size_t nodes = 60;
    std::size_t blocks = 2;
    double p_in = 0.3;
    double p_out = 0.05;
    std::size_t dim = 8;
    /// Class k has feature mean +shift*e1 for even k, -shift*e1 for odd k, plus N(0, I).
    double mean_shift = 1.0;
};

/// Stochastic block model; the block of each node is its class label. Blocks are
/// balanced and assigned in random node order.
LabeledGraph planted_partition(std::string name, const PlantedPartitionSpec& spec, std::uint64_t seed);

/// SplitMix64 finalizer; used to derive independent per-stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace resgntk::synthetic
