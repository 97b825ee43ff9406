#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "resgntk/gntk.hpp"
#include "resgntk/types.hpp"

namespace resgntk {

struct BlockInfo {
    std::string name;
    std::size_t nodes = 0;
    std::size_t offset = 0;

    bool operator==(const BlockInfo&) const = default;
};

/// Dense node-by-node kernel assembled from per-graph-pair blocks.
/// Train kernels are square with row_blocks == col_blocks; test kernels have one
/// row block (the unseen graph) and the training graphs as column blocks.
struct BlockKernelMatrix {
    Matrix values;
    std::vector<BlockInfo> row_blocks;
    std::vector<BlockInfo> col_blocks;
    KernelConfig config;
};

std::vector<BlockInfo> make_blocks(const std::vector<std::pair<std::string, std::size_t>>& sizes);

/// "GNTK-KERNEL v1 <rows> <cols>", one row per line, "#meta <json>" footer.
std::string format_kernel(const BlockKernelMatrix& k);
BlockKernelMatrix parse_kernel(std::string_view content);

void write_kernel_file(const std::filesystem::path& path, const BlockKernelMatrix& k);
BlockKernelMatrix read_kernel_file(const std::filesystem::path& path);

/// Keeps only the listed column blocks (and, for square train kernels, the same row blocks).
BlockKernelMatrix select_blocks(const BlockKernelMatrix& k, std::span<const std::size_t> blocks, bool square);

}  // namespace resgntk
