#include "resgntk/kernel_matrix.hpp"

#include "json.hpp"

#include "resgntk/errors.hpp"
#include "resgntk/graph.hpp"
#include "resgntk/text.hpp"

namespace resgntk {

namespace {

constexpr std::string_view kMagic = "GNTK-KERNEL";
constexpr std::string_view kVersion = "v1";

nlohmann::json blocks_json(const std::vector<BlockInfo>& blocks) {
    auto arr = nlohmann::json::array();
    for (const auto& b : blocks) arr.push_back({{"name", b.name}, {"nodes", b.nodes}});
    return arr;
}

std::vector<BlockInfo> blocks_from_json(const nlohmann::json& arr) {
    std::vector<std::pair<std::string, std::size_t>> sizes;
    for (const auto& b : arr) sizes.emplace_back(b.at("name").get<std::string>(), b.at("nodes").get<std::size_t>());
    return make_blocks(sizes);
}

}  // namespace

std::vector<BlockInfo> make_blocks(const std::vector<std::pair<std::string, std::size_t>>& sizes) {
    std::vector<BlockInfo> out;
    std::size_t offset = 0;
    for (const auto& [name, n] : sizes) {
        out.push_back({name, n, offset});
        offset += n;
    }
    return out;
}

std::string format_kernel(const BlockKernelMatrix& k) {
    std::string out;
    out.reserve(static_cast<std::size_t>(k.values.size()) * 20 + 256);
    out += std::string(kMagic) + ' ' + std::string(kVersion) + ' ' + std::to_string(k.values.rows()) + ' ' +
           std::to_string(k.values.cols()) + '\n';
    for (Eigen::Index i = 0; i < k.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < k.values.cols(); ++j) {
            if (j) out += ' ';
            out += text::format_double(k.values(i, j));
        }
        out += '\n';
    }
    nlohmann::json meta;
    meta["layers"] = k.config.layers;
    meta["variant"] = to_string(k.config.variant);
    meta["jumping_knowledge"] = k.config.jumping_knowledge;
    meta["normalize"] = k.config.normalize;
    meta["row_blocks"] = blocks_json(k.row_blocks);
    meta["col_blocks"] = blocks_json(k.col_blocks);
    out += "#meta " + meta.dump() + '\n';
    return out;
}

BlockKernelMatrix parse_kernel(std::string_view content) {
    BlockKernelMatrix k;
    std::size_t rows = 0, cols = 0, row = 0;
    bool header = false, have_meta = false;
    text::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
        if (!header) {
            auto tok = text::split_whitespace(line);
            if (tok.size() != 4 || tok[0] != kMagic || tok[1] != kVersion || !text::parse_size(tok[2], rows) ||
                !text::parse_size(tok[3], cols)) {
                throw ParseError("kernel file: bad header", line_no);
            }
            k.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
            header = true;
            return;
        }
        if (line.starts_with("#meta ")) {
            nlohmann::json meta;
            try {
                meta = nlohmann::json::parse(line.substr(6));
                k.config.layers = meta.at("layers").get<int>();
                k.config.variant = parse_variant(meta.at("variant").get<std::string>());
                k.config.jumping_knowledge = meta.at("jumping_knowledge").get<bool>();
                k.config.normalize = meta.at("normalize").get<bool>();
                k.row_blocks = blocks_from_json(meta.at("row_blocks"));
                k.col_blocks = blocks_from_json(meta.at("col_blocks"));
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(std::string("kernel file: bad meta line: ") + e.what(), line_no);
            }
            have_meta = true;
            return;
        }
        if (text::trim(line).empty()) return;
        if (row >= rows) throw ParseError("kernel file: more rows than declared", line_no);
        auto tok = text::split_whitespace(line);
        if (tok.size() != cols) throw ParseError("kernel file: wrong column count", line_no);
        for (std::size_t j = 0; j < cols; ++j) {
            double v = 0;
            if (!text::parse_double(tok[j], v)) throw ParseError("kernel file: bad number", line_no);
            k.values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) = v;
        }
        ++row;
    });
    if (!header) throw ParseError("kernel file: missing header");
    if (row != rows) throw ParseError("kernel file: expected " + std::to_string(rows) + " rows, got " + std::to_string(row));
    if (!have_meta) throw ParseError("kernel file: missing #meta footer");
    std::size_t r = 0, c = 0;
    for (const auto& b : k.row_blocks) r += b.nodes;
    for (const auto& b : k.col_blocks) c += b.nodes;
    if (r != rows || c != cols) throw ParseError("kernel file: block sizes do not match matrix shape");
    return k;
}

void write_kernel_file(const std::filesystem::path& path, const BlockKernelMatrix& k) {
    write_text_file(path, format_kernel(k));
}

BlockKernelMatrix read_kernel_file(const std::filesystem::path& path) {
    try {
        return parse_kernel(read_text_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

BlockKernelMatrix select_blocks(const BlockKernelMatrix& k, std::span<const std::size_t> blocks, bool square) {
    BlockKernelMatrix out;
    out.config = k.config;
    std::vector<std::pair<std::string, std::size_t>> sizes;
    std::vector<Eigen::Index> cols;
    for (std::size_t b : blocks) {
        if (b >= k.col_blocks.size()) throw IndexError("block index " + std::to_string(b) + " out of range");
        const auto& info = k.col_blocks[b];
        sizes.emplace_back(info.name, info.nodes);
        for (std::size_t i = 0; i < info.nodes; ++i) cols.push_back(static_cast<Eigen::Index>(info.offset + i));
    }
    out.col_blocks = make_blocks(sizes);
    if (square) {
        out.row_blocks = out.col_blocks;
        out.values = k.values(cols, cols);
    } else {
        out.row_blocks = k.row_blocks;
        out.values = k.values(Eigen::all, cols);
    }
    return out;
}

}  // namespace resgntk
