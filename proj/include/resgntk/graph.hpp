#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "resgntk/types.hpp"

namespace resgntk {

using Edge = std::pair<NodeIndex, NodeIndex>;

/// Undirected, unweighted graph with dense node features and optional labels.
///
/// Edges are stored once as (min, max) pairs in ascending order. The closed
/// neighborhood N(u) always contains u itself, so self-loops are never stored
/// and are rejected on construction.
class LabeledGraph {
public:
    LabeledGraph() = default;

    /// Validates and normalizes. Duplicate edges (in either orientation) collapse.
    /// Throws IndexError, ShapeError or ArgumentError on invalid input.
    LabeledGraph(std::string name, std::size_t node_count, std::vector<Edge> edges, Matrix features,
                 std::optional<std::vector<ClassId>> labels = std::nullopt);

    const std::string& name() const noexcept { return name_; }
    std::size_t node_count() const noexcept { return node_count_; }
    std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(features_.cols()); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const Matrix& features() const noexcept { return features_; }
    bool has_labels() const noexcept { return labels_.has_value(); }
    const std::optional<std::vector<ClassId>>& labels() const noexcept { return labels_; }

    /// Sorted closed neighborhood {u} ∪ adj(u).
    std::span<const NodeIndex> closed_neighborhood(NodeIndex u) const;

    /// c_u = 1 / |N(u)|.
    double norm_factor(NodeIndex u) const;

    /// Original node ids when this graph was cut out of a larger one; empty otherwise.
    const std::vector<NodeIndex>& source_nodes() const noexcept { return source_nodes_; }
    void set_source_nodes(std::vector<NodeIndex> ids);

    LabeledGraph with_name(std::string name) const;
    LabeledGraph without_labels() const;

    /// Induced subgraph on `nodes` (kept in the given order). Edges leaving the set are dropped.
    LabeledGraph induced_subgraph(std::span<const NodeIndex> nodes, std::string name) const;

    /// Same graph with nodes relabeled: new node i is old node perm[i].
    LabeledGraph permuted(std::span<const NodeIndex> perm) const;

    /// Stable 64-bit content hash over structure, features and labels (not the name).
    std::uint64_t content_hash() const;

private:
    void check_node(NodeIndex u) const;

    std::string name_;
    std::size_t node_count_ = 0;
    std::vector<Edge> edges_;
    Matrix features_;
    std::optional<std::vector<ClassId>> labels_;
    // CSR layout of closed neighborhoods.
    std::vector<std::size_t> offsets_;
    std::vector<NodeIndex> neighbors_;
    std::vector<NodeIndex> source_nodes_;
};

/// Ordered graph list sharing one feature dimension.
struct Dataset {
    std::vector<LabeledGraph> graphs;

    std::size_t feature_dim() const;
    std::size_t total_nodes() const;
    /// Sorted distinct labels over all labeled graphs.
    std::vector<ClassId> classes() const;
    /// Throws ShapeError if feature dimensions differ.
    void check_feature_dims() const;
    /// Graphs at `indices`, in that order.
    Dataset subset(std::span<const std::size_t> indices) const;
};

// ---- ingestion ----

/// Edge list ("u v" per line, '#' comments), CSV features, optional label lines.
LabeledGraph load_graph(const std::filesystem::path& edge_file, const std::filesystem::path& feature_file,
                        const std::optional<std::filesystem::path>& label_file = std::nullopt,
                        std::string name = {});

std::vector<Edge> parse_edges(std::string_view text);
Matrix parse_features(std::string_view text);
std::vector<ClassId> parse_labels(std::string_view text);

/// Manifest: JSON array of {name, edges, features, labels?}; paths relative to the manifest.
Dataset load_manifest(const std::filesystem::path& manifest);

/// Writes edges.txt, features.csv, labels.txt (if labeled) and nodes.txt (if source ids known)
/// into `dir`. Returns the manifest entry with paths relative to `relative_to`.
struct ManifestEntry {
    std::string name;
    std::filesystem::path edges;
    std::filesystem::path features;
    std::optional<std::filesystem::path> labels;
};
ManifestEntry save_graph(const LabeledGraph& g, const std::filesystem::path& dir);
void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& manifest);

// ---- partitioning ----

/// Greedy BFS partitioner into m balanced parts (sizes differ by at most one).
/// seed == 0 keeps the natural node order; any other seed shuffles the order in which
/// nodes are considered for seeding and neighbor expansion.
std::vector<LabeledGraph> partition(const LabeledGraph& g, std::size_t parts, std::uint64_t seed = 0);

/// Induced subgraphs for an explicit node->part assignment (ids must be exactly 0..m-1).
std::vector<LabeledGraph> partition_from_assignment(const LabeledGraph& g, std::span<const std::size_t> assignment);
std::vector<LabeledGraph> load_partition_assignment(const LabeledGraph& g, const std::filesystem::path& file);

/// Number of edges of g whose endpoints land in different parts.
std::size_t count_dropped_edges(const LabeledGraph& g, const std::vector<LabeledGraph>& parts);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace resgntk
