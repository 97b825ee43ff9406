#include "resgntk/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "resgntk/errors.hpp"
#include "resgntk/text.hpp"

namespace resgntk {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& h, const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
}

template <class T>
void fnv_value(std::uint64_t& h, T v) {
    fnv_mix(h, &v, sizeof v);
}

bool skip_line(std::string_view line) {
    auto t = text::trim(line);
    return t.empty() || t.front() == '#';
}

}  // namespace

LabeledGraph::LabeledGraph(std::string name, std::size_t node_count, std::vector<Edge> edges, Matrix features,
                           std::optional<std::vector<ClassId>> labels)
    : name_(std::move(name)), node_count_(node_count), features_(std::move(features)), labels_(std::move(labels)) {
    if (static_cast<std::size_t>(features_.rows()) != node_count_) {
        throw ShapeError("graph '" + name_ + "': feature rows " + std::to_string(features_.rows()) +
                         " != node count " + std::to_string(node_count_));
    }
    if (labels_ && labels_->size() != node_count_) {
        throw ShapeError("graph '" + name_ + "': label count " + std::to_string(labels_->size()) +
                         " != node count " + std::to_string(node_count_));
    }
    if (labels_) {
        for (ClassId c : *labels_) {
            if (c < 0) throw ArgumentError("graph '" + name_ + "': negative class id " + std::to_string(c));
        }
    }
    if (!features_.allFinite()) throw DataError("graph '" + name_ + "': non-finite feature value");

    for (auto& [u, v] : edges) {
        if (u >= node_count_ || v >= node_count_) {
            throw IndexError("graph '" + name_ + "': edge (" + std::to_string(u) + ", " + std::to_string(v) +
                             ") has endpoint >= node count " + std::to_string(node_count_));
        }
        if (u == v) {
            throw ArgumentError("graph '" + name_ + "': explicit self-loop at node " + std::to_string(u) +
                                " (self-inclusion is implicit)");
        }
        if (u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);

    std::vector<std::size_t> degree(node_count_, 1);
    for (auto [u, v] : edges_) {
        ++degree[u];
        ++degree[v];
    }
    offsets_.assign(node_count_ + 1, 0);
    for (std::size_t u = 0; u < node_count_; ++u) offsets_[u + 1] = offsets_[u] + degree[u];
    neighbors_.resize(offsets_.back());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t u = 0; u < node_count_; ++u) neighbors_[fill[u]++] = u;
    for (auto [u, v] : edges_) {
        neighbors_[fill[u]++] = v;
        neighbors_[fill[v]++] = u;
    }
    for (std::size_t u = 0; u < node_count_; ++u) {
        std::sort(neighbors_.begin() + static_cast<std::ptrdiff_t>(offsets_[u]),
                  neighbors_.begin() + static_cast<std::ptrdiff_t>(offsets_[u + 1]));
    }
}

void LabeledGraph::check_node(NodeIndex u) const {
    if (u >= node_count_) {
        throw IndexError("node " + std::to_string(u) + " out of range for graph '" + name_ + "' with " +
                         std::to_string(node_count_) + " nodes");
    }
}

std::span<const NodeIndex> LabeledGraph::closed_neighborhood(NodeIndex u) const {
    check_node(u);
    return {neighbors_.data() + offsets_[u], offsets_[u + 1] - offsets_[u]};
}

double LabeledGraph::norm_factor(NodeIndex u) const {
    check_node(u);
    return 1.0 / static_cast<double>(offsets_[u + 1] - offsets_[u]);
}

void LabeledGraph::set_source_nodes(std::vector<NodeIndex> ids) {
    if (!ids.empty() && ids.size() != node_count_) {
        throw ShapeError("source node mapping has " + std::to_string(ids.size()) + " entries, expected " +
                         std::to_string(node_count_));
    }
    source_nodes_ = std::move(ids);
}

LabeledGraph LabeledGraph::with_name(std::string name) const {
    LabeledGraph g = *this;
    g.name_ = std::move(name);
    return g;
}

LabeledGraph LabeledGraph::without_labels() const {
    LabeledGraph g = *this;
    g.labels_.reset();
    return g;
}

LabeledGraph LabeledGraph::induced_subgraph(std::span<const NodeIndex> nodes, std::string name) const {
    std::vector<std::size_t> local(node_count_, static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        check_node(nodes[i]);
        if (local[nodes[i]] != static_cast<std::size_t>(-1)) throw ArgumentError("duplicate node in subgraph set");
        local[nodes[i]] = i;
    }
    std::vector<Edge> sub_edges;
    for (auto [u, v] : edges_) {
        if (local[u] != static_cast<std::size_t>(-1) && local[v] != static_cast<std::size_t>(-1)) {
            sub_edges.emplace_back(local[u], local[v]);
        }
    }
    Matrix sub_features(static_cast<Eigen::Index>(nodes.size()), features_.cols());
    std::optional<std::vector<ClassId>> sub_labels;
    if (labels_) sub_labels.emplace(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        sub_features.row(static_cast<Eigen::Index>(i)) = features_.row(static_cast<Eigen::Index>(nodes[i]));
        if (labels_) (*sub_labels)[i] = (*labels_)[nodes[i]];
    }
    LabeledGraph sub(std::move(name), nodes.size(), std::move(sub_edges), std::move(sub_features),
                     std::move(sub_labels));
    sub.source_nodes_.assign(nodes.begin(), nodes.end());
    return sub;
}

LabeledGraph LabeledGraph::permuted(std::span<const NodeIndex> perm) const {
    if (perm.size() != node_count_) throw ShapeError("permutation size mismatch");
    LabeledGraph g = induced_subgraph(perm, name_);
    if (!source_nodes_.empty()) {
        std::vector<NodeIndex> src(node_count_);
        for (std::size_t i = 0; i < node_count_; ++i) src[i] = source_nodes_[perm[i]];
        g.source_nodes_ = std::move(src);
    } else {
        g.source_nodes_.clear();
    }
    return g;
}

std::uint64_t LabeledGraph::content_hash() const {
    std::uint64_t h = kFnvOffset;
    fnv_value(h, static_cast<std::uint64_t>(node_count_));
    fnv_value(h, static_cast<std::uint64_t>(features_.cols()));
    for (auto [u, v] : edges_) {
        fnv_value(h, static_cast<std::uint64_t>(u));
        fnv_value(h, static_cast<std::uint64_t>(v));
    }
    fnv_mix(h, features_.data(), static_cast<std::size_t>(features_.size()) * sizeof(double));
    fnv_value(h, static_cast<std::uint8_t>(labels_.has_value()));
    if (labels_) {
        for (ClassId c : *labels_) fnv_value(h, static_cast<std::int64_t>(c));
    }
    return h;
}

// ---- Dataset ----

std::size_t Dataset::feature_dim() const { return graphs.empty() ? 0 : graphs.front().feature_dim(); }

std::size_t Dataset::total_nodes() const {
    std::size_t n = 0;
    for (const auto& g : graphs) n += g.node_count();
    return n;
}

std::vector<ClassId> Dataset::classes() const {
    std::set<ClassId> seen;
    for (const auto& g : graphs) {
        if (g.labels()) seen.insert(g.labels()->begin(), g.labels()->end());
    }
    return {seen.begin(), seen.end()};
}

void Dataset::check_feature_dims() const {
    for (const auto& g : graphs) {
        if (g.feature_dim() != feature_dim()) {
            throw ShapeError("graph '" + g.name() + "' has feature dimension " + std::to_string(g.feature_dim()) +
                             ", expected " + std::to_string(feature_dim()));
        }
    }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out;
    for (std::size_t i : indices) {
        if (i >= graphs.size()) {
            throw IndexError("graph index " + std::to_string(i) + " out of range (" + std::to_string(graphs.size()) +
                             " graphs)");
        }
        out.graphs.push_back(graphs[i]);
    }
    return out;
}

// ---- parsing ----

std::vector<Edge> parse_edges(std::string_view content) {
    std::vector<Edge> edges;
    text::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
        if (skip_line(line)) return;
        auto tokens = text::split_whitespace(line);
        std::size_t u = 0, v = 0;
        if (tokens.size() != 2 || !text::parse_size(tokens[0], u) || !text::parse_size(tokens[1], v)) {
            throw ParseError("edge file: expected two non-negative integers", line_no);
        }
        if (u == v) throw ParseError("edge file: explicit self-loop '" + std::string(line) + "'", line_no);
        edges.emplace_back(u, v);
    });
    return edges;
}

Matrix parse_features(std::string_view content) {
    std::vector<std::vector<double>> rows;
    text::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
        if (skip_line(line)) return;
        std::vector<double> row;
        for (auto cell : text::split(line, ',')) {
            double value = 0;
            if (!text::parse_double(text::trim(cell), value)) {
                throw ParseError("feature file: bad number '" + std::string(text::trim(cell)) + "'", line_no);
            }
            row.push_back(value);
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ParseError("feature file: row has " + std::to_string(row.size()) + " columns, expected " +
                                 std::to_string(rows.front().size()),
                             line_no);
        }
        rows.push_back(std::move(row));
    });
    const auto d = rows.empty() ? 0 : rows.front().size();
    Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t k = 0; k < d; ++k) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
    return x;
}

std::vector<ClassId> parse_labels(std::string_view content) {
    std::vector<ClassId> labels;
    text::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
        if (skip_line(line)) return;
        long long v = 0;
        if (!text::parse_int(text::trim(line), v) || v < 0 || v > std::numeric_limits<ClassId>::max()) {
            throw ParseError("label file: expected a non-negative integer class id", line_no);
        }
        labels.push_back(static_cast<ClassId>(v));
    });
    return labels;
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

namespace {

template <class Parse>
auto parse_file(const fs::path& path, Parse&& parse) {
    const std::string content = read_text_file(path);
    try {
        return parse(content);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace

LabeledGraph load_graph(const fs::path& edge_file, const fs::path& feature_file,
                        const std::optional<fs::path>& label_file, std::string name) {
    auto edges = parse_file(edge_file, parse_edges);
    Matrix features = parse_file(feature_file, parse_features);
    std::optional<std::vector<ClassId>> labels;
    if (label_file) labels = parse_file(*label_file, parse_labels);
    if (name.empty()) name = edge_file.stem().string();
    const auto n = static_cast<std::size_t>(features.rows());
    return LabeledGraph(std::move(name), n, std::move(edges), std::move(features), std::move(labels));
}

Dataset load_manifest(const fs::path& manifest) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(manifest));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(manifest.string() + ": " + e.what());
    }
    if (!doc.is_array()) throw ParseError(manifest.string() + ": manifest must be a JSON array");
    const fs::path base = manifest.parent_path();
    Dataset ds;
    for (const auto& entry : doc) {
        if (!entry.is_object() || !entry.contains("edges") || !entry.contains("features")) {
            throw ParseError(manifest.string() + ": entry needs 'edges' and 'features'");
        }
        std::optional<fs::path> labels;
        if (entry.contains("labels") && !entry["labels"].is_null()) {
            labels = base / entry["labels"].get<std::string>();
        }
        std::string name = entry.value("name", std::string{});
        ds.graphs.push_back(load_graph(base / entry["edges"].get<std::string>(),
                                       base / entry["features"].get<std::string>(), labels, std::move(name)));
        if (entry.contains("nodes")) {
            auto ids = parse_file(base / entry["nodes"].get<std::string>(), [](std::string_view s) {
                std::vector<NodeIndex> out;
                for (ClassId v : parse_labels(s)) out.push_back(static_cast<NodeIndex>(v));
                return out;
            });
            ds.graphs.back().set_source_nodes(std::move(ids));
        }
    }
    ds.check_feature_dims();
    return ds;
}

ManifestEntry save_graph(const LabeledGraph& g, const fs::path& dir) {
    fs::create_directories(dir);
    std::string edges;
    for (auto [u, v] : g.edges()) edges += std::to_string(u) + ' ' + std::to_string(v) + '\n';
    std::string feats;
    for (Eigen::Index i = 0; i < g.features().rows(); ++i) {
        for (Eigen::Index k = 0; k < g.features().cols(); ++k) {
            if (k) feats += ',';
            feats += text::format_double(g.features()(i, k));
        }
        feats += '\n';
    }
    ManifestEntry entry{g.name(), dir / "edges.txt", dir / "features.csv", std::nullopt};
    write_text_file(entry.edges, edges);
    write_text_file(entry.features, feats);
    if (g.labels()) {
        std::string labels;
        for (ClassId c : *g.labels()) labels += std::to_string(c) + '\n';
        entry.labels = dir / "labels.txt";
        write_text_file(*entry.labels, labels);
    }
    if (!g.source_nodes().empty()) {
        std::string ids;
        for (NodeIndex v : g.source_nodes()) ids += std::to_string(v) + '\n';
        write_text_file(dir / "nodes.txt", ids);
    }
    return entry;
}

void write_manifest(const std::vector<ManifestEntry>& entries, const fs::path& manifest) {
    const fs::path base = fs::absolute(manifest).parent_path();
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& e : entries) {
        nlohmann::json item;
        item["name"] = e.name;
        item["edges"] = fs::relative(fs::absolute(e.edges), base).generic_string();
        item["features"] = fs::relative(fs::absolute(e.features), base).generic_string();
        if (e.labels) item["labels"] = fs::relative(fs::absolute(*e.labels), base).generic_string();
        const fs::path nodes = e.edges.parent_path() / "nodes.txt";
        if (fs::exists(nodes)) item["nodes"] = fs::relative(fs::absolute(nodes), base).generic_string();
        doc.push_back(std::move(item));
    }
    write_text_file(manifest, doc.dump(2) + "\n");
}

// ---- partitioning ----

namespace {

std::string part_name(const LabeledGraph& g, std::size_t k, std::size_t parts) {
    const auto width = std::to_string(parts - 1).size();
    std::string idx = std::to_string(k);
    return g.name() + ".part" + std::string(width - std::min(width, idx.size()), '0') + idx;
}

std::vector<LabeledGraph> build_parts(const LabeledGraph& g, std::vector<std::vector<NodeIndex>> node_sets) {
    std::vector<LabeledGraph> out;
    out.reserve(node_sets.size());
    for (std::size_t k = 0; k < node_sets.size(); ++k) {
        std::sort(node_sets[k].begin(), node_sets[k].end());
        out.push_back(g.induced_subgraph(node_sets[k], part_name(g, k, node_sets.size())));
    }
    return out;
}

}  // namespace

std::vector<LabeledGraph> partition(const LabeledGraph& g, std::size_t parts, std::uint64_t seed) {
    const std::size_t n = g.node_count();
    if (parts == 0) throw ArgumentError("partition: number of parts must be positive");
    if (parts > n) {
        throw ArgumentError("partition: " + std::to_string(parts) + " parts requested for " + std::to_string(n) +
                            " nodes");
    }
    std::vector<NodeIndex> order(n);
    std::iota(order.begin(), order.end(), NodeIndex{0});
    if (seed != 0) {
        std::mt19937_64 rng(seed);
        std::shuffle(order.begin(), order.end(), rng);
    }
    std::vector<std::size_t> rank(n);
    for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;

    std::vector<bool> assigned(n, false);
    std::size_t next_seed = 0;  // position in `order`
    std::size_t remaining = n;
    std::vector<std::vector<NodeIndex>> sets(parts);
    std::vector<NodeIndex> nbrs;
    for (std::size_t k = 0; k < parts; ++k) {
        const std::size_t target = (remaining + (parts - k) - 1) / (parts - k);
        auto& set = sets[k];
        std::deque<NodeIndex> queue;
        auto claim = [&](NodeIndex v) {
            assigned[v] = true;
            set.push_back(v);
            queue.push_back(v);
        };
        while (set.size() < target) {
            if (queue.empty()) {
                while (assigned[order[next_seed]]) ++next_seed;
                claim(order[next_seed]);
                continue;
            }
            const NodeIndex u = queue.front();
            queue.pop_front();
            auto hood = g.closed_neighborhood(u);
            nbrs.assign(hood.begin(), hood.end());
            std::sort(nbrs.begin(), nbrs.end(), [&](NodeIndex a, NodeIndex b) { return rank[a] < rank[b]; });
            for (NodeIndex v : nbrs) {
                if (set.size() >= target) break;
                if (!assigned[v]) claim(v);
            }
        }
        remaining -= set.size();
    }
    return build_parts(g, std::move(sets));
}

std::vector<LabeledGraph> partition_from_assignment(const LabeledGraph& g, std::span<const std::size_t> assignment) {
    if (assignment.size() != g.node_count()) {
        throw ShapeError("partition assignment has " + std::to_string(assignment.size()) + " entries, graph has " +
                         std::to_string(g.node_count()) + " nodes");
    }
    std::size_t parts = 0;
    for (auto p : assignment) parts = std::max(parts, p + 1);
    std::vector<std::vector<NodeIndex>> sets(parts);
    for (std::size_t v = 0; v < assignment.size(); ++v) sets[assignment[v]].push_back(v);
    for (std::size_t k = 0; k < parts; ++k) {
        if (sets[k].empty()) {
            throw ArgumentError("partition assignment ids are not contiguous: part " + std::to_string(k) +
                                " is empty");
        }
    }
    return build_parts(g, std::move(sets));
}

std::vector<LabeledGraph> load_partition_assignment(const LabeledGraph& g, const fs::path& file) {
    const std::string content = read_text_file(file);
    std::vector<std::size_t> assignment;
    text::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
        if (skip_line(line)) return;
        std::size_t p = 0;
        if (!text::parse_size(text::trim(line), p)) {
            throw ParseError(file.string() + ": expected a non-negative part id", line_no);
        }
        assignment.push_back(p);
    });
    return partition_from_assignment(g, assignment);
}

std::size_t count_dropped_edges(const LabeledGraph& g, const std::vector<LabeledGraph>& parts) {
    std::size_t kept = 0;
    for (const auto& p : parts) kept += p.edges().size();
    return g.edges().size() - kept;
}

}  // namespace resgntk
