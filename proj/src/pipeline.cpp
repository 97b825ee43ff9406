#include "resgntk/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>

#include "json.hpp"

#include "resgntk/errors.hpp"
#include "resgntk/text.hpp"

namespace resgntk {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- cache ----

fs::path KernelCache::path_for(std::span<const LabeledGraph> rows, std::span<const LabeledGraph> cols,
                               const KernelConfig& config) const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xffU;
            h *= 1099511628211ULL;
        }
    };
    auto mix_str = [&](const std::string& s) {
        mix(s.size());
        for (unsigned char ch : s) mix(ch);
    };
    mix(static_cast<std::uint64_t>(config.layers));
    mix(config.variant == Variant::residual ? 1 : 2);
    mix(config.jumping_knowledge);
    mix(config.normalize);
    mix(rows.size());
    for (const auto& g : rows) {
        mix(g.content_hash());
        mix_str(g.name());
    }
    mix(cols.size());
    for (const auto& g : cols) {
        mix(g.content_hash());
        mix_str(g.name());
    }
    char name[40];
    std::snprintf(name, sizeof name, "%016llx.kernel", static_cast<unsigned long long>(h));
    return dir_ / name;
}

std::optional<BlockKernelMatrix> KernelCache::load(const fs::path& path) const {
    if (!fs::exists(path)) return std::nullopt;
    return read_kernel_file(path);
}

void KernelCache::store(const fs::path& path, const BlockKernelMatrix& k) const {
    // Write-then-rename so a concurrent reader never sees a partial file.
    const fs::path tmp = path.string() + ".tmp";
    write_kernel_file(tmp, k);
    fs::rename(tmp, path);
}

// ---- assembly ----

namespace {

void require_nonempty(const Dataset& dataset) {
    if (dataset.graphs.empty()) throw ArgumentError("dataset has no graphs");
}

std::vector<BlockInfo> blocks_of(std::span<const LabeledGraph> graphs) {
    std::vector<std::pair<std::string, std::size_t>> sizes;
    for (const auto& g : graphs) sizes.emplace_back(g.name(), g.node_count());
    return make_blocks(sizes);
}

std::vector<GraphProfile> profiles_of(std::span<const LabeledGraph> graphs, const KernelConfig& config,
                                      Parallelism par) {
    std::vector<GraphProfile> out(graphs.size());
    const unsigned workers = par.resolved();
    const Parallelism inner{graphs.size() >= workers ? 1u : workers};
    parallel_for(graphs.size(), par, [&](std::size_t i) { out[i] = graph_profile(graphs[i], config, inner); });
    return out;
}

bool cached_matches(const BlockKernelMatrix& k, const std::vector<BlockInfo>& rows,
                    const std::vector<BlockInfo>& cols, const KernelConfig& config) {
    return k.config == config && k.row_blocks == rows && k.col_blocks == cols;
}

}  // namespace

BlockKernelMatrix assemble_train_kernel(const Dataset& dataset, const KernelConfig& config,
                                        const PipelineOptions& options) {
    config.validate();
    require_nonempty(dataset);
    dataset.check_feature_dims();
    for (const auto& g : dataset.graphs) {
        if (!g.has_labels()) throw ArgumentError("training graph '" + g.name() + "' has no labels");
    }

    BlockKernelMatrix k;
    k.config = config;
    k.col_blocks = blocks_of(dataset.graphs);
    k.row_blocks = k.col_blocks;

    fs::path cache_path;
    if (options.cache) {
        cache_path = options.cache->path_for(dataset.graphs, dataset.graphs, config);
        if (auto hit = options.cache->load(cache_path); hit && cached_matches(*hit, k.row_blocks, k.col_blocks, config)) {
            return *hit;
        }
    }

    const auto& graphs = dataset.graphs;
    const auto profiles = profiles_of(graphs, config, options.par);
    std::vector<std::pair<std::size_t, std::size_t>> jobs;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        for (std::size_t j = i; j < graphs.size(); ++j) jobs.emplace_back(i, j);
    }
    const unsigned workers = options.par.resolved();
    const Parallelism inner{jobs.size() >= workers ? 1u : workers};
    std::vector<Matrix> blocks(jobs.size());
    parallel_for(jobs.size(), options.par, [&](std::size_t t) {
        const auto [i, j] = jobs[t];
        blocks[t] = gntk_pair(graphs[i], profiles[i], graphs[j], profiles[j], config, inner);
    });

    const auto total = static_cast<Eigen::Index>(dataset.total_nodes());
    k.values.resize(total, total);
    for (std::size_t t = 0; t < jobs.size(); ++t) {
        const auto [i, j] = jobs[t];
        const auto& bi = k.row_blocks[i];
        const auto& bj = k.col_blocks[j];
        const auto oi = static_cast<Eigen::Index>(bi.offset), oj = static_cast<Eigen::Index>(bj.offset);
        const auto ni = static_cast<Eigen::Index>(bi.nodes), nj = static_cast<Eigen::Index>(bj.nodes);
        k.values.block(oi, oj, ni, nj) = blocks[t];
        if (i != j) k.values.block(oj, oi, nj, ni) = blocks[t].transpose();
    }
    if (options.cache) options.cache->store(cache_path, k);
    return k;
}

BlockKernelMatrix assemble_test_kernel(const LabeledGraph& g0, const Dataset& dataset, const KernelConfig& config,
                                       const PipelineOptions& options) {
    config.validate();
    require_nonempty(dataset);
    dataset.check_feature_dims();
    if (g0.feature_dim() != dataset.feature_dim()) {
        throw ShapeError("test graph feature dimension " + std::to_string(g0.feature_dim()) +
                         " != training dimension " + std::to_string(dataset.feature_dim()));
    }

    BlockKernelMatrix k;
    k.config = config;
    k.col_blocks = blocks_of(dataset.graphs);
    k.row_blocks = make_blocks({{g0.name(), g0.node_count()}});

    const std::span<const LabeledGraph> row_graphs(&g0, 1);
    fs::path cache_path;
    if (options.cache) {
        cache_path = options.cache->path_for(row_graphs, dataset.graphs, config);
        if (auto hit = options.cache->load(cache_path); hit && cached_matches(*hit, k.row_blocks, k.col_blocks, config)) {
            return *hit;
        }
    }

    const auto& graphs = dataset.graphs;
    const auto profiles = profiles_of(graphs, config, options.par);
    const GraphProfile p0 = graph_profile(g0, config, options.par);
    const unsigned workers = options.par.resolved();
    const Parallelism inner{graphs.size() >= workers ? 1u : workers};
    std::vector<Matrix> blocks(graphs.size());
    parallel_for(graphs.size(), options.par, [&](std::size_t j) {
        blocks[j] = gntk_pair(g0, p0, graphs[j], profiles[j], config, inner);
    });

    k.values.resize(static_cast<Eigen::Index>(g0.node_count()), static_cast<Eigen::Index>(dataset.total_nodes()));
    for (std::size_t j = 0; j < graphs.size(); ++j) {
        k.values.middleCols(static_cast<Eigen::Index>(k.col_blocks[j].offset),
                            static_cast<Eigen::Index>(k.col_blocks[j].nodes)) = blocks[j];
    }
    if (options.cache) options.cache->store(cache_path, k);
    return k;
}

// ---- training / inference ----

std::vector<ClassId> concatenated_labels(const Dataset& dataset) {
    std::vector<ClassId> labels;
    labels.reserve(dataset.total_nodes());
    for (const auto& g : dataset.graphs) {
        if (!g.labels()) throw ArgumentError("training graph '" + g.name() + "' has no labels");
        labels.insert(labels.end(), g.labels()->begin(), g.labels()->end());
    }
    return labels;
}

TrainedModel fit_kernel(const BlockKernelMatrix& kernel, std::span<const ClassId> labels, const SvmConfig& svm_config,
                        Parallelism par) {
    if (kernel.values.rows() != kernel.values.cols()) throw ShapeError("training kernel must be square");
    TrainedModel model;
    model.svm = train_multiclass(kernel.values, labels, svm_config, par);
    model.kernel = kernel.config;
    for (const auto& b : kernel.col_blocks) {
        model.graph_names.push_back(b.name);
        model.node_counts.push_back(b.nodes);
    }
    return model;
}

FitResult fit(const Dataset& dataset, const KernelConfig& kernel_config, const SvmConfig& svm_config,
              const PipelineOptions& options) {
    svm_config.validate();
    require_nonempty(dataset);
    const auto labels = concatenated_labels(dataset);
    if (std::adjacent_find(labels.begin(), labels.end(), std::not_equal_to<>()) == labels.end()) {
        throw ArgumentError("training labels contain a single class");
    }
    FitResult out;
    out.kernel = assemble_train_kernel(dataset, kernel_config, options);
    out.model = fit_kernel(out.kernel, labels, svm_config, options.par);
    return out;
}

void check_model_consistency(const TrainedModel& model, const Dataset& dataset, const KernelConfig& config) {
    if (!(model.kernel == config)) {
        throw ConsistencyError("kernel config mismatch: model was trained with " + describe(model.kernel) +
                               ", requested " + describe(config));
    }
    if (model.node_counts.size() != dataset.graphs.size()) {
        throw ConsistencyError("model was trained on " + std::to_string(model.node_counts.size()) +
                               " graphs, dataset has " + std::to_string(dataset.graphs.size()));
    }
    for (std::size_t i = 0; i < dataset.graphs.size(); ++i) {
        if (model.node_counts[i] != dataset.graphs[i].node_count()) {
            throw ConsistencyError("training graph " + std::to_string(i) + " ('" + dataset.graphs[i].name() +
                                   "') has " + std::to_string(dataset.graphs[i].node_count()) +
                                   " nodes, model expects " + std::to_string(model.node_counts[i]));
        }
        if (i < model.graph_names.size() && model.graph_names[i] != dataset.graphs[i].name()) {
            throw ConsistencyError("training graph " + std::to_string(i) + " is '" + dataset.graphs[i].name() +
                                   "', model expects '" + model.graph_names[i] + "'");
        }
    }
}

std::vector<ClassId> infer(const LabeledGraph& g0, const Dataset& dataset, const TrainedModel& model,
                           const KernelConfig& config, const PipelineOptions& options) {
    check_model_consistency(model, dataset, config);
    const auto k0 = assemble_test_kernel(g0, dataset, config, options);
    return predict(k0.values, model.svm);
}

double evaluate(std::span<const ClassId> predicted, std::span<const ClassId> truth) {
    return evaluation_report(predicted, truth).accuracy;
}

EvaluationReport evaluation_report(std::span<const ClassId> predicted, std::span<const ClassId> truth) {
    if (predicted.size() != truth.size()) {
        throw ShapeError("prediction count " + std::to_string(predicted.size()) + " != truth count " +
                         std::to_string(truth.size()));
    }
    EvaluationReport r;
    r.n_test = truth.size();
    std::map<ClassId, std::pair<std::size_t, std::size_t>> per;  // hits, total
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool hit = predicted[i] == truth[i];
        hits += hit;
        auto& [h, t] = per[truth[i]];
        h += hit;
        ++t;
    }
    r.accuracy = truth.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
    for (const auto& [c, ht] : per) {
        r.per_class_accuracy[c] = static_cast<double>(ht.first) / static_cast<double>(ht.second);
    }
    return r;
}

std::vector<std::size_t> choose_partitions(std::size_t total, std::size_t m, std::uint64_t seed) {
    if (m == 0 || m > total) {
        throw ArgumentError("cannot choose " + std::to_string(m) + " of " + std::to_string(total) + " partitions");
    }
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates with explicit index draws keeps the result library-independent.
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (total - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    return idx;
}

// ---- file formats ----

namespace {

json config_json(const KernelConfig& c) {
    return {{"layers", c.layers},
            {"variant", to_string(c.variant)},
            {"jumping_knowledge", c.jumping_knowledge},
            {"normalize", c.normalize}};
}

KernelConfig config_from_json(const json& j) {
    KernelConfig c;
    c.layers = j.at("layers").get<int>();
    c.variant = parse_variant(j.at("variant").get<std::string>());
    c.jumping_knowledge = j.at("jumping_knowledge").get<bool>();
    c.normalize = j.at("normalize").get<bool>();
    return c;
}

}  // namespace

std::string format_model(const TrainedModel& model) {
    json doc;
    doc["format"] = "resgntk-model v1";
    doc["classes"] = model.svm.classes;
    json per = json::array();
    for (std::size_t c = 0; c < model.svm.models.size(); ++c) {
        const auto& bm = model.svm.models[c];
        json coefs = json::object();
        for (std::size_t i : bm.support_indices) coefs[std::to_string(i)] = bm.dual_coefs[i];
        per.push_back({{"class", model.svm.classes[c]},
                       {"bias", bm.bias},
                       {"dual_coefs", std::move(coefs)},
                       {"converged", bm.converged},
                       {"iterations", bm.iterations}});
    }
    doc["per_class"] = std::move(per);
    doc["training_nodes"] = model.svm.training_nodes;
    doc["training_graph_names"] = model.graph_names;
    doc["training_node_counts"] = model.node_counts;
    doc["kernel_config"] = config_json(model.kernel);
    doc["solver"] = {{"C", model.svm.config.c},
                     {"tol", model.svm.config.tol},
                     {"max_passes", model.svm.config.max_passes},
                     {"diagonal_jitter", model.svm.diagonal_jitter}};
    doc["converged"] = model.svm.converged();
    return doc.dump(2) + "\n";
}

TrainedModel parse_model(std::string_view content) {
    TrainedModel model;
    try {
        const json doc = json::parse(content);
        if (doc.value("format", std::string{}) != "resgntk-model v1") throw ParseError("model file: unknown format");
        model.svm.classes = doc.at("classes").get<std::vector<ClassId>>();
        model.svm.training_nodes = doc.at("training_nodes").get<std::size_t>();
        const auto& solver = doc.at("solver");
        model.svm.config.c = solver.at("C").get<double>();
        model.svm.config.tol = solver.at("tol").get<double>();
        model.svm.config.max_passes = solver.at("max_passes").get<std::size_t>();
        model.svm.diagonal_jitter = solver.value("diagonal_jitter", 0.0);
        const auto& per = doc.at("per_class");
        if (per.size() != model.svm.classes.size()) throw ParseError("model file: per_class size mismatch");
        for (std::size_t c = 0; c < per.size(); ++c) {
            const auto& item = per[c];
            if (item.at("class").get<ClassId>() != model.svm.classes[c]) {
                throw ParseError("model file: per_class order does not match classes");
            }
            BinaryModel bm;
            bm.config = model.svm.config;
            bm.bias = item.at("bias").get<double>();
            bm.converged = item.value("converged", true);
            bm.iterations = item.value("iterations", std::size_t{0});
            bm.dual_coefs.assign(model.svm.training_nodes, 0.0);
            for (const auto& [key, value] : item.at("dual_coefs").items()) {
                std::size_t idx = 0;
                if (!text::parse_size(key, idx) || idx >= model.svm.training_nodes) {
                    throw ParseError("model file: bad dual coefficient index '" + key + "'");
                }
                bm.dual_coefs[idx] = value.get<double>();
                bm.support_indices.push_back(idx);
            }
            std::sort(bm.support_indices.begin(), bm.support_indices.end());
            model.svm.models.push_back(std::move(bm));
        }
        model.graph_names = doc.at("training_graph_names").get<std::vector<std::string>>();
        model.node_counts = doc.at("training_node_counts").get<std::vector<std::size_t>>();
        model.kernel = config_from_json(doc.at("kernel_config"));
    } catch (const json::exception& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
    return model;
}

void write_model_file(const fs::path& path, const TrainedModel& model) { write_text_file(path, format_model(model)); }

TrainedModel read_model_file(const fs::path& path) {
    try {
        return parse_model(read_text_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string format_predictions(const std::string& graph_name, std::span<const ClassId> labels) {
    std::string out = "#graph " + graph_name + " #nodes " + std::to_string(labels.size()) + "\n";
    for (ClassId c : labels) out += std::to_string(c) + '\n';
    return out;
}

std::vector<ClassId> read_label_like_file(const fs::path& path) {
    try {
        return parse_labels(read_text_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string format_report(const EvaluationReport& report, const std::optional<KernelConfig>& config) {
    json doc;
    doc["accuracy"] = report.accuracy;
    json per = json::object();
    for (const auto& [c, acc] : report.per_class_accuracy) per[std::to_string(c)] = acc;
    doc["per_class_accuracy"] = std::move(per);
    doc["n_test"] = report.n_test;
    doc["config"] = config ? config_json(*config) : json(nullptr);
    return doc.dump(2) + "\n";
}

}  // namespace resgntk
