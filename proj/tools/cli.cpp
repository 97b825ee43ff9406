#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "resgntk/errors.hpp"
#include "resgntk/experiments.hpp"
#include "resgntk/graph.hpp"
#include "resgntk/pipeline.hpp"
#include "resgntk/synthetic.hpp"
#include "resgntk/text.hpp"

namespace resgntk::cli {

namespace fs = std::filesystem;

namespace {

struct KernelOptions {
    int layers = 2;
    std::string variant = "residual";
    bool no_jumping_knowledge = false;
    bool normalize = false;

    CLI::Option* layers_opt = nullptr;
    CLI::Option* variant_opt = nullptr;
    CLI::Option* jk_opt = nullptr;
    CLI::Option* normalize_opt = nullptr;

    void add(CLI::App* app) {
        layers_opt = app->add_option("--layers", layers, "Kernel depth L")->check(CLI::PositiveNumber);
        variant_opt = app->add_option("--variant", variant, "residual or vanilla")
                          ->check(CLI::IsMember({"residual", "vanilla"}));
        jk_opt = app->add_flag("--no-jumping-knowledge", no_jumping_knowledge,
                               "Use only the last layer instead of summing all layers");
        normalize_opt = app->add_flag("--normalize", normalize, "Scale kernel entries to unit self-similarity");
    }

    KernelConfig config() const {
        KernelConfig c;
        c.layers = layers;
        c.variant = parse_variant(variant);
        c.jumping_knowledge = !no_jumping_knowledge;
        c.normalize = normalize;
        c.validate();
        return c;
    }

    bool any_given() const {
        return layers_opt->count() + variant_opt->count() + jk_opt->count() + normalize_opt->count() > 0;
    }

    /// Flags not given on the command line take the model's value.
    KernelConfig merged_with(const KernelConfig& model) const {
        KernelConfig c = model;
        if (layers_opt->count()) c.layers = layers;
        if (variant_opt->count()) c.variant = parse_variant(variant);
        if (jk_opt->count()) c.jumping_knowledge = !no_jumping_knowledge;
        if (normalize_opt->count()) c.normalize = normalize;
        c.validate();
        return c;
    }
};

struct SvmOptions {
    double c = 1.0;
    double tol = 1e-3;
    std::size_t max_passes = 0;

    void add(CLI::App* app) {
        app->add_option("--c", c, "SVM soft-margin penalty")->check(CLI::PositiveNumber);
        app->add_option("--tol", tol, "SMO KKT tolerance")->check(CLI::PositiveNumber);
        app->add_option("--max-passes", max_passes, "Stalled updates before giving up (0 = 10*n)");
    }

    SvmConfig config() const { return {c, tol, max_passes}; }
};

template <class T>
std::vector<T> parse_list(const std::string& s, const char* what) {
    std::vector<T> out;
    for (auto tok : text::split(s, ',')) {
        tok = text::trim(tok);
        if (tok.empty()) continue;
        if constexpr (std::is_floating_point_v<T>) {
            double v = 0;
            if (!text::parse_double(tok, v)) throw ArgumentError(std::string("bad value in ") + what);
            out.push_back(v);
        } else {
            long long v = 0;
            if (!text::parse_int(tok, v) || v < 0) throw ArgumentError(std::string("bad value in ") + what);
            out.push_back(static_cast<T>(v));
        }
    }
    if (out.empty()) throw ArgumentError(std::string(what) + " is empty");
    return out;
}

LabeledGraph pick_graph(const Dataset& ds, std::size_t index, const std::string& what) {
    if (index >= ds.graphs.size()) {
        throw ArgumentError(what + " index " + std::to_string(index) + " out of range (" +
                            std::to_string(ds.graphs.size()) + " graphs)");
    }
    return ds.graphs[index];
}

Dataset restrict_by_names(const Dataset& ds, const std::vector<std::string>& names) {
    Dataset out;
    for (const auto& name : names) {
        auto it = std::find_if(ds.graphs.begin(), ds.graphs.end(),
                               [&](const LabeledGraph& g) { return g.name() == name; });
        if (it == ds.graphs.end()) {
            throw ConsistencyError("model was trained on graph '" + name + "', which is not in the manifest");
        }
        out.graphs.push_back(*it);
    }
    return out;
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Residual graph neural tangent kernels for inductive node classification", "resgntk"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "resgntk 0.1.0");

    unsigned threads = 0;
    auto add_threads = [&](CLI::App* sub) {
        sub->add_option("--threads", threads, "Worker threads (default: all cores; 1 = serial)");
    };

    // partition
    auto* partition_cmd = app.add_subcommand("partition", "Split one graph into disjoint induced subgraphs");
    std::string p_manifest, p_edges, p_features, p_labels, p_name, p_assignment, p_out;
    std::size_t p_index = 0, p_parts = 0;
    std::uint64_t p_seed = 0;
    auto* p_manifest_opt = partition_cmd->add_option("--manifest", p_manifest, "Dataset manifest holding the graph");
    partition_cmd->add_option("--index", p_index, "Graph index within the manifest");
    auto* p_edges_opt = partition_cmd->add_option("--edges", p_edges, "Edge list file");
    auto* p_features_opt = partition_cmd->add_option("--features", p_features, "Feature CSV");
    partition_cmd->add_option("--labels", p_labels, "Label file");
    partition_cmd->add_option("--name", p_name, "Graph name");
    auto* p_parts_opt = partition_cmd->add_option("--parts", p_parts, "Number of parts (BFS partitioner)");
    partition_cmd->add_option("--seed", p_seed, "Node-order shuffle seed (0 = natural order)");
    auto* p_assign_opt =
        partition_cmd->add_option("--assignment-file", p_assignment, "External node->part assignment")
            ->check(CLI::ExistingFile);
    partition_cmd->add_option("--out", p_out, "Output directory")->required();
    p_manifest_opt->excludes(p_edges_opt);
    p_edges_opt->needs(p_features_opt);
    p_parts_opt->excludes(p_assign_opt);
    add_threads(partition_cmd);

    // kernel
    auto* kernel_cmd = app.add_subcommand("kernel", "Assemble a train (or test) kernel matrix file");
    std::string k_train, k_test, k_out, k_cache;
    std::size_t k_test_index = 0;
    KernelOptions k_opts;
    kernel_cmd->add_option("--train", k_train, "Training dataset manifest")->required()->check(CLI::ExistingFile);
    kernel_cmd->add_option("--test", k_test, "Manifest of the unseen graph; emits the test kernel")
        ->check(CLI::ExistingFile);
    kernel_cmd->add_option("--test-index", k_test_index, "Graph index within the test manifest");
    kernel_cmd->add_option("--out", k_out, "Kernel output file")->required();
    kernel_cmd->add_option("--cache-dir", k_cache, "Kernel cache directory");
    k_opts.add(kernel_cmd);
    add_threads(kernel_cmd);

    // train
    auto* train_cmd = app.add_subcommand("train", "Train the kernel SVM, or run a depth/subset experiment");
    std::string t_train, t_model, t_kernel_out, t_cache, t_subset, t_validation, t_c_grid = "0.1,1,10,100";
    std::string t_sweep, t_test, t_csv, t_subset_sizes = "1,2,5,10,20";
    std::size_t t_subset_random = 0, t_trials = 0, t_test_index = 0;
    std::uint64_t t_seed = 0;
    KernelOptions t_kopts;
    SvmOptions t_sopts;
    train_cmd->add_option("--train", t_train, "Training dataset manifest")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--model-out", t_model, "Model output file");
    train_cmd->add_option("--kernel-out", t_kernel_out, "Also write the training kernel");
    train_cmd->add_option("--cache-dir", t_cache, "Kernel cache directory");
    auto* subset_opt = train_cmd->add_option("--subset", t_subset, "Train on these graph indices, e.g. \"0,3,7\"");
    auto* subset_random_opt =
        train_cmd->add_option("--subset-random", t_subset_random, "Train on m randomly chosen graphs");
    train_cmd->add_option("--seed", t_seed, "Seed for random subsets and trials");
    train_cmd->add_option("--validation", t_validation, "Validation manifest; selects C from --c-grid")
        ->check(CLI::ExistingFile);
    train_cmd->add_option("--c-grid", t_c_grid, "Candidate C values for validation");
    auto* sweep_opt = train_cmd->add_option("--sweep-layers", t_sweep, "Depths to sweep, e.g. \"2,4,6,8\"");
    auto* trials_opt = train_cmd->add_option("--subset-trials", t_trials, "Trials per subset size");
    train_cmd->add_option("--subset-sizes", t_subset_sizes, "Subset sizes for --subset-trials");
    train_cmd->add_option("--test", t_test, "Labeled test manifest for experiments")->check(CLI::ExistingFile);
    train_cmd->add_option("--test-index", t_test_index, "Graph index within the test manifest");
    train_cmd->add_option("--csv-out", t_csv, "Experiment CSV output (default: standard output)");
    subset_opt->excludes(subset_random_opt);
    sweep_opt->excludes(trials_opt);
    t_kopts.add(train_cmd);
    t_sopts.add(train_cmd);
    add_threads(train_cmd);

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "Label every node of an unseen graph");
    std::string r_train, r_model, r_test, r_out, r_kernel_out, r_cache;
    std::size_t r_test_index = 0;
    KernelOptions r_kopts;
    predict_cmd->add_option("--train", r_train, "Training dataset manifest")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--model", r_model, "Model file from 'train'")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--test", r_test, "Manifest of the unseen graph")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--test-index", r_test_index, "Graph index within the test manifest");
    predict_cmd->add_option("--out", r_out, "Prediction output file")->required();
    predict_cmd->add_option("--kernel-out", r_kernel_out, "Also write the test kernel");
    predict_cmd->add_option("--cache-dir", r_cache, "Kernel cache directory");
    r_kopts.add(predict_cmd);
    add_threads(predict_cmd);

    // evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Accuracy report for predictions against true labels");
    std::string e_pred, e_truth, e_model, e_out;
    evaluate_cmd->add_option("--predictions", e_pred, "Prediction file")->required()->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--truth", e_truth, "True label file")->required()->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--model", e_model, "Model file whose kernel config is echoed")
        ->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--out", e_out, "Also write the JSON report here");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate planted-partition graphs for experiments");
    std::string s_out, s_prefix = "graph";
    std::size_t s_graphs = 1;
    std::uint64_t s_seed = 0;
    synthetic::PlantedPartitionSpec s_spec;
    synth_cmd->add_option("--out", s_out, "Output directory (graphs + manifest.json)")->required();
    synth_cmd->add_option("--graphs", s_graphs, "Number of graphs")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--nodes", s_spec.nodes, "Nodes per graph")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--blocks", s_spec.blocks, "Blocks (classes)")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--p-in", s_spec.p_in, "Within-block edge probability")->check(CLI::Range(0.0, 1.0));
    synth_cmd->add_option("--p-out", s_spec.p_out, "Cross-block edge probability")->check(CLI::Range(0.0, 1.0));
    synth_cmd->add_option("--dim", s_spec.dim, "Feature dimension")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--shift", s_spec.mean_shift, "Class mean offset along the first feature");
    synth_cmd->add_option("--seed", s_seed, "Generator seed");
    synth_cmd->add_option("--prefix", s_prefix, "Graph name prefix");

    std::vector<std::string> argv_storage{"resgntk"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kUsageError;
    }

    const Parallelism par{threads};
    try {
        if (*partition_cmd) {
            if (p_parts_opt->count() == 0 && p_assign_opt->count() == 0) {
                throw ArgumentError("partition needs --parts or --assignment-file");
            }
            if (p_parts_opt->count() && p_parts == 0) throw ArgumentError("--parts must be positive");
            LabeledGraph g;
            if (!p_manifest.empty()) {
                g = pick_graph(load_manifest(p_manifest), p_index, "--index");
            } else if (!p_edges.empty()) {
                std::optional<fs::path> labels;
                if (!p_labels.empty()) labels = p_labels;
                g = load_graph(p_edges, p_features, labels, p_name.empty() ? "graph" : p_name);
            } else {
                throw ArgumentError("partition needs --manifest or --edges/--features");
            }
            const auto parts = p_parts_opt->count() ? partition(g, p_parts, p_seed)
                                                    : load_partition_assignment(g, p_assignment);
            std::vector<ManifestEntry> entries;
            for (const auto& part : parts) entries.push_back(save_graph(part, fs::path(p_out) / part.name()));
            write_manifest(entries, fs::path(p_out) / "manifest.json");
            out << "parts " << parts.size() << "\nsizes";
            for (const auto& part : parts) out << ' ' << part.node_count();
            out << "\ndropped_edges " << count_dropped_edges(g, parts) << "\n";
            return kOk;
        }

        if (*kernel_cmd) {
            const KernelConfig config = k_opts.config();
            const Dataset train = load_manifest(k_train);
            std::optional<KernelCache> cache;
            if (!k_cache.empty()) cache.emplace(k_cache);
            const PipelineOptions options{par, cache ? &*cache : nullptr};
            Stopwatch sw;
            BlockKernelMatrix k;
            if (!k_test.empty()) {
                const auto g0 = pick_graph(load_manifest(k_test), k_test_index, "--test-index");
                k = assemble_test_kernel(g0, train, config, options);
            } else {
                k = assemble_train_kernel(train, config, options);
            }
            write_kernel_file(k_out, k);
            err << "kernel " << k.values.rows() << "x" << k.values.cols() << " (" << describe(config) << ") in "
                << sw.seconds() << " s\n";
            return kOk;
        }

        if (*train_cmd) {
            const KernelConfig kconfig = t_kopts.config();
            SvmConfig sconfig = t_sopts.config();
            sconfig.validate();
            Dataset train = load_manifest(t_train);
            std::optional<KernelCache> cache;
            if (!t_cache.empty()) cache.emplace(t_cache);
            const PipelineOptions options{par, cache ? &*cache : nullptr};

            if (sweep_opt->count() || trials_opt->count()) {
                if (t_test.empty()) throw ArgumentError("experiments need a labeled --test manifest");
                const auto test = pick_graph(load_manifest(t_test), t_test_index, "--test-index");
                std::ostringstream csv;
                if (sweep_opt->count()) {
                    const auto depths = parse_list<int>(t_sweep, "--sweep-layers");
                    const std::vector<Variant> variants{Variant::residual, Variant::vanilla};
                    csv << "layers,variant,accuracy\n";
                    for (const auto& row : sweep_layers(train, test, depths, variants, kconfig, sconfig, options)) {
                        csv << row.layers << ',' << to_string(row.variant) << ','
                            << text::format_double(row.accuracy) << '\n';
                    }
                } else {
                    if (t_trials == 0) throw ArgumentError("--subset-trials must be positive");
                    std::vector<std::size_t> sizes;
                    for (auto m : parse_list<std::size_t>(t_subset_sizes, "--subset-sizes")) {
                        if (m >= 1 && m <= train.graphs.size()) sizes.push_back(m);
                    }
                    if (sizes.empty()) throw ArgumentError("no valid subset sizes for this dataset");
                    csv << "m,mean_acc,std_acc\n";
                    for (const auto& row :
                         subset_trials(train, test, sizes, t_trials, t_seed, kconfig, sconfig, options)) {
                        csv << row.m << ',' << text::format_double(row.mean_accuracy) << ','
                            << text::format_double(row.std_accuracy) << '\n';
                    }
                }
                if (t_csv.empty()) out << csv.str();
                else write_text_file(t_csv, csv.str());
                return kOk;
            }

            if (t_model.empty()) throw ArgumentError("train needs --model-out (or an experiment flag)");
            if (subset_opt->count()) {
                train = train.subset(parse_list<std::size_t>(t_subset, "--subset"));
            } else if (subset_random_opt->count()) {
                train = train.subset(choose_partitions(train.graphs.size(), t_subset_random, t_seed));
            }
            if (!t_validation.empty()) {
                const auto grid = parse_list<double>(t_c_grid, "--c-grid");
                for (double c : grid) {
                    if (!(c > 0)) throw ArgumentError("--c-grid values must be positive");
                }
                sconfig.c = select_c(train, load_manifest(t_validation), grid, kconfig, sconfig, options);
                err << "validation selected C = " << sconfig.c << "\n";
            }
            Stopwatch sw;
            const auto fitted = fit(train, kconfig, sconfig, options);
            write_model_file(t_model, fitted.model);
            if (!t_kernel_out.empty()) write_kernel_file(t_kernel_out, fitted.kernel);
            if (fitted.model.svm.diagonal_jitter > 0) {
                err << "warning: kernel was not PSD; added diagonal jitter " << fitted.model.svm.diagonal_jitter << "\n";
            }
            if (!fitted.model.svm.converged()) err << "warning: SMO stopped before reaching the KKT tolerance\n";
            err << "trained on " << train.graphs.size() << " graphs / " << train.total_nodes() << " nodes ("
                << describe(kconfig) << ") in " << sw.seconds() << " s\n";
            return kOk;
        }

        if (*predict_cmd) {
            const TrainedModel model = read_model_file(r_model);
            const KernelConfig config = r_kopts.any_given() ? r_kopts.merged_with(model.kernel) : model.kernel;
            const Dataset full = load_manifest(r_train);
            const Dataset train = restrict_by_names(full, model.graph_names);
            const auto g0 = pick_graph(load_manifest(r_test), r_test_index, "--test-index").without_labels();
            std::optional<KernelCache> cache;
            if (!r_cache.empty()) cache.emplace(r_cache);
            const PipelineOptions options{par, cache ? &*cache : nullptr};
            check_model_consistency(model, train, config);
            const auto k0 = assemble_test_kernel(g0, train, config, options);
            const auto labels = predict(k0.values, model.svm);
            write_text_file(r_out, format_predictions(g0.name(), labels));
            if (!r_kernel_out.empty()) write_kernel_file(r_kernel_out, k0);
            err << "predicted " << labels.size() << " nodes of '" << g0.name() << "'\n";
            return kOk;
        }

        if (*evaluate_cmd) {
            const auto predicted = read_label_like_file(e_pred);
            const auto truth = read_label_like_file(e_truth);
            std::optional<KernelConfig> config;
            if (!e_model.empty()) config = read_model_file(e_model).kernel;
            const std::string report = format_report(evaluation_report(predicted, truth), config);
            out << report;
            if (!e_out.empty()) write_text_file(e_out, report);
            return kOk;
        }

        if (*synth_cmd) {
            std::vector<ManifestEntry> entries;
            for (std::size_t i = 0; i < s_graphs; ++i) {
                const std::string name = s_prefix + std::to_string(i);
                const auto g = synthetic::planted_partition(name, s_spec, synthetic::mix_seed(s_seed, i));
                entries.push_back(save_graph(g, fs::path(s_out) / name));
            }
            write_manifest(entries, fs::path(s_out) / "manifest.json");
            out << "wrote " << s_graphs << " graphs to " << s_out << "\n";
            return kOk;
        }
    } catch (const ArgumentError& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const ConsistencyError& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return kUsageError;
}

}  // namespace resgntk::cli
