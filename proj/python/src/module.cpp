#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "resgntk/errors.hpp"
#include "resgntk/experiments.hpp"
#include "resgntk/gntk.hpp"
#include "resgntk/graph.hpp"
#include "resgntk/oracle.hpp"
#include "resgntk/pipeline.hpp"
#include "resgntk/svm.hpp"
#include "resgntk/synthetic.hpp"

namespace py = pybind11;
using namespace resgntk;

namespace {

KernelConfig make_config(int layers, const std::string& variant, bool jumping_knowledge, bool normalize) {
    KernelConfig c;
    c.layers = layers;
    c.variant = parse_variant(variant);
    c.jumping_knowledge = jumping_knowledge;
    c.normalize = normalize;
    c.validate();
    return c;
}

SvmConfig make_svm(double c, double tol, std::size_t max_passes) {
    SvmConfig s;
    s.c = c;
    s.tol = tol;
    s.max_passes = max_passes;
    s.validate();
    return s;
}

PipelineOptions options(unsigned threads) { return {Parallelism{threads}, nullptr}; }

Dataset as_dataset(std::vector<LabeledGraph> graphs) { return Dataset{std::move(graphs)}; }

}  // namespace

PYBIND11_MODULE(_resgntk, m) {
    m.doc() = "Residual GNTK kernels and kernel-SVM node classification across graphs";

    static py::exception<Error> base(m, "Error");
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<IndexError>(m, "IndexError", base.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());
    py::register_exception<ConsistencyError>(m, "ConsistencyError", base.ptr());
    py::register_exception<CovarianceError>(m, "CovarianceError", base.ptr());

    py::class_<KernelConfig>(m, "KernelConfig")
        .def(py::init(&make_config), py::arg("layers") = 2, py::arg("variant") = "residual",
             py::arg("jumping_knowledge") = true, py::arg("normalize") = false)
        .def_readwrite("layers", &KernelConfig::layers)
        .def_property(
            "variant", [](const KernelConfig& c) { return to_string(c.variant); },
            [](KernelConfig& c, const std::string& v) { c.variant = parse_variant(v); })
        .def_readwrite("jumping_knowledge", &KernelConfig::jumping_knowledge)
        .def_readwrite("normalize", &KernelConfig::normalize)
        .def("__eq__", [](const KernelConfig& a, const KernelConfig& b) { return a == b; })
        .def("__repr__", [](const KernelConfig& c) { return "KernelConfig(" + describe(c) + ")"; });

    py::class_<SvmConfig>(m, "SvmConfig")
        .def(py::init(&make_svm), py::arg("c") = 1.0, py::arg("tol") = 1e-3, py::arg("max_passes") = 0)
        .def_readwrite("c", &SvmConfig::c)
        .def_readwrite("tol", &SvmConfig::tol)
        .def_readwrite("max_passes", &SvmConfig::max_passes);

    py::class_<LabeledGraph>(m, "LabeledGraph")
        .def(py::init<std::string, std::size_t, std::vector<Edge>, Matrix, std::optional<std::vector<ClassId>>>(),
             py::arg("name"), py::arg("node_count"), py::arg("edges"), py::arg("features"),
             py::arg("labels") = py::none())
        .def_property_readonly("name", &LabeledGraph::name)
        .def_property_readonly("node_count", &LabeledGraph::node_count)
        .def_property_readonly("feature_dim", &LabeledGraph::feature_dim)
        .def_property_readonly("edges", &LabeledGraph::edges)
        .def_property_readonly("features", &LabeledGraph::features)
        .def_property_readonly("labels", &LabeledGraph::labels)
        .def_property_readonly("source_nodes", &LabeledGraph::source_nodes)
        .def("closed_neighborhood",
             [](const LabeledGraph& g, NodeIndex u) {
                 auto s = g.closed_neighborhood(u);
                 return std::vector<NodeIndex>(s.begin(), s.end());
             })
        .def("without_labels", &LabeledGraph::without_labels)
        .def("__len__", &LabeledGraph::node_count)
        .def("__repr__", [](const LabeledGraph& g) {
            return "LabeledGraph('" + g.name() + "', nodes=" + std::to_string(g.node_count()) +
                   ", edges=" + std::to_string(g.edges().size()) + ")";
        });

    m.def("load_graph", &load_graph, py::arg("edges"), py::arg("features"), py::arg("labels") = py::none(),
          py::arg("name") = "");
    m.def(
        "load_manifest", [](const std::filesystem::path& p) { return load_manifest(p).graphs; }, py::arg("path"));
    m.def(
        "save_dataset",
        [](const std::vector<LabeledGraph>& graphs, const std::filesystem::path& dir) {
            std::vector<ManifestEntry> entries;
            for (const auto& g : graphs) entries.push_back(save_graph(g, dir / g.name()));
            write_manifest(entries, dir / "manifest.json");
            return dir / "manifest.json";
        },
        py::arg("graphs"), py::arg("directory"), "Writes every graph plus manifest.json; returns the manifest path.");
    m.def("partition", &partition, py::arg("graph"), py::arg("parts"), py::arg("seed") = 0);
    m.def("count_dropped_edges", &count_dropped_edges, py::arg("graph"), py::arg("parts"));

    m.def(
        "relu_expectations",
        [](double a, double b, double rho) {
            const auto r = relu_expectations(a, b, rho);
            return py::make_tuple(r.e_sigma, r.e_sigma_dot);
        },
        py::arg("a"), py::arg("b"), py::arg("rho"));
    m.def("sigma_init", &sigma_init, py::arg("g"), py::arg("gp"));
    m.def(
        "gntk_pair",
        [](const LabeledGraph& g, const LabeledGraph& gp, const KernelConfig& c, unsigned threads) {
            py::gil_scoped_release release;
            return gntk_pair(g, gp, c, Parallelism{threads});
        },
        py::arg("g"), py::arg("gp"), py::arg("config") = KernelConfig{}, py::arg("threads") = 0);
    m.def(
        "kernel_trace",
        [](const LabeledGraph& g, const LabeledGraph& gp, const KernelConfig& c) {
            auto t = kernel_trace(g, gp, c);
            return py::make_tuple(t.sigma, t.theta);
        },
        py::arg("g"), py::arg("gp"), py::arg("config") = KernelConfig{},
        "Per-layer (sigma, theta) matrices.");

    m.def(
        "train_kernel",
        [](std::vector<LabeledGraph> graphs, const KernelConfig& c, unsigned threads) {
            const auto ds = as_dataset(std::move(graphs));
            py::gil_scoped_release release;
            return assemble_train_kernel(ds, c, options(threads)).values;
        },
        py::arg("graphs"), py::arg("config") = KernelConfig{}, py::arg("threads") = 0);
    m.def(
        "test_kernel",
        [](const LabeledGraph& g0, std::vector<LabeledGraph> graphs, const KernelConfig& c, unsigned threads) {
            const auto ds = as_dataset(std::move(graphs));
            py::gil_scoped_release release;
            return assemble_test_kernel(g0, ds, c, options(threads)).values;
        },
        py::arg("g0"), py::arg("graphs"), py::arg("config") = KernelConfig{}, py::arg("threads") = 0);

    py::class_<MulticlassSvmModel>(m, "SvmModel")
        .def_readonly("classes", &MulticlassSvmModel::classes)
        .def_readonly("training_nodes", &MulticlassSvmModel::training_nodes)
        .def_property_readonly("converged", &MulticlassSvmModel::converged)
        .def_property_readonly("biases",
                               [](const MulticlassSvmModel& s) {
                                   std::vector<double> b;
                                   for (const auto& bm : s.models) b.push_back(bm.bias);
                                   return b;
                               })
        .def_property_readonly("dual_coefs", [](const MulticlassSvmModel& s) {
            std::vector<std::vector<double>> out;
            for (const auto& bm : s.models) out.push_back(bm.dual_coefs);
            return out;
        });
    m.def(
        "train_svm",
        [](const Matrix& gram, std::vector<ClassId> labels, const SvmConfig& c) {
            return train_multiclass(gram, labels, c);
        },
        py::arg("gram"), py::arg("labels"), py::arg("config") = SvmConfig{});
    m.def(
        "decision_values", [](const Matrix& k, const MulticlassSvmModel& s) { return decision_values(k, s); },
        py::arg("cross_gram"), py::arg("model"));
    m.def(
        "predict_svm", [](const Matrix& k, const MulticlassSvmModel& s) { return predict(k, s); },
        py::arg("cross_gram"), py::arg("model"));

    py::class_<TrainedModel>(m, "Model")
        .def_readonly("svm", &TrainedModel::svm)
        .def_readonly("kernel", &TrainedModel::kernel)
        .def_readonly("graph_names", &TrainedModel::graph_names)
        .def_readonly("node_counts", &TrainedModel::node_counts)
        .def("save", [](const TrainedModel& t, const std::filesystem::path& p) { write_model_file(p, t); })
        .def_static("load", [](const std::filesystem::path& p) { return read_model_file(p); });
    m.def(
        "fit",
        [](std::vector<LabeledGraph> graphs, const KernelConfig& kc, const SvmConfig& sc, unsigned threads) {
            const auto ds = as_dataset(std::move(graphs));
            py::gil_scoped_release release;
            return fit(ds, kc, sc, options(threads)).model;
        },
        py::arg("graphs"), py::arg("config") = KernelConfig{}, py::arg("svm") = SvmConfig{}, py::arg("threads") = 0);
    m.def(
        "infer",
        [](const LabeledGraph& g0, std::vector<LabeledGraph> graphs, const TrainedModel& model,
           std::optional<KernelConfig> kc, unsigned threads) {
            const auto ds = as_dataset(std::move(graphs));
            const KernelConfig c = kc.value_or(model.kernel);
            py::gil_scoped_release release;
            return infer(g0, ds, model, c, options(threads));
        },
        py::arg("g0"), py::arg("graphs"), py::arg("model"), py::arg("config") = py::none(), py::arg("threads") = 0);
    m.def(
        "evaluate",
        [](const std::vector<ClassId>& predicted, const std::vector<ClassId>& truth) {
            return evaluate(predicted, truth);
        },
        py::arg("predicted"), py::arg("truth"));

    m.def(
        "planted_partition",
        [](const std::string& name, std::size_t nodes, std::size_t blocks, double p_in, double p_out, std::size_t dim,
           double shift, std::uint64_t seed) {
            return synthetic::planted_partition(name, {nodes, blocks, p_in, p_out, dim, shift}, seed);
        },
        py::arg("name"), py::arg("nodes") = 60, py::arg("blocks") = 2, py::arg("p_in") = 0.3,
        py::arg("p_out") = 0.05, py::arg("dim") = 8, py::arg("shift") = 1.0, py::arg("seed") = 0);
    m.def("erdos_renyi", &synthetic::erdos_renyi, py::arg("name"), py::arg("nodes"), py::arg("p"), py::arg("dim"),
          py::arg("seed") = 0);

    m.def(
        "empirical_ntk",
        [](const LabeledGraph& g, const LabeledGraph& gp, const KernelConfig& c, std::size_t width,
           std::size_t samples, std::uint64_t seed) {
            py::gil_scoped_release release;
            return oracle::empirical_ntk(g, gp, c, width, samples, seed);
        },
        py::arg("g"), py::arg("gp"), py::arg("config"), py::arg("width"), py::arg("samples"), py::arg("seed") = 0);
    m.def(
        "mc_gaussian_expectation",
        [](double a, double b, double rho, std::size_t samples, std::uint64_t seed) {
            const auto r = oracle::mc_gaussian_expectation(a, b, rho, samples, seed);
            return py::make_tuple(r.e_sigma, r.e_sigma_dot, r.se_sigma, r.se_sigma_dot);
        },
        py::arg("a"), py::arg("b"), py::arg("rho"), py::arg("samples"), py::arg("seed") = 0);
}
