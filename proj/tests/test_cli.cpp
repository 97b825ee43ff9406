#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "resgntk/graph.hpp"
#include "resgntk/pipeline.hpp"
#include "test_support.hpp"

using namespace resgntk;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

void write(const fs::path& p, const std::string& s) { write_text_file(p, s); }

// Path graph 0-1-2-3 on disk.
fs::path path4(const fs::path& dir) {
    write(dir / "e.txt", "0 1\n1 2\n2 3\n");
    write(dir / "x.csv", "1,0\n0,1\n1,1\n0,0.5\n");
    write(dir / "y.txt", "0\n1\n1\n0\n");
    return dir;
}

}  // namespace

TEST_CASE("help and usage errors") {
    CHECK(run({"--help"}).code == 0);
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"kernel", "--train", "/nonexistent/manifest.json", "--out", "k"}).code == 2);
}

TEST_CASE("partition subcommand") {
    const auto dir = path4(testing::temp_dir("cli_part"));
    const std::vector<std::string> base{"partition", "--edges", (dir / "e.txt").string(), "--features",
                                        (dir / "x.csv").string(), "--labels", (dir / "y.txt").string(),
                                        "--name", "p4"};

    auto args = base;
    args.insert(args.end(), {"--parts", "2", "--out", (dir / "two").string()});
    auto r = run(args);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("parts 2") != std::string::npos);
    CHECK(r.out.find("sizes 2 2") != std::string::npos);
    CHECK(r.out.find("dropped_edges 1") != std::string::npos);
    const auto parts = load_manifest(dir / "two" / "manifest.json");
    REQUIRE(parts.graphs.size() == 2);
    CHECK(parts.graphs[0].source_nodes() == std::vector<NodeIndex>{0, 1});

    args = base;
    args.insert(args.end(), {"--parts", "1", "--out", (dir / "one").string()});
    r = run(args);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("dropped_edges 0") != std::string::npos);
    CHECK(load_manifest(dir / "one" / "manifest.json").graphs[0].edges().size() == 3);

    args = base;
    args.insert(args.end(), {"--parts", "0", "--out", (dir / "zero").string()});
    CHECK(run(args).code == 2);

    args = base;
    args.insert(args.end(), {"--parts", "5", "--out", (dir / "five").string()});
    CHECK(run(args).code == 2);

    write(dir / "assign.txt", "1\n1\n0\n0\n");
    args = base;
    args.insert(args.end(), {"--assignment-file", (dir / "assign.txt").string(), "--out", (dir / "ext").string()});
    r = run(args);
    REQUIRE(r.code == 0);
    CHECK(load_manifest(dir / "ext" / "manifest.json").graphs[0].source_nodes() == std::vector<NodeIndex>{2, 3});
    fs::remove_all(dir);
}

TEST_CASE("synth, kernel, train, predict, evaluate round trip") {
    const auto dir = testing::temp_dir("cli_flow");
    REQUIRE(run({"synth", "--out", (dir / "train").string(), "--graphs", "3", "--nodes", "30", "--seed", "1"}).code ==
            0);
    REQUIRE(run({"synth", "--out", (dir / "test").string(), "--graphs", "1", "--nodes", "30", "--seed", "2",
                 "--prefix", "heldout"})
                .code == 0);
    const auto train = (dir / "train" / "manifest.json").string();
    const auto test = (dir / "test" / "manifest.json").string();

    auto r = run({"kernel", "--train", train, "--out", (dir / "k.txt").string(), "--layers", "2"});
    REQUIRE(r.code == 0);
    const auto k = read_kernel_file(dir / "k.txt");
    CHECK(k.values.rows() == 90);
    CHECK(k.values == k.values.transpose());

    r = run({"train", "--train", train, "--model-out", (dir / "m.json").string(), "--layers", "2", "--c", "1"});
    REQUIRE(r.code == 0);
    r = run({"predict", "--train", train, "--model", (dir / "m.json").string(), "--test", test, "--out",
             (dir / "p.txt").string()});
    REQUIRE(r.code == 0);
    const auto pred = read_label_like_file(dir / "p.txt");
    CHECK(pred.size() == 30);
    CHECK(read_text_file(dir / "p.txt").rfind("#graph ", 0) == 0);

    // Same predictions as the library path.
    const auto ds = load_manifest(train);
    const auto g0 = load_manifest(test).graphs[0];
    KernelConfig c;
    c.layers = 2;
    CHECK(pred == infer(g0, ds, read_model_file(dir / "m.json"), c));

    r = run({"predict", "--train", train, "--model", (dir / "m.json").string(), "--test", test, "--out",
             (dir / "p3.txt").string(), "--layers", "3"});
    CHECK(r.code == 2);

    const auto truth = (dir / "test" / fs::path(load_manifest(test).graphs[0].name()) / "labels.txt").string();
    r = run({"evaluate", "--predictions", (dir / "p.txt").string(), "--truth", (dir / "p.txt").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("\"accuracy\": 1.0") != std::string::npos);
    REQUIRE(fs::exists(truth));
    r = run({"evaluate", "--predictions", (dir / "p.txt").string(), "--truth", truth, "--model",
             (dir / "m.json").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("\"layers\": 2") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("train experiments emit CSV") {
    const auto dir = testing::temp_dir("cli_exp");
    REQUIRE(run({"synth", "--out", (dir / "train").string(), "--graphs", "3", "--nodes", "20", "--seed", "4"}).code ==
            0);
    REQUIRE(run({"synth", "--out", (dir / "test").string(), "--graphs", "1", "--nodes", "20", "--seed", "5"}).code ==
            0);
    const auto train = (dir / "train" / "manifest.json").string();
    const auto test = (dir / "test" / "manifest.json").string();

    auto r = run({"train", "--train", train, "--test", test, "--sweep-layers", "1,2"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("layers,variant,accuracy\n", 0) == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 5);

    r = run({"train", "--train", train, "--test", test, "--subset-trials", "2", "--subset-sizes", "1,3"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("m,mean_acc,std_acc\n", 0) == 0);

    CHECK(run({"train", "--train", train, "--sweep-layers", "1,2"}).code == 2);
    fs::remove_all(dir);
}

TEST_CASE("thread count does not change output files") {
    const auto dir = testing::temp_dir("cli_threads");
    REQUIRE(run({"synth", "--out", (dir / "train").string(), "--graphs", "3", "--nodes", "25", "--seed", "6"}).code ==
            0);
    const auto train = (dir / "train" / "manifest.json").string();
    REQUIRE(run({"kernel", "--train", train, "--out", (dir / "k1.txt").string(), "--threads", "1"}).code == 0);
    REQUIRE(run({"kernel", "--train", train, "--out", (dir / "k4.txt").string(), "--threads", "4"}).code == 0);
    CHECK(read_text_file(dir / "k1.txt") == read_text_file(dir / "k4.txt"));
    fs::remove_all(dir);
}
