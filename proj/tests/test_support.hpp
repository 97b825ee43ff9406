#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "resgntk/graph.hpp"

namespace resgntk::testing {

inline Matrix rows(std::initializer_list<std::initializer_list<double>> values) {
    Matrix m(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& r : values) {
        Eigen::Index j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

inline LabeledGraph path_graph(std::size_t n, Matrix x, std::optional<std::vector<ClassId>> labels = std::nullopt,
                               std::string name = "path") {
    std::vector<Edge> edges;
    for (std::size_t u = 0; u + 1 < n; ++u) edges.emplace_back(u, u + 1);
    return LabeledGraph(std::move(name), n, std::move(edges), std::move(x), std::move(labels));
}

inline LabeledGraph isolated_node(Matrix x, std::string name = "single") {
    return LabeledGraph(std::move(name), 1, {}, std::move(x), std::vector<ClassId>{0});
}

inline Matrix random_features(std::size_t n, std::size_t d, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    return x;
}

inline LabeledGraph random_graph(std::size_t n, double p, std::size_t d, std::mt19937_64& rng,
                                 std::string name = "rand") {
    std::uniform_real_distribution<double> unif;
    std::vector<Edge> edges;
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            if (unif(rng) < p) edges.emplace_back(u, v);
        }
    }
    std::vector<ClassId> labels(n);
    for (auto& c : labels) c = static_cast<ClassId>(rng() % 3);
    return LabeledGraph(std::move(name), n, std::move(edges), random_features(n, d, rng), std::move(labels));
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    auto dir = std::filesystem::temp_directory_path() / ("resgntk_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace resgntk::testing
