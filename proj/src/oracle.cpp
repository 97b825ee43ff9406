#include "resgntk/oracle.hpp"

#include <cmath>
#include <random>

#include "json.hpp"

#include "resgntk/errors.hpp"
#include "resgntk/synthetic.hpp"

namespace resgntk::oracle {

McExpectation mc_gaussian_expectation(double a, double b, double rho, std::size_t samples, std::uint64_t seed) {
    if (a < 0.0 || b < 0.0 || rho * rho > a * b + 1e-12) {
        throw CovarianceError("Monte-Carlo expectation needs a PSD covariance");
    }
    if (samples == 0) throw ArgumentError("Monte-Carlo sample count must be positive");
    // z1 = sqrt(a) g1, z2 = (rho / sqrt(a)) g1 + sqrt(b - rho^2 / a) g2.
    const double s1 = std::sqrt(a);
    const double mix = a > 0.0 ? rho / s1 : 0.0;
    const double s2 = std::sqrt(std::max(0.0, a > 0.0 ? b - rho * rho / a : b));

    std::mt19937_64 rng(synthetic::mix_seed(seed, 7));
    std::normal_distribution<double> normal(0.0, 1.0);
    double sum = 0, sum_sq = 0, dot_sum = 0, dot_sq = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double g1 = normal(rng);
        const double g2 = normal(rng);
        const double z1 = s1 * g1;
        const double z2 = mix * g1 + s2 * g2;
        const double prod = std::max(z1, 0.0) * std::max(z2, 0.0);
        const double step = (z1 > 0.0 && z2 > 0.0) ? 1.0 : 0.0;
        sum += prod;
        sum_sq += prod * prod;
        dot_sum += step;
        dot_sq += step;
    }
    const auto n = static_cast<double>(samples);
    McExpectation out;
    out.e_sigma = sum / n;
    out.e_sigma_dot = dot_sum / n;
    if (samples > 1) {
        out.se_sigma = std::sqrt(std::max(0.0, sum_sq / n - out.e_sigma * out.e_sigma) / (n - 1));
        out.se_sigma_dot = std::sqrt(std::max(0.0, dot_sq / n - out.e_sigma_dot * out.e_sigma_dot) / (n - 1));
    }
    return out;
}

// ---- finite-width network ----

namespace {

Matrix closed_adjacency_normalized(const LabeledGraph& g) {
    const auto n = static_cast<Eigen::Index>(g.node_count());
    Matrix p = Matrix::Zero(n, n);
    for (std::size_t u = 0; u < g.node_count(); ++u) {
        const double c = g.norm_factor(u);
        for (NodeIndex v : g.closed_neighborhood(u)) p(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) = c;
    }
    return p;
}

Matrix relu(const Matrix& h) { return h.cwiseMax(0.0); }

Matrix relu_mask(const Matrix& h) { return (h.array() > 0.0).cast<double>().matrix(); }

}  // namespace

FiniteWidthGnn::FiniteWidthGnn(std::size_t input_dim, std::size_t width, int layers, Variant variant,
                               std::size_t out_width, std::uint64_t seed)
    : layers_(layers), variant_(variant) {
    if (layers < 1) throw ArgumentError("network depth must be at least 1");
    if (width == 0 || out_width == 0 || input_dim == 0) throw ArgumentError("network widths must be positive");
    widths_.push_back(input_dim);
    for (int l = 1; l < layers; ++l) widths_.push_back(width);
    widths_.push_back(out_width);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw = [&](std::size_t rows, std::size_t cols) {
        Matrix w(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = normal(rng);
        return w;
    };
    for (int l = 0; l < layers; ++l) {
        const auto in = widths_[static_cast<std::size_t>(l)];
        const auto out = widths_[static_cast<std::size_t>(l) + 1];
        w1_.push_back(draw(out, in));
        if (has_skip(l)) w2_.push_back(draw(out, in));
    }
}

FiniteWidthGnn::Forward FiniteWidthGnn::forward(const LabeledGraph& g) const {
    if (g.feature_dim() != widths_.front()) throw ShapeError("graph feature dimension does not match network input");
    const Matrix p = closed_adjacency_normalized(g);
    Forward f;
    Matrix z = g.features();
    for (int l = 0; l < layers_; ++l) {
        const auto li = static_cast<std::size_t>(l);
        const double scale = 1.0 / std::sqrt(static_cast<double>(widths_[li]));
        Matrix agg = p * z;
        Matrix h = agg * w1_[li].transpose();
        if (has_skip(l)) h += z * w2_[li].transpose();
        h *= scale;
        f.post.push_back(std::move(z));
        f.agg.push_back(std::move(agg));
        z = relu(h);
        f.pre.push_back(std::move(h));
    }
    return f;
}

Vector FiniteWidthGnn::gradient(const LabeledGraph& g, const Forward& fwd, NodeIndex u) const {
    if (widths_.back() != 1) throw ArgumentError("gradient needs a scalar-output network");
    if (u >= g.node_count()) throw IndexError("node out of range");
    const Matrix p = closed_adjacency_normalized(g);
    const auto n = static_cast<Eigen::Index>(g.node_count());

    std::vector<Matrix> g1(static_cast<std::size_t>(layers_)), g2(static_cast<std::size_t>(layers_));
    Matrix delta = Matrix::Zero(n, 1);  // d out / d h^(L)
    delta(static_cast<Eigen::Index>(u), 0) = 1.0;
    for (int l = layers_ - 1; l >= 0; --l) {
        const auto li = static_cast<std::size_t>(l);
        const double scale = 1.0 / std::sqrt(static_cast<double>(widths_[li]));
        g1[li] = scale * delta.transpose() * fwd.agg[li];
        if (has_skip(l)) g2[li] = scale * delta.transpose() * fwd.post[li];
        if (l == 0) break;
        Matrix dz = scale * (p.transpose() * delta * w1_[li]);
        if (has_skip(l)) dz += scale * (delta * w2_[li]);
        delta = dz.cwiseProduct(relu_mask(fwd.pre[li - 1]));
    }
    Vector out(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index pos = 0;
    for (std::size_t l = 0; l < g1.size(); ++l) {
        out.segment(pos, g1[l].size()) = Eigen::Map<const Vector>(g1[l].data(), g1[l].size());
        pos += g1[l].size();
        if (l < w2_.size()) {
            out.segment(pos, g2[l].size()) = Eigen::Map<const Vector>(g2[l].data(), g2[l].size());
            pos += g2[l].size();
        }
    }
    return out;
}

std::size_t FiniteWidthGnn::parameter_count() const {
    std::size_t total = 0;
    for (const auto& w : w1_) total += static_cast<std::size_t>(w.size());
    for (const auto& w : w2_) total += static_cast<std::size_t>(w.size());
    return total;
}

Vector FiniteWidthGnn::parameters() const {
    Vector out(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index pos = 0;
    for (std::size_t l = 0; l < w1_.size(); ++l) {
        out.segment(pos, w1_[l].size()) = Eigen::Map<const Vector>(w1_[l].data(), w1_[l].size());
        pos += w1_[l].size();
        if (l < w2_.size()) {
            out.segment(pos, w2_[l].size()) = Eigen::Map<const Vector>(w2_[l].data(), w2_[l].size());
            pos += w2_[l].size();
        }
    }
    return out;
}

void FiniteWidthGnn::set_parameters(const Vector& theta) {
    if (static_cast<std::size_t>(theta.size()) != parameter_count()) throw ShapeError("parameter vector size");
    Eigen::Index pos = 0;
    for (std::size_t l = 0; l < w1_.size(); ++l) {
        Eigen::Map<Vector>(w1_[l].data(), w1_[l].size()) = theta.segment(pos, w1_[l].size());
        pos += w1_[l].size();
        if (l < w2_.size()) {
            Eigen::Map<Vector>(w2_[l].data(), w2_[l].size()) = theta.segment(pos, w2_[l].size());
            pos += w2_[l].size();
        }
    }
}

// ---- estimators ----

std::vector<Matrix> empirical_layer_covariance(const LabeledGraph& g, const LabeledGraph& gp,
                                               const KernelConfig& config, std::size_t width,
                                               std::size_t n_samples, std::uint64_t seed, Parallelism par) {
    config.validate();
    if (n_samples < 1 || width < 1) throw ArgumentError("width and sample count must be positive");
    if (g.feature_dim() != gp.feature_dim()) throw ShapeError("feature dimension mismatch");
    const auto layers = static_cast<std::size_t>(config.layers);
    std::vector<std::vector<Matrix>> per_draw(n_samples);
    parallel_for(n_samples, par, [&](std::size_t s) {
        const FiniteWidthGnn net(g.feature_dim(), width, config.layers, config.variant, width,
                                 synthetic::mix_seed(seed, s));
        const auto fa = net.forward(g);
        const auto fb = net.forward(gp);
        for (std::size_t l = 0; l < layers; ++l) {
            const double channels = static_cast<double>(fa.pre[l].cols());
            per_draw[s].push_back(fa.pre[l] * fb.pre[l].transpose() / channels);
        }
    });
    std::vector<Matrix> out(layers, Matrix::Zero(static_cast<Eigen::Index>(g.node_count()),
                                                 static_cast<Eigen::Index>(gp.node_count())));
    for (std::size_t s = 0; s < n_samples; ++s) {
        for (std::size_t l = 0; l < layers; ++l) out[l] += per_draw[s][l];
    }
    for (auto& m : out) m /= static_cast<double>(n_samples);
    return out;
}

Matrix empirical_ntk(const LabeledGraph& g, const LabeledGraph& gp, const KernelConfig& config, std::size_t width,
                     std::size_t n_samples, std::uint64_t seed, Parallelism par) {
    config.validate();
    if (config.jumping_knowledge) {
        throw ArgumentError("empirical NTK estimates a single-depth kernel; disable jumping knowledge and compare "
                            "layer by layer");
    }
    if (n_samples < 1 || width < 1) throw ArgumentError("width and sample count must be positive");
    if (g.feature_dim() != gp.feature_dim()) throw ShapeError("feature dimension mismatch");
    std::vector<Matrix> per_draw(n_samples);
    parallel_for(n_samples, par, [&](std::size_t s) {
        const FiniteWidthGnn net(g.feature_dim(), width, config.layers, config.variant, 1,
                                 synthetic::mix_seed(seed, s));
        const auto fa = net.forward(g);
        const auto fb = net.forward(gp);
        Matrix ga(static_cast<Eigen::Index>(g.node_count()), static_cast<Eigen::Index>(net.parameter_count()));
        Matrix gb(static_cast<Eigen::Index>(gp.node_count()), static_cast<Eigen::Index>(net.parameter_count()));
        for (std::size_t u = 0; u < g.node_count(); ++u) ga.row(static_cast<Eigen::Index>(u)) = net.gradient(g, fa, u);
        for (std::size_t u = 0; u < gp.node_count(); ++u) gb.row(static_cast<Eigen::Index>(u)) = net.gradient(gp, fb, u);
        per_draw[s] = ga * gb.transpose();
    });
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(g.node_count()), static_cast<Eigen::Index>(gp.node_count()));
    for (const auto& m : per_draw) out += m;
    return out / static_cast<double>(n_samples);
}

double relative_frobenius_error(const Matrix& estimate, const Matrix& target) {
    if (estimate.rows() != target.rows() || estimate.cols() != target.cols()) throw ShapeError("matrix shape mismatch");
    const double denom = target.norm();
    const double diff = (estimate - target).norm();
    return denom > 0.0 ? diff / denom : diff;
}

ComparisonReport compare(const Matrix& estimate, const Matrix& target, std::string target_source, std::size_t width,
                         std::size_t samples) {
    ComparisonReport r;
    r.target_source = std::move(target_source);
    r.width = width;
    r.samples = samples;
    r.frobenius_rel_error = relative_frobenius_error(estimate, target);
    r.per_entry_max_error = (estimate - target).cwiseAbs().maxCoeff();
    return r;
}

std::string format_report(const ComparisonReport& r) {
    nlohmann::json doc{{"target_matrix_source", r.target_source},
                       {"width", r.width},
                       {"samples", r.samples},
                       {"frobenius_rel_error", r.frobenius_rel_error},
                       {"per_entry_max_error", r.per_entry_max_error}};
    return doc.dump(2) + "\n";
}

}  // namespace resgntk::oracle
