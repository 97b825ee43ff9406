#include "resgntk/gntk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "resgntk/errors.hpp"

namespace resgntk {

std::string to_string(Variant v) { return v == Variant::residual ? "residual" : "vanilla"; }

Variant parse_variant(std::string_view name) {
    if (name == "residual") return Variant::residual;
    if (name == "vanilla") return Variant::vanilla;
    throw ArgumentError("unknown kernel variant '" + std::string(name) + "' (expected residual|vanilla)");
}

void KernelConfig::validate() const {
    if (layers < 1) throw ArgumentError("kernel depth must be at least 1, got " + std::to_string(layers));
}

std::string describe(const KernelConfig& c) {
    return "L=" + std::to_string(c.layers) + " variant=" + to_string(c.variant) +
           " jk=" + (c.jumping_knowledge ? "on" : "off") + " normalize=" + (c.normalize ? "on" : "off");
}

ReluExpectation relu_expectations(double a, double b, double rho) {
    constexpr double kTol = 1e-12;
    if (!(a >= 0.0) || !(b >= 0.0) || !std::isfinite(rho)) {
        throw CovarianceError("invalid variances (" + std::to_string(a) + ", " + std::to_string(b) + ")");
    }
    const double ab = a * b;
    if (rho * rho > ab * (1.0 + kTol) + kTol) {
        throw CovarianceError("covariance violates Cauchy-Schwarz: rho=" + std::to_string(rho) +
                              ", a=" + std::to_string(a) + ", b=" + std::to_string(b));
    }
    const double scale = std::sqrt(ab);
    if (scale == 0.0) return {};
    const double lambda = std::clamp(rho / scale, -1.0, 1.0);
    const double theta = std::acos(lambda);
    constexpr double pi = std::numbers::pi;
    ReluExpectation out;
    out.e_sigma = scale * (std::sin(theta) + (pi - theta) * lambda) / (2.0 * pi);
    out.e_sigma_dot = (pi - theta) / (2.0 * pi);
    return out;
}

namespace {

double dot_rows(const Matrix& x, Eigen::Index i, const Matrix& y, Eigen::Index j) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < x.cols(); ++k) s += x(i, k) * y(j, k);
    return s;
}

// Row u holds the sum of feature rows over N(u), in ascending neighbor order.
Matrix neighborhood_sums(const LabeledGraph& g) {
    const Matrix& x = g.features();
    Matrix s = Matrix::Zero(x.rows(), x.cols());
    for (std::size_t u = 0; u < g.node_count(); ++u) {
        for (NodeIndex v : g.closed_neighborhood(u)) {
            s.row(static_cast<Eigen::Index>(u)) += x.row(static_cast<Eigen::Index>(v));
        }
    }
    return s;
}

Vector norm_factors(const LabeledGraph& g) {
    Vector c(static_cast<Eigen::Index>(g.node_count()));
    for (std::size_t u = 0; u < g.node_count(); ++u) c[static_cast<Eigen::Index>(u)] = g.norm_factor(u);
    return c;
}

// c_u c_u' * sum_{v in N(u), v' in N(u')} m[v, v'].
//
// The double sum is evaluated along both nesting orders and averaged. Swapping the
// roles of the two graphs swaps the two orders, so the result for (gp, g) is the exact
// transpose of the result for (g, gp).
Matrix aggregate_pairs(const Matrix& m, const LabeledGraph& g, const LabeledGraph& gp, Parallelism par) {
    const auto n = m.rows();
    const auto np = m.cols();
    const Vector c = norm_factors(g);
    const Vector cp = norm_factors(gp);

    Matrix inner_cols(n, np);  // [v, u'] = sum_{v' in N(u')} m[v, v']
    Matrix inner_rows(n, np);  // [u, v'] = sum_{v in N(u)} m[v, v']
    parallel_for(static_cast<std::size_t>(n), par, [&](std::size_t v) {
        const auto vi = static_cast<Eigen::Index>(v);
        for (Eigen::Index up = 0; up < np; ++up) {
            double s = 0.0;
            for (NodeIndex vp : gp.closed_neighborhood(static_cast<NodeIndex>(up))) {
                s += m(vi, static_cast<Eigen::Index>(vp));
            }
            inner_cols(vi, up) = s;
        }
        auto row = inner_rows.row(vi);
        row.setZero();
        for (NodeIndex w : g.closed_neighborhood(v)) row += m.row(static_cast<Eigen::Index>(w));
    });

    Matrix out(n, np);
    parallel_for(static_cast<std::size_t>(n), par, [&](std::size_t u) {
        const auto ui = static_cast<Eigen::Index>(u);
        const auto hood = g.closed_neighborhood(u);
        for (Eigen::Index up = 0; up < np; ++up) {
            double rows_first = 0.0;
            for (NodeIndex v : hood) rows_first += inner_cols(static_cast<Eigen::Index>(v), up);
            double cols_first = 0.0;
            for (NodeIndex vp : gp.closed_neighborhood(static_cast<NodeIndex>(up))) {
                cols_first += inner_rows(ui, static_cast<Eigen::Index>(vp));
            }
            out(ui, up) = (c[ui] * cp[up]) * (0.5 * (rows_first + cols_first));
        }
    });
    return out;
}

struct Expectations {
    Matrix e_sigma;
    Matrix e_sigma_dot;
};

Expectations expectations(const Matrix& sigma, const Vector& diag_g, const Vector& diag_gp, Parallelism par) {
    Expectations e{Matrix(sigma.rows(), sigma.cols()), Matrix(sigma.rows(), sigma.cols())};
    parallel_for(static_cast<std::size_t>(sigma.rows()), par, [&](std::size_t u) {
        const auto ui = static_cast<Eigen::Index>(u);
        for (Eigen::Index up = 0; up < sigma.cols(); ++up) {
            const auto r = relu_expectations(diag_g[ui], diag_gp[up], sigma(ui, up));
            e.e_sigma(ui, up) = r.e_sigma;
            e.e_sigma_dot(ui, up) = r.e_sigma_dot;
        }
    });
    return e;
}

struct StepResult {
    Matrix sigma;
    Matrix theta;
};

// One layer of the recursion on a (possibly cross-graph) block. diag_g / diag_gp are the
// current within-graph variances of the two graphs. theta may be null when only the
// covariance is needed.
StepResult step(const Matrix& sigma, const Matrix* theta, const Vector& diag_g, const Vector& diag_gp,
                const LabeledGraph& g, const LabeledGraph& gp, Variant variant, Parallelism par) {
    const bool residual = variant == Variant::residual;
    const Expectations e = expectations(sigma, diag_g, diag_gp, par);
    StepResult out;
    out.sigma = aggregate_pairs(e.e_sigma, g, gp, par);
    if (residual) out.sigma += e.e_sigma;
    if (theta) {
        const Matrix weighted = theta->cwiseProduct(e.e_sigma_dot);
        const Matrix spread = aggregate_pairs(weighted, g, gp, par);
        out.theta = residual ? Matrix((out.sigma + weighted) + spread) : Matrix(out.sigma + spread);
    }
    return out;
}

void check_dims(const LabeledGraph& g, const LabeledGraph& gp) {
    if (g.feature_dim() != gp.feature_dim()) {
        throw ShapeError("feature dimension mismatch: '" + g.name() + "' has " + std::to_string(g.feature_dim()) +
                         ", '" + gp.name() + "' has " + std::to_string(gp.feature_dim()));
    }
    if (g.feature_dim() == 0) throw ShapeError("feature dimension must be at least 1");
}

}  // namespace

Matrix sigma_init(const LabeledGraph& g, const LabeledGraph& gp) {
    check_dims(g, gp);
    const Matrix& x = g.features();
    const Matrix& xp = gp.features();
    const Matrix s = neighborhood_sums(g);
    const Matrix sp = neighborhood_sums(gp);
    const Vector c = norm_factors(g);
    const Vector cp = norm_factors(gp);
    const double inv_d = 1.0 / static_cast<double>(g.feature_dim());
    Matrix out(x.rows(), xp.rows());
    for (Eigen::Index u = 0; u < x.rows(); ++u) {
        for (Eigen::Index up = 0; up < xp.rows(); ++up) {
            out(u, up) = inv_d * dot_rows(x, u, xp, up) + inv_d * ((c[u] * cp[up]) * dot_rows(s, u, sp, up));
        }
    }
    return out;
}

PairKernelState initial_state(const LabeledGraph& g, const LabeledGraph& gp) {
    PairKernelState st;
    st.cross_sigma = sigma_init(g, gp);
    st.self_sigma_g = sigma_init(g, g);
    st.self_sigma_gp = sigma_init(gp, gp);
    st.cross_theta = st.cross_sigma;
    st.accumulated = st.cross_theta;
    st.layer = 1;
    return st;
}

PairKernelState layer_step(const PairKernelState& state, const KernelConfig& config, const LabeledGraph& g,
                           const LabeledGraph& gp, Parallelism par) {
    config.validate();
    if (state.cross_sigma.rows() != static_cast<Eigen::Index>(g.node_count()) ||
        state.cross_sigma.cols() != static_cast<Eigen::Index>(gp.node_count())) {
        throw ShapeError("kernel state does not match the graph pair");
    }
    const Vector diag_g = state.self_sigma_g.diagonal();
    const Vector diag_gp = state.self_sigma_gp.diagonal();
    PairKernelState next;
    auto cross = step(state.cross_sigma, &state.cross_theta, diag_g, diag_gp, g, gp, config.variant, par);
    next.cross_sigma = std::move(cross.sigma);
    next.cross_theta = std::move(cross.theta);
    next.self_sigma_g = step(state.self_sigma_g, nullptr, diag_g, diag_g, g, g, config.variant, par).sigma;
    next.self_sigma_gp = step(state.self_sigma_gp, nullptr, diag_gp, diag_gp, gp, gp, config.variant, par).sigma;
    next.accumulated = config.jumping_knowledge ? Matrix(state.accumulated + next.cross_theta) : next.cross_theta;
    next.layer = state.layer + 1;
    return next;
}

GraphProfile graph_profile(const LabeledGraph& g, const KernelConfig& config, Parallelism par) {
    config.validate();
    GraphProfile profile;
    Matrix sigma = sigma_init(g, g);
    Matrix theta = sigma;
    Matrix acc = theta;
    profile.sigma_diag.push_back(sigma.diagonal());
    for (int l = 1; l < config.layers; ++l) {
        const Vector diag = sigma.diagonal();
        auto next = step(sigma, &theta, diag, diag, g, g, config.variant, par);
        sigma = std::move(next.sigma);
        theta = std::move(next.theta);
        if (config.jumping_knowledge) acc += theta;
        profile.sigma_diag.push_back(sigma.diagonal());
    }
    profile.theta_diag = config.jumping_knowledge ? Vector(acc.diagonal()) : Vector(theta.diagonal());
    return profile;
}

Matrix gntk_pair(const LabeledGraph& g, const GraphProfile& profile_g, const LabeledGraph& gp,
                 const GraphProfile& profile_gp, const KernelConfig& config, Parallelism par) {
    config.validate();
    const auto depth = static_cast<std::size_t>(config.layers);
    if (profile_g.sigma_diag.size() != depth || profile_gp.sigma_diag.size() != depth) {
        throw ConsistencyError("graph profile depth does not match kernel config");
    }
    Matrix sigma = sigma_init(g, gp);
    Matrix theta = sigma;
    Matrix acc = theta;
    for (std::size_t l = 1; l < depth; ++l) {
        auto next = step(sigma, &theta, profile_g.sigma_diag[l - 1], profile_gp.sigma_diag[l - 1], g, gp,
                         config.variant, par);
        sigma = std::move(next.sigma);
        theta = std::move(next.theta);
        if (config.jumping_knowledge) acc += theta;
    }
    Matrix out = config.jumping_knowledge ? std::move(acc) : std::move(theta);
    if (config.normalize) {
        for (Eigen::Index u = 0; u < out.rows(); ++u) {
            for (Eigen::Index up = 0; up < out.cols(); ++up) {
                const double denom = std::sqrt(profile_g.theta_diag[u] * profile_gp.theta_diag[up]);
                out(u, up) = denom > 0.0 ? out(u, up) / denom : 0.0;
            }
        }
    }
    return out;
}

Matrix gntk_pair(const LabeledGraph& g, const LabeledGraph& gp, const KernelConfig& config, Parallelism par) {
    check_dims(g, gp);
    const GraphProfile pg = graph_profile(g, config, par);
    const GraphProfile pgp = graph_profile(gp, config, par);
    return gntk_pair(g, pg, gp, pgp, config, par);
}

KernelTrace kernel_trace(const LabeledGraph& g, const LabeledGraph& gp, const KernelConfig& config,
                         Parallelism par) {
    config.validate();
    KernelTrace trace;
    PairKernelState st = initial_state(g, gp);
    trace.sigma.push_back(st.cross_sigma);
    trace.theta.push_back(st.cross_theta);
    for (int l = 1; l < config.layers; ++l) {
        st = layer_step(st, config, g, gp, par);
        trace.sigma.push_back(st.cross_sigma);
        trace.theta.push_back(st.cross_theta);
    }
    return trace;
}

}  // namespace resgntk
