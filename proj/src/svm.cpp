#include "resgntk/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <Eigen/Eigenvalues>

#include "resgntk/errors.hpp"

namespace resgntk {

void SvmConfig::validate() const {
    if (!(c > 0.0) || !std::isfinite(c)) throw ArgumentError("SVM C must be a positive finite number");
    if (!(tol > 0.0) || !std::isfinite(tol)) throw ArgumentError("SVM tolerance must be a positive finite number");
}

double BinaryModel::decision(std::span<const double> kernel_row) const {
    if (kernel_row.size() != dual_coefs.size()) {
        throw ShapeError("kernel row has " + std::to_string(kernel_row.size()) + " entries, model expects " +
                         std::to_string(dual_coefs.size()));
    }
    double s = 0.0;
    for (std::size_t i : support_indices) s += dual_coefs[i] * kernel_row[i];
    return s + bias;
}

namespace {

constexpr double kTau = 1e-12;

void check_gram(const Matrix& gram) {
    if (gram.rows() != gram.cols()) throw ShapeError("Gram matrix must be square");
    if (!gram.allFinite()) throw DataError("Gram matrix contains non-finite entries");
}

}  // namespace

BinaryModel train_binary(const Matrix& gram, std::span<const int> labels, const SvmConfig& config,
                         const ObjectiveTrace& trace) {
    config.validate();
    check_gram(gram);
    const auto n = static_cast<std::size_t>(gram.rows());
    if (labels.size() != n) {
        throw ShapeError("label count " + std::to_string(labels.size()) + " != Gram size " + std::to_string(n));
    }
    bool has_pos = false, has_neg = false;
    for (int y : labels) {
        if (y == 1) has_pos = true;
        else if (y == -1) has_neg = true;
        else throw ArgumentError("binary labels must be +1 or -1");
    }
    if (!has_pos || !has_neg) throw ArgumentError("binary SVM needs both classes present");

    const double C = config.c;
    const std::size_t stall_limit = config.max_passes ? config.max_passes : 10 * n;
    const std::size_t hard_cap = std::max<std::size_t>(1'000'000, 1000 * n);

    std::vector<double> y(labels.begin(), labels.end());
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);  // gradient of 1/2 a'Qa - e'a
    auto q = [&](std::size_t i, std::size_t j) {
        return y[i] * y[j] * gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    };
    auto objective = [&] {
        double f = 0.0;
        for (std::size_t t = 0; t < n; ++t) f += alpha[t] * (grad[t] - 1.0);
        return -0.5 * f;
    };
    auto in_up = [&](std::size_t t) { return y[t] > 0 ? alpha[t] < C : alpha[t] > 0.0; };
    auto in_low = [&](std::size_t t) { return y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < C; };

    BinaryModel model;
    model.config = config;
    model.converged = false;
    double current = 0.0;
    std::size_t stall = 0;
    std::size_t iter = 0;
    for (; iter < hard_cap; ++iter) {
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        std::size_t i = n, j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            if (in_up(t) && v > gmax) {
                gmax = v;
                i = t;
            }
            if (in_low(t) && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        if (i == n || j == n || gmax - gmin < config.tol) {
            model.converged = true;
            break;
        }

        const double old_i = alpha[i], old_j = alpha[j];
        const double qii = q(i, i), qjj = q(j, j), qij = q(i, j);
        if (y[i] != y[j]) {
            double quad = qii + qjj + 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
            } else {
                if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
            }
            if (diff > 0.0) {
                if (alpha[i] > C) { alpha[i] = C; alpha[j] = C - diff; }
            } else {
                if (alpha[j] > C) { alpha[j] = C; alpha[i] = C + diff; }
            }
        } else {
            double quad = qii + qjj - 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) { alpha[i] = C; alpha[j] = sum - C; }
            } else {
                if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
            }
            if (sum > C) {
                if (alpha[j] > C) { alpha[j] = C; alpha[i] = sum - C; }
            } else {
                if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
            }
        }
        const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
        for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, i) * di + q(t, j) * dj;

        const double next = objective();
        if (trace) trace(iter, next);
        stall = next - current <= 1e-15 * std::max(1.0, std::abs(next)) ? stall + 1 : 0;
        current = next;
        if (stall >= stall_limit) {
            ++iter;
            break;
        }
    }
    model.iterations = iter;

    // Bias: mean over free vectors, else midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (alpha[t] >= C) {
            if (y[t] < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (alpha[t] <= 0.0) {
            if (y[t] > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            free_sum += yg;
            ++free_count;
        }
    }
    const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (ub + lb);
    model.bias = -rho;

    model.dual_coefs.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        model.dual_coefs[t] = alpha[t] * y[t];
        if (alpha[t] > 0.0) model.support_indices.push_back(t);
    }
    return model;
}

double dual_objective(const Matrix& gram, std::span<const int> labels, const BinaryModel& model) {
    const auto n = static_cast<Eigen::Index>(labels.size());
    double linear = 0.0, quad = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double ai = model.dual_coefs[static_cast<std::size_t>(i)] * labels[static_cast<std::size_t>(i)];
        linear += ai;
        for (Eigen::Index j = 0; j < n; ++j) {
            quad += model.dual_coefs[static_cast<std::size_t>(i)] * model.dual_coefs[static_cast<std::size_t>(j)] *
                    gram(i, j);
        }
    }
    return linear - 0.5 * quad;
}

std::optional<GramRepair> repair_gram(const Matrix& gram) {
    check_gram(gram);
    const auto n = gram.rows();
    if (n == 0) return std::nullopt;
    const Eigen::MatrixXd dense = gram;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense, Eigen::EigenvaluesOnly);
    const double min_eig = solver.eigenvalues().minCoeff();
    const double threshold = -1e-8 * gram.trace() / static_cast<double>(n);
    if (min_eig >= threshold) return std::nullopt;
    GramRepair r{gram, -min_eig};
    r.gram.diagonal().array() += r.jitter;
    return r;
}

bool MulticlassSvmModel::converged() const {
    return std::all_of(models.begin(), models.end(), [](const BinaryModel& m) { return m.converged; });
}

MulticlassSvmModel train_multiclass(const Matrix& gram, std::span<const ClassId> labels, const SvmConfig& config,
                                    Parallelism par) {
    config.validate();
    check_gram(gram);
    if (labels.size() != static_cast<std::size_t>(gram.rows())) {
        throw ShapeError("label count " + std::to_string(labels.size()) + " != Gram size " +
                         std::to_string(gram.rows()));
    }
    const std::set<ClassId> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2) throw ArgumentError("classification needs at least two classes in the training labels");

    MulticlassSvmModel model;
    model.classes.assign(distinct.begin(), distinct.end());
    model.training_nodes = labels.size();
    model.config = config;
    const auto repaired = repair_gram(gram);
    const Matrix& k = repaired ? repaired->gram : gram;
    if (repaired) model.diagonal_jitter = repaired->jitter;

    model.models.resize(model.classes.size());
    parallel_for(model.classes.size(), par, [&](std::size_t c) {
        std::vector<int> y(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == model.classes[c] ? 1 : -1;
        model.models[c] = train_binary(k, y, config);
    });
    return model;
}

Matrix decision_values(const Matrix& cross_gram, const MulticlassSvmModel& model) {
    if (static_cast<std::size_t>(cross_gram.cols()) != model.training_nodes) {
        throw ShapeError("cross kernel has " + std::to_string(cross_gram.cols()) + " columns, model was trained on " +
                         std::to_string(model.training_nodes) + " nodes");
    }
    Matrix out(cross_gram.rows(), static_cast<Eigen::Index>(model.models.size()));
    for (Eigen::Index t = 0; t < cross_gram.rows(); ++t) {
        const std::span<const double> row(cross_gram.row(t).data(), static_cast<std::size_t>(cross_gram.cols()));
        for (std::size_t c = 0; c < model.models.size(); ++c) {
            out(t, static_cast<Eigen::Index>(c)) = model.models[c].decision(row);
        }
    }
    return out;
}

std::vector<ClassId> predict(const Matrix& cross_gram, const MulticlassSvmModel& model) {
    const Matrix dv = decision_values(cross_gram, model);
    std::vector<ClassId> out(static_cast<std::size_t>(dv.rows()));
    for (Eigen::Index t = 0; t < dv.rows(); ++t) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < dv.cols(); ++c) {
            if (dv(t, c) > dv(t, best)) best = c;
        }
        out[static_cast<std::size_t>(t)] = model.classes[static_cast<std::size_t>(best)];
    }
    return out;
}

}  // namespace resgntk
