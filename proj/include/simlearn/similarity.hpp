#pragma once

#include <simlearn/data.hpp>
#include <simlearn/errors.hpp>
#include <simlearn/norms.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace simlearn {

struct SimilarityConfig {
    double lambda      = 0.1; // regularization weight
    double margin      = 1.0;
    NormKind norm_kind = NormKind::Frobenius;
    int max_iters      = 2000;
    double step0       = 1.0;
    double rel_tol     = 1e-8;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(lambda > 0) || !std::isfinite(lambda))
            throw std::invalid_argument("SimilarityConfig: lambda must be positive");
        if (!(margin > 0) || !std::isfinite(margin))
            throw std::invalid_argument("SimilarityConfig: margin must be positive");
        if (max_iters < 1)
            throw std::invalid_argument("SimilarityConfig: max_iters must be at least 1");
        if (!(step0 > 0) || !std::isfinite(step0))
            throw std::invalid_argument("SimilarityConfig: step0 must be positive");
        if (!(rel_tol >= 0))
            throw std::invalid_argument("SimilarityConfig: rel_tol must be nonnegative");
    }
};

/// Learnt similarity matrix with the settings that produced it.
struct SimilarityModel {
    SymMatrix a;
    SimilarityConfig config;
    double final_objective = 1.0;
    int iterations_run     = 0;
};

/// K_A(x, x2) = x^T A x2.
inline double similarity_score(const SymMatrix &a, const Vector &x, const Vector &x2) {
    if (x.size() != a.dim() || x2.size() != a.dim())
        throw std::invalid_argument("similarity_score: dimension mismatch");
    return x.dot(a.matrix() * x2);
}

namespace detail {

inline void check_dims(const SymMatrix &a, const Dataset &data, const char *who) {
    if (a.dim() != data.d())
        throw std::invalid_argument(std::string(who) + ": matrix dimension " + std::to_string(a.dim()) +
                                    " does not match feature dimension " + std::to_string(data.d()));
}

inline void check_margin(double margin, const char *who) {
    if (!(margin > 0))
        throw std::invalid_argument(std::string(who) + ": margin must be positive");
}

} // namespace detail

/// Per-sample agreement t_i = (1/(m r)) sum_j y_i y_j K_A(x_i, x_j),
/// self-pair included. Uses sum_j y_j K_A(x_i, x_j) = x_i^T A s with
/// s = sum_j y_j x_j, so the cost is O(m d + d^2).
inline Vector similarity_agreements(const SymMatrix &a, const Dataset &data, double margin) {
    detail::check_dims(a, data, "similarity_agreements");
    detail::check_margin(margin, "similarity_agreements");
    const Vector s  = data.features().transpose() * data.labels();
    const Vector as = a.matrix() * s;
    const double m  = static_cast<double>(data.m());
    return (data.features() * as).cwiseProduct(data.labels()) / (m * margin);
}

/// (1/m) sum_i [1 - t_i]_+ .
inline double empirical_similarity_error(const SymMatrix &a, const Dataset &data, double margin) {
    const Vector t = similarity_agreements(a, data, margin);
    double total   = 0;
    for (Index i = 0; i < t.size(); ++i)
        total += std::max(0.0, 1.0 - t(i));
    return total / static_cast<double>(t.size());
}

/// Plug-in estimate of the population similarity error from held-out data:
/// the same double average, taken over the holdout sample.
inline double true_similarity_error(const SymMatrix &a, const Dataset &holdout, double margin) {
    return empirical_similarity_error(a, holdout, margin);
}

inline double similarity_objective(const SymMatrix &a, const Dataset &data, const SimilarityConfig &config) {
    return empirical_similarity_error(a, data, config.margin) + config.lambda * norm(a, config.norm_kind);
}

/// An element of the subdifferential of the empirical similarity error:
/// -(1/(m^2 r)) sym(u s^T) with u = sum over active i of y_i x_i. Samples
/// sitting exactly on the kink are treated as inactive.
inline SymMatrix hinge_subgradient(const SymMatrix &a, const Dataset &data, double margin) {
    const Vector t = similarity_agreements(a, data, margin);
    const Vector s = data.features().transpose() * data.labels();
    Vector u       = Vector::Zero(data.d());
    for (Index i = 0; i < data.m(); ++i)
        if (1.0 - t(i) > 0)
            u += data.y(i) * data.features().row(i).transpose();
    const double m = static_cast<double>(data.m());
    const double c = -1.0 / (m * m * margin);
    return symmetrize(c * (u * s.transpose()));
}

/// Proximal subgradient descent on E_z(A) + lambda ||A|| from A = 0.
///
/// Step t uses eta_t = step0 / sqrt(t) and A <- prox(A - eta_t G, eta_t
/// lambda). The best iterate is returned; since A = 0 scores exactly 1 the
/// result always has objective <= 1 and hence ||A|| <= 1/lambda. Every 50
/// iterations the run stops if the best objective improved by no more than
/// rel_tol (relative) since the previous check; rel_tol = 0 disables this.
inline SimilarityModel train_similarity(const Dataset &data, const SimilarityConfig &config) {
    config.validate();
    constexpr int window = 50;

    SymMatrix current(data.d());
    SimilarityModel best{current, config, similarity_objective(current, data, config), 0};
    double checkpoint = best.final_objective;

    int t = 1;
    for (; t <= config.max_iters; ++t) {
        const SymMatrix g = hinge_subgradient(current, data, config.margin);
        const double eta  = config.step0 / std::sqrt(static_cast<double>(t));
        Matrix stepped    = current.matrix() - eta * g.matrix();
        if (!stepped.allFinite())
            throw numeric_error("train_similarity: non-finite iterate at iteration " + std::to_string(t));
        current                = prox(SymMatrix(std::move(stepped)), eta * config.lambda, config.norm_kind);
        const double objective = similarity_objective(current, data, config);
        if (!std::isfinite(objective))
            throw numeric_error("train_similarity: non-finite objective at iteration " + std::to_string(t));
        if (objective < best.final_objective) {
            best.a               = current;
            best.final_objective = objective;
        }
        if (config.rel_tol > 0 && t % window == 0) {
            if (checkpoint - best.final_objective <= config.rel_tol * std::abs(checkpoint))
                break;
            checkpoint = best.final_objective;
        }
    }
    best.iterations_run = std::min(t, config.max_iters);
    return best;
}

} // namespace simlearn
