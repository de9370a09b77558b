#pragma once

#include <simlearn/data.hpp>
#include <simlearn/errors.hpp>
#include <simlearn/similarity.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace simlearn {

/// f(x) = sum_j alpha_j K_A(x_j, x) over the training anchors x_j.
struct Separator {
    Vector alpha;
    double margin = 1.0;
    Matrix anchors; // m x d, row j is x_j
    SimilarityModel model;

    /// Omega(f) = sum_j |alpha_j|.
    double l1_budget() const { return alpha.lpNorm<1>(); }
};

struct SeparatorConfig {
    int max_iters      = 2000;
    double step0       = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (max_iters < 1)
            throw std::invalid_argument("SeparatorConfig: max_iters must be at least 1");
        if (!(step0 > 0) || !std::isfinite(step0))
            throw std::invalid_argument("SeparatorConfig: step0 must be positive");
    }
};

namespace detail {

inline void check_separator(const Separator &sep) {
    if (sep.alpha.size() != sep.anchors.rows())
        throw std::invalid_argument("Separator: alpha length does not match anchor count");
    if (sep.anchors.cols() != sep.model.a.dim())
        throw std::invalid_argument("Separator: anchor dimension does not match similarity matrix");
}

} // namespace detail

/// w = A X^T alpha, so that f(x) = w^T x.
inline Vector separator_weights(const Separator &sep) {
    detail::check_separator(sep);
    return sep.model.a.matrix() * (sep.anchors.transpose() * sep.alpha);
}

inline double separator_value(const Separator &sep, const Vector &x) {
    const Vector w = separator_weights(sep);
    if (x.size() != w.size())
        throw std::invalid_argument("separator_value: dimension mismatch");
    return w.dot(x);
}

/// f evaluated on every row of `points`.
inline Vector separator_values(const Separator &sep, const Matrix &points) {
    const Vector w = separator_weights(sep);
    if (points.cols() != w.size())
        throw std::invalid_argument("separator_values: dimension mismatch");
    return points * w;
}

/// Class +1 when f(x) >= 0, otherwise -1.
inline int classify(const Separator &sep, const Vector &x) { return separator_value(sep, x) >= 0 ? 1 : -1; }

/// Euclidean projection onto { u : ||u||_1 <= radius } by sorting magnitudes
/// and solving sum_j max(|v_j| - theta, 0) = radius for theta.
inline Vector project_l1_ball(const Vector &v, double radius) {
    if (!(radius > 0))
        throw std::invalid_argument("project_l1_ball: radius must be positive");
    if (v.lpNorm<1>() <= radius)
        return v;
    std::vector<double> mag(static_cast<std::size_t>(v.size()));
    for (Index j = 0; j < v.size(); ++j)
        mag[static_cast<std::size_t>(j)] = std::abs(v(j));
    std::sort(mag.begin(), mag.end(), std::greater<>());
    double cumulative = 0;
    double theta      = 0;
    for (std::size_t k = 0; k < mag.size(); ++k) {
        cumulative += mag[k];
        const double candidate = (cumulative - radius) / static_cast<double>(k + 1);
        if (k + 1 == mag.size() || mag[k + 1] <= candidate) {
            theta = candidate;
            break;
        }
    }
    Vector u(v.size());
    for (Index j = 0; j < v.size(); ++j)
        u(j) = std::copysign(std::max(std::abs(v(j)) - theta, 0.0), v(j));
    return u;
}

namespace detail {

inline double mean_hinge(const Vector &scores, const Vector &labels) {
    double total = 0;
    for (Index i = 0; i < scores.size(); ++i)
        total += std::max(0.0, 1.0 - labels(i) * scores(i));
    return total / static_cast<double>(scores.size());
}

} // namespace detail

/// (1/m) sum_i [1 - y_i f(x_i)]_+ .
inline double empirical_hinge_error(const Separator &sep, const Dataset &data) {
    return detail::mean_hinge(separator_values(sep, data.features()), data.labels());
}

/// Plug-in estimate of the population hinge error on held-out data.
inline double true_hinge_error(const Separator &sep, const Dataset &holdout) {
    return empirical_hinge_error(sep, holdout);
}

/// Fraction of rows whose predicted class differs from the label.
inline double zero_one_error(const Separator &sep, const Dataset &data) {
    const Vector f = separator_values(sep, data.features());
    Index wrong    = 0;
    for (Index i = 0; i < f.size(); ++i)
        if ((f(i) >= 0 ? 1.0 : -1.0) != data.y(i))
            ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(f.size());
}

/// alpha^0_j = y_j / (m r): the feasible point whose hinge error equals
/// E_z(A) for the same A.
inline Vector anchor_alpha(const Dataset &data, double margin) {
    detail::check_margin(margin, "anchor_alpha");
    return data.labels() / (static_cast<double>(data.m()) * margin);
}

inline Separator make_separator(const SimilarityModel &model, const Dataset &data, Vector alpha) {
    detail::check_dims(model.a, data, "make_separator");
    Separator sep{std::move(alpha), model.config.margin, data.features(), model};
    detail::check_separator(sep);
    return sep;
}

/// Projected subgradient descent for the L1-constrained hinge problem over
/// the learnt similarity. Starts at alpha^0, steps with eta_t = step0/sqrt(t),
/// projects onto the ball of radius 1/r and returns the best iterate, so the
/// result never scores worse than alpha^0.
inline Separator train_separator(const SimilarityModel &model, const Dataset &data, const SeparatorConfig &config) {
    config.validate();
    detail::check_dims(model.a, data, "train_separator");
    const double r      = model.config.margin;
    const double radius = 1.0 / r;
    const double m      = static_cast<double>(data.m());
    const Vector &y     = data.labels();

    // Gram matrix K(i, j) = K_A(x_i, x_j); f(x_i) = (K alpha)_i.
    const Matrix gram = data.features() * model.a.matrix() * data.features().transpose();

    Vector alpha      = anchor_alpha(data, r);
    Vector best_alpha = alpha;
    double best_error = detail::mean_hinge(gram * alpha, y);
    Vector weights(data.m());

    for (int t = 1; t <= config.max_iters; ++t) {
        const Vector scores = gram * alpha;
        for (Index i = 0; i < data.m(); ++i)
            weights(i) = (1.0 - y(i) * scores(i) > 0) ? y(i) : 0.0;
        const Vector grad = -(gram * weights) / m;
        const double eta  = config.step0 / std::sqrt(static_cast<double>(t));
        alpha             = project_l1_ball(alpha - eta * grad, radius);
        if (!alpha.allFinite())
            throw numeric_error("train_separator: non-finite coefficients at iteration " + std::to_string(t));
        const double error = detail::mean_hinge(gram * alpha, y);
        if (error < best_error) {
            best_error = error;
            best_alpha = alpha;
        }
    }
    return make_separator(model, data, std::move(best_alpha));
}

} // namespace simlearn
